// Acceptance suite: runs every stated criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "siegel/arith.hpp"
#include "siegel/characters.hpp"
#include "siegel/context.hpp"
#include "siegel/driver.hpp"
#include "siegel/engine.hpp"
#include "siegel/kernels.hpp"
#include "siegel/lfuncs.hpp"
#include "siegel/quadforms.hpp"

using namespace siegel;

namespace {

const arith::ArithTables& tables() {
    static arith::ArithTables t = arith::build_tables(2'000'000);
    return t;
}

std::vector<int64_t> fundamentals(int64_t lo, int64_t hi) {
    std::vector<int64_t> out;
    for (int64_t d = lo; d <= hi; ++d) {
        if (d == 0 || d == 1) continue;
        if (chars::is_fundamental(tables(), d)) out.push_back(d);
    }
    return out;
}

struct Criterion {
    int id;
    const char* label;
    double limit_seconds;
    std::function<bool(std::string&)> run;
};

bool rel_ok(double a, double b, double tol, double floor_scale = 1e-3) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor_scale});
}

// --- 1: quadratic identity suite -------------------------------------------
bool crit_identities(std::string& detail) {
    int checked = 0, bad = 0;
    for (int64_t delta : {-3, -4, -7, -8, -11, -15, -20, 5, 8, 13}) {
        auto tab = chars::build_character_table(tables(), delta);
        auto ctx = engine::build_context(tables(), tab, engine::Z0Variant::z0_prime);
        double D = double(ctx.D());
        const std::pair<double, double> windows[] = {
            {1.0, 10.0 * D}, {0.5 * D, 25.0 * D}, {1.0, 40.0 * D}};
        for (int64_t M : {1, 3, 5, 8, 12}) {
            for (auto [A1, A2] : windows) {
                for (int64_t a : {1, 2, 3}) {
                    double direct = engine::v_norm_direct(ctx, M, a, A1, A2);
                    double arith_v = engine::v_norm_arith(ctx, M, a, A1, A2);
                    auto [diag, off] = engine::diag_offdiag(ctx, M, a, A1, A2);
                    ++checked;
                    if (!rel_ok(direct, arith_v, 1e-6) ||
                        !rel_ok(direct, diag + off, 1e-6))
                        ++bad;
                }
            }
        }
    }
    detail = std::to_string(checked) + " configurations, " + std::to_string(bad) +
             " violations";
    return bad == 0;
}

// --- 2: smoothing suite ------------------------------------------------------
bool crit_smoothing(std::string& detail) {
    int bad = 0;
    // squared-kernel expansion
    for (int64_t n = 1; n <= 8; ++n) {
        auto kc = kernels::kernel_coefficients(2, n);
        for (int i = 0; i < 100; ++i) {
            double x = 0.011 + 6.2 * i / 100.0;
            double lhs = 0.0;
            for (int64_t l = -2 * n; l <= 2 * n; ++l)
                lhs += kc.B(l).get_d() * std::cos(l * x);
            double s = kernels::dirichlet_kernel(n, x);
            if (std::abs(lhs - s * s) > 1e-9) ++bad;
        }
    }
    // reconstruction from the weights
    for (int ka = 1; ka <= 5; ++ka)
        for (int64_t n = 1; n <= 8; ++n) {
            auto kw = kernels::kernel_weights(kernels::kernel_coefficients(ka, n));
            for (int i = 0; i < 100; ++i) {
                double x = 0.013 + 6.2 * i / 100.0;
                double lhs = 0.0;
                for (int64_t k = 0; k <= int64_t(ka) * n; ++k)
                    lhs += kw.w[k] * kernels::dirichlet_kernel(k, x) / double(2 * k + 1);
                double base = kernels::dirichlet_kernel(n, x) / double(2 * n + 1);
                double rhs = 1.0;
                for (int j = 0; j < ka; ++j) rhs *= base;
                if (std::abs(lhs - rhs) > 1e-9) ++bad;
            }
        }
    // monotonicity and mass
    for (int ka = 1; ka <= 8; ++ka)
        for (int64_t n : {16, 64, 256}) {
            auto kc = kernels::kernel_coefficients(ka, n);
            mpz_class mass = kc.B(0);
            for (int64_t l = 1; l <= int64_t(ka) * n; ++l) {
                if (kc.B(l - 1) < kc.B(l) || kc.B(l) < 0) ++bad;
                mass += 2 * kc.B(l);
            }
            if (mass != kc.total) ++bad;
            if (!kernels::kernel_weights(kc).exact_mass) ++bad;
        }
    // closed form vs numeric convolution
    for (int ka = 2; ka <= 10; ++ka) {
        double step = 1e-3;
        auto grid = kernels::f_kappa_grid_oracle(ka, step);
        int64_t half = (int64_t)std::llround(ka / step);
        for (int64_t i = -half; i <= half; ++i)
            if (std::abs(grid[i + half] - kernels::f_kappa_closed(ka, i * step)) > 1e-6)
                ++bad;
    }
    detail = std::to_string(bad) + " violations";
    return bad == 0;
}

// --- 3: gauss-sum laws -------------------------------------------------------
bool crit_gauss(std::string& detail) {
    int bad = 0, count = 0;
    std::mt19937_64 rng(20260810);
    for (int64_t delta : fundamentals(-2000, 2000)) {
        auto tab = chars::build_character_table(tables(), delta);
        int64_t D = tab.disc.abs;
        double rd = std::sqrt(double(D));
        auto g = chars::gauss_sum(tab);
        std::complex<double> expect =
            delta < 0 ? std::complex<double>(0, rd) : std::complex<double>(rd, 0);
        ++count;
        if (std::abs(g - expect) > 1e-6 * rd) ++bad;
        std::uniform_int_distribution<int64_t> pick(-3 * D, 3 * D);
        for (int i = 0; i < 50; ++i) {
            int64_t r = pick(rng);
            auto tg = chars::twisted_gauss_sum(tab, r);
            if (std::abs(tg - std::complex<double>(double(tab.chi(r))) * g) > 1e-6 * rd)
                ++bad;
        }
    }
    detail = std::to_string(count) + " discriminants, " + std::to_string(bad) +
             " violations";
    return bad == 0;
}

// --- 4: class-number closure -------------------------------------------------
bool crit_classno(std::string& detail) {
    int bad = 0, count = 0;
    for (int64_t delta : fundamentals(-2000, -3)) {
        auto tab = chars::build_character_table(tables(), delta);
        int64_t D = tab.disc.abs;
        int64_t h = quadforms::class_number_negative(tab.disc);
        ++count;
        if (delta < -4) {
            auto ff = quadforms::dirichlet_finite_formula_negative(tab);
            if (!(ff.den == 1 && ff.num == h)) ++bad;
            auto f4 = chars::fact4_class_number(tab);
            if (!(f4.den == 1 && f4.num == h)) ++bad;
        }
        int64_t w = delta < -4 ? 2 : (delta == -4 ? 4 : 6);
        auto lv = lfuncs::l_one(tab, 2e-7);
        double expect = 2.0 * M_PI * double(h) / (double(w) * std::sqrt(double(D)));
        if (std::abs(lv.value - expect) > 1e-6) ++bad;
    }
    for (int64_t delta : fundamentals(2, 2000)) {
        auto tab = chars::build_character_table(tables(), delta);
        ++count;
        if (chars::fact4_class_number(tab).num != 0) ++bad;
        if (delta <= 500) {
            auto unit = quadforms::fundamental_unit(delta);
            double F = quadforms::dirichlet_finite_formula_positive(tab, unit);
            auto lv = lfuncs::l_one(tab, 2e-7);
            double expect = F * unit.log_eta / std::sqrt(double(delta));
            if (std::abs(lv.value - expect) > 1e-6) ++bad;
        }
    }
    detail = std::to_string(count) + " discriminants, " + std::to_string(bad) +
             " violations";
    return bad == 0;
}

// --- 5: pair classes ----------------------------------------------------------
bool crit_pairs(std::string& detail) {
    int64_t checked = 0, bad = 0;
    for (int64_t m1 = 1; m1 <= 30; ++m1) {
        if (!tables().squarefree(m1)) continue;
        for (int64_t m2 = 1; m2 <= 30; ++m2) {
            if (!tables().squarefree(m2)) continue;
            int64_t d = std::gcd(m1, m2);
            for (int64_t d1 = 1; d1 <= d; ++d1) {
                if (d % d1) continue;
                int64_t n = m1 / d * (m2 / d) * d1;
                for (int64_t l = 1; l < n; ++l) {
                    if (std::gcd(l, n) != 1) continue;
                    ++checked;
                    if (!engine::pair_count(m1, m2, d1, l).equal) ++bad;
                }
            }
        }
    }
    detail = std::to_string(checked) + " classes, " + std::to_string(bad) +
             " mismatches";
    return bad == 0;
}

// --- 6: character-exponential approximation ------------------------------------
bool crit_lemma31(std::string& detail) {
    int64_t checked = 0, bad = 0;
    for (int64_t D : {3, 4, 7, 8, 11}) {
        auto tab = chars::build_character_table(tables(), -D);
        for (int64_t n = 1; n <= 200; ++n) {
            if (std::gcd(n, D) != 1) continue;
            for (int64_t l = 1; l <= n; ++l) {
                if (n > 1 && std::gcd(l, n) != 1) continue;
                if (n == 1) break; // no admissible l below n
                auto rep = engine::lemma31_check(tab, n, l);
                if (rep.verdict == VerificationReport::Verdict::report_only) continue;
                ++checked;
                if (rep.verdict != VerificationReport::Verdict::pass) ++bad;
            }
        }
    }
    detail = std::to_string(checked) + " (n, l) pairs, " + std::to_string(bad) +
             " violations";
    return bad == 0;
}

// --- 7: restricted phi-sum main term -------------------------------------------
bool crit_lemma21(std::string& detail) {
    auto consts = arith::prime_series_constants(tables(), tables().limit);
    int bad = 0;
    for (int64_t delta : {-7, -4}) {
        auto tab = chars::build_character_table(tables(), delta);
        auto ctx = engine::build_context(tables(), tab, engine::Z0Variant::z0_prime);
        for (int64_t Q : {1, 11, 143})
            for (int64_t L : {1000, 10000, 100000})
                if (engine::lemma21_check(ctx, consts, L, Q).report.verdict !=
                    VerificationReport::Verdict::pass)
                    ++bad;
    }
    auto tab = chars::build_character_table(tables(), -3);
    auto empty = engine::empty_context(tables(), tab);
    auto classic = engine::lemma21_check(empty, consts, 100000, 1);
    bool classic_ok = classic.residual < 0.01;
    detail = "residual(classic, L=1e5) = " + format_real(classic.residual);
    return bad == 0 && classic_ok;
}

// --- 8: divisor-sum average bound ----------------------------------------------
bool crit_lemma61(std::string& detail) {
    int bad = 0, count = 0;
    for (int64_t delta : fundamentals(2, 500)) {
        auto tab = chars::build_character_table(tables(), delta);
        auto lv = lfuncs::l_one(tab, 1e-8);
        for (int64_t N : {1000, 10000, 100000}) {
            ++count;
            if (quadforms::lemma61_check(tab, N, lv.value).verdict !=
                VerificationReport::Verdict::pass)
                ++bad;
        }
    }
    detail = std::to_string(count) + " checks, " + std::to_string(bad) + " violations";
    return bad == 0;
}

// --- 9: truncation gaps ----------------------------------------------------------
bool crit_gaps(std::string& detail) {
    int bad = 0, count = 0;
    for (int64_t delta : fundamentals(2, 100)) {
        auto tab = chars::build_character_table(tables(), delta);
        for (int64_t N : {100, 1000, 10000}) {
            ++count;
            if (lfuncs::lemma62_convergence(tab, N).verdict !=
                VerificationReport::Verdict::pass)
                ++bad;
            if (lfuncs::lemma64_convergence(tab, N).verdict !=
                VerificationReport::Verdict::pass)
                ++bad;
        }
    }
    detail = std::to_string(2 * count) + " gaps, " + std::to_string(bad) + " violations";
    return bad == 0;
}

// --- 10: mertens and inclusion-exclusion -----------------------------------------
bool crit_mertens(std::string& detail) {
    const auto& t = tables();
    int64_t bad = 0;
    int64_t run = t.mu[1];
    for (int64_t L = 2; L <= 1'000'000; ++L) {
        run += t.mu[L];
        double bound = double(L) * std::exp(-std::sqrt(std::log(double(L))) / 10.0);
        if (std::abs(double(run)) > bound) ++bad;
    }
    // restricted Moebius identity, every x up to 1e4
    std::vector<int32_t> M(10'001, 0);
    for (int64_t k = 1; k <= 10'000; ++k) M[k] = M[k - 1] + t.mu[k];
    auto smooth = [&](int64_t n, int64_t H) {
        while (n > 1) {
            int64_t p = t.spf[n];
            if (p > H) return false;
            while (n % p == 0) n /= p;
        }
        return true;
    };
    for (int64_t H : {2, 10, 30, 100}) {
        int64_t lhs = 0;
        for (int64_t x = 1; x <= 10'000; ++x) {
            if (x == 1 || t.spf[x] > H) lhs += t.mu[x];
            int64_t rhs = 0;
            for (int64_t m = 1; m <= x; ++m)
                if (smooth(m, H)) rhs += M[x / m];
            if (lhs != rhs) ++bad;
        }
    }
    detail = std::to_string(bad) + " violations";
    return bad == 0;
}

// --- 11: off-diagonal error bound --------------------------------------------------
bool crit_error_bound(std::string& detail) {
    int bad = 0;
    bool trend_ok = true;
    double worst_ratio = 0.0;
    for (int64_t delta : {-7, -8}) {
        auto tab = chars::build_character_table(tables(), delta);
        auto ctx = engine::build_context(tables(), tab, engine::Z0Variant::z0_prime);
        for (int64_t M : {20, 40}) {
            for (int ka : {3, 4, 8}) {
                double first = -1.0, last = -1.0;
                for (int64_t N : {200, 500, 1000}) {
                    engine::EngineParams p{M, ka, N, engine::Mode::negative};
                    auto rep = engine::error_bound_check(ctx, p);
                    if (rep.verdict != VerificationReport::Verdict::pass) ++bad;
                    double resid = std::abs(rep.lhs - rep.rhs);
                    if (N == 200) first = resid;
                    if (N == 1000) last = resid;
                }
                if (last > first) trend_ok = false;
                if (first > 0) worst_ratio = std::max(worst_ratio, last / first);
            }
        }
    }
    detail = std::to_string(bad) + " violations; worst residual ratio N=1000/N=200 = " +
             format_real(worst_ratio);
    return bad == 0 && trend_ok;
}

// --- 12: logarithmic character sum and form-sum product -----------------------------
bool crit_facts(std::string& detail) {
    int bad = 0;
    double gap163 = -1.0;
    for (int64_t delta : {-163, -23, -7, -4}) {
        auto tab = chars::build_character_table(tables(), delta);
        auto ctx = engine::build_context(tables(), tab, engine::Z0Variant::z0_prime);
        auto forms = quadforms::reduced_forms(tab.disc);
        if (quadforms::fact6_check(tab, forms, ctx).verdict !=
            VerificationReport::Verdict::pass)
            ++bad;
        int64_t D = tab.disc.abs;
        int64_t X = delta == -163 ? 100'000'000 : std::max<int64_t>(D * D, 1'000'000);
        auto f5 = lfuncs::fact5_check(tab, X, ctx, quadforms::inv_leading_sum(forms),
                                      int64_t(forms.size()));
        if (f5.report.verdict != VerificationReport::Verdict::pass) ++bad;
        if (delta == -163) gap163 = f5.stabilization_gap;
    }
    detail = std::to_string(bad) + " violations; stabilization gap at X=1e8 = " +
             format_real(gap163);
    return bad == 0 && gap163 >= 0 && gap163 < 0.05;
}

// --- 13: determinism -----------------------------------------------------------------
bool crit_determinism(std::string& detail) {
    driver::RunConfig cfg;
    cfg.suite = driver::Suite::all;
    cfg.disc_min = -40;
    cfg.disc_max = 40;
    cfg.M_grid = {1, 3, 5, 8};
    cfg.kappa_grid = {2, 3};
    cfg.N_grid = {4, 6};
    cfg.T_grid = {2};
    cfg.workers = 2;
    auto r1 = driver::run_verify(cfg);
    auto s1 = driver::serialize_reports(r1, driver::OutputFormat::json);
    cfg.workers = 1;
    auto r2 = driver::run_verify(cfg);
    auto s2 = driver::serialize_reports(r2, driver::OutputFormat::json);
    bool fails = driver::exit_status(r1) != 0;
    detail = std::to_string(r1.size()) + " records, byte-identical = " +
             (s1 == s2 ? "yes" : "NO") + ", suite status = " +
             (fails ? "fail" : "clean");
    return s1 == s2 && !fails;
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "quadratic-identity suite (direct = arithmetic = diagonal+offdiagonal)", 60, crit_identities},
        {2, "smoothing suite (expansion, reconstruction, monotonicity, density)", 30, crit_smoothing},
        {3, "gauss-sum laws, |delta| <= 2000, twisted for 50 random r", 300, crit_gauss},
        {4, "class-number closure (finite formula, prefix average, L(1,chi))", 600, crit_classno},
        {5, "pair-class counts, brute force vs formula, m <= 30", 60, crit_pairs},
        {6, "character-exponential approximation, n <= 200, D in {3,4,7,8,11}", 120, crit_lemma31},
        {7, "restricted phi-sum main term, classic residual < 0.01", 120, crit_lemma21},
        {8, "divisor-sum average bound, 0 < delta <= 500", 300, crit_lemma61},
        {9, "truncation-gap bounds for the log sums, 0 < delta <= 100", 300, crit_gaps},
        {10, "mertens bound to 1e6 and exact inclusion-exclusion to 1e4", 120, crit_mertens},
        {11, "off-diagonal error bound with N-decreasing residual", 300, crit_error_bound},
        {12, "logarithmic sum and form-sum product on {-163,-23,-7,-4}", 600, crit_facts},
        {13, "byte-identical reruns of the full verify suite", 600, crit_determinism},
    };

    int failures = 0;
    for (auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < c.limit_seconds;
        bool pass = ok && in_time;
        if (!pass) ++failures;
        std::printf("[%s] criterion %2d: %s (%.1f s%s) — %s\n",
                    pass ? "PASS" : "FAIL", c.id, c.label, secs,
                    in_time ? "" : ", OVER TIME LIMIT", detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
