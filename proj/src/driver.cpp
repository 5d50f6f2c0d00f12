#include "siegel/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "siegel/arith.hpp"
#include "siegel/characters.hpp"
#include "siegel/context.hpp"
#include "siegel/engine.hpp"
#include "siegel/kernels.hpp"
#include "siegel/lfuncs.hpp"
#include "siegel/quadforms.hpp"
#include "siegel/summation.hpp"

namespace siegel::driver {

namespace {

using Report = VerificationReport;
using Verdict = VerificationReport::Verdict;

std::string fmt(int64_t v) { return std::to_string(v); }

Report margin_report(const std::string& base,
                     std::vector<std::pair<std::string, std::string>> params,
                     double lhs, double rhs, double bound, double margin) {
    return make_report(base, std::move(params), lhs, rhs, bound, margin,
                       verdict_from_margin(margin));
}

struct Lab {
    arith::ArithTables tables;
    arith::PrimeSeriesConstants consts;
    RunConfig cfg;

    std::vector<int64_t> discs; // fundamental discriminants in range
};

int64_t default_sieve_limit(const RunConfig& cfg) {
    if (cfg.sieve_limit > 0) return cfg.sieve_limit;
    if (const char* env = std::getenv("SIEGEL_LAB_SIEVE_LIMIT")) {
        int64_t v = std::atoll(env);
        if (v >= 2) return v;
    }
    return 2'000'000;
}

Lab make_lab(const RunConfig& cfg) {
    cfg.validate();
    Lab lab;
    lab.cfg = cfg;
    int64_t limit = default_sieve_limit(cfg);
    int64_t need = std::max(std::llabs(cfg.disc_min), std::llabs(cfg.disc_max)) + 2;
    if (limit < need)
        throw std::invalid_argument("sieve limit below the requested discriminant range");
    lab.tables = arith::build_tables(limit);
    lab.consts = arith::prime_series_constants(lab.tables, limit);
    for (int64_t d = cfg.disc_min; d <= cfg.disc_max; ++d) {
        if (d == 0 || d == 1) continue;
        if (cfg.sign == SignFilter::neg && d > 0) continue;
        if (cfg.sign == SignFilter::pos && d < 0) continue;
        if (chars::is_fundamental(lab.tables, d)) lab.discs.push_back(d);
    }
    return lab;
}

bool in_range(const Lab& lab, int64_t delta) {
    return std::find(lab.discs.begin(), lab.discs.end(), delta) != lab.discs.end();
}

// ---------------------------------------------------------------------------
// identities suite

void suite_identities(const Lab& lab, std::vector<std::function<std::vector<Report>()>>& tasks) {
    static const int64_t grid[] = {-3, -4, -7, -8, -11, -15, -20, 5, 8, 13};
    for (int64_t delta : grid) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            int64_t D = ctx.D();
            auto mode = engine::mode_for(tab.disc);
            const std::pair<double, double> windows[] = {
                {1.0, 10.0 * double(D)},
                {0.5 * double(D), 25.0 * double(D)},
                {1.0, 40.0 * double(D)}};
            for (int64_t M : lab.cfg.M_grid) {
                int wi = 0;
                for (auto [A1, A2] : windows) {
                    ++wi;
                    for (int64_t a : {int64_t(1), int64_t(2), int64_t(3)}) {
                        double direct = engine::v_norm_direct(ctx, M, a, A1, A2);
                        double arith_v = engine::v_norm_arith(ctx, M, a, A1, A2);
                        auto [diag, off] = engine::diag_offdiag(ctx, M, a, A1, A2);
                        double scale = std::max({direct, arith_v, 1e-3});
                        double m1 = 1e-6 * scale - std::abs(direct - arith_v);
                        out.push_back(margin_report(
                            "identity.norm",
                            {{"D", fmt(D)}, {"M", fmt(M)}, {"win", fmt(wi)}, {"a", fmt(a)}},
                            direct, arith_v, 1e-6 * scale, m1));
                        double split = diag + off;
                        double m2 = 1e-6 * std::max({direct, std::abs(split), 1e-3}) -
                                    std::abs(direct - split);
                        out.push_back(margin_report(
                            "identity.split",
                            {{"D", fmt(D)}, {"M", fmt(M)}, {"win", fmt(wi)}, {"a", fmt(a)}},
                            direct, split, 1e-6 * std::max({direct, std::abs(split), 1e-3}),
                            m2));
                    }
                }
            }
            // weighted off-diagonal closed form and the regrouping identity
            for (int ka : lab.cfg.kappa_grid) {
                for (int64_t N : lab.cfg.N_grid) {
                    engine::EngineParams p{std::min<int64_t>(*std::max_element(lab.cfg.M_grid.begin(), lab.cfg.M_grid.end()), 12),
                                           ka, N, mode};
                    for (int64_t d : {int64_t(1), int64_t(2), int64_t(3)})
                        out.push_back(engine::wod_closed_form_check(ctx, p, 1, d));
                    out.push_back(engine::omega_regroup_check(ctx, p));
                }
            }
            return out;
        });
    }

    // pair classes: brute force against the phi_2 phi formula
    tasks.push_back([&lab]() {
        std::vector<Report> out;
        for (int64_t m1 = 1; m1 <= 12; ++m1) {
            if (!lab.tables.squarefree(m1)) continue;
            for (int64_t m2 = 1; m2 <= 12; ++m2) {
                if (!lab.tables.squarefree(m2)) continue;
                int64_t d = std::gcd(m1, m2);
                int64_t checked = 0, bad = 0;
                for (int64_t d1 = 1; d1 <= d; ++d1) {
                    if (d % d1 != 0) continue;
                    int64_t n = m1 / d * (m2 / d) * d1;
                    for (int64_t l = 1; l < n; ++l) {
                        if (std::gcd(l, n) != 1) continue;
                        auto pc = engine::pair_count(m1, m2, d1, l);
                        ++checked;
                        if (!pc.equal) ++bad;
                    }
                }
                if (checked == 0) continue;
                out.push_back(make_report(
                    "identity.pairclass", {{"m1", fmt(m1)}, {"m2", fmt(m2)}},
                    double(checked), double(checked - bad), 0.0, bad ? -1.0 : 0.0,
                    bad ? Verdict::fail : Verdict::pass));
            }
        }
        return out;
    });
}

// ---------------------------------------------------------------------------
// bounds suite

void suite_bounds(const Lab& lab, std::vector<std::function<std::vector<Report>()>>& tasks) {
    // character-exponential Gauss approximation, aggregated per (D, n)
    for (int64_t delta : {int64_t(-3), int64_t(-4), int64_t(-7), int64_t(-8), int64_t(-11)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            int64_t D = tab.disc.abs;
            for (int64_t n = 2; n <= 100; ++n) {
                if (std::gcd(n, D) != 1) continue;
                double worst = 1e300;
                int64_t worst_l = 0;
                for (int64_t l = 1; l < n; ++l) {
                    if (std::gcd(l, n) != 1) continue;
                    auto rep = engine::lemma31_check(tab, n, l);
                    if (rep.verdict == Verdict::report_only) continue;
                    if (rep.margin < worst) { worst = rep.margin; worst_l = l; }
                }
                if (worst_l == 0) continue;
                out.push_back(margin_report("lemma3.1",
                                            {{"D", fmt(D)}, {"n", fmt(n)}, {"l", fmt(worst_l)}},
                                            0.0, 0.0, 0.0, worst));
            }
            return out;
        });
    }

    // restricted phi-sum main term
    for (int64_t delta : {int64_t(-7), int64_t(-4)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            for (int64_t Q : {int64_t(1), int64_t(11), int64_t(143)})
                for (int64_t L : {int64_t(1000), int64_t(10000), int64_t(100000)})
                    out.push_back(engine::lemma21_check(ctx, lab.consts, L, Q).report);
            return out;
        });
    }
    tasks.push_back([&lab]() {
        // classical, unsieved instance
        std::vector<Report> out;
        int64_t delta = lab.discs.empty() ? -3 : lab.discs.front();
        auto tab = chars::build_character_table(lab.tables, delta);
        auto ctx = engine::empty_context(lab.tables, tab);
        for (int64_t L : {int64_t(1000), int64_t(10000), int64_t(100000)})
            out.push_back(engine::lemma21_check(ctx, lab.consts, L, 1).report);
        return out;
    });

    // closed error bound of the off-diagonal main term
    for (int64_t delta : {int64_t(-3), int64_t(-4), int64_t(-7), int64_t(-8)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            auto mode = engine::mode_for(tab.disc);
            std::vector<int> kappas;
            for (int k : lab.cfg.kappa_grid)
                if (k >= 3) kappas.push_back(k);
            if (kappas.empty()) kappas.push_back(3);
            int64_t M = std::min<int64_t>(*std::max_element(lab.cfg.M_grid.begin(), lab.cfg.M_grid.end()), 40);
            for (int ka : kappas)
                for (int64_t N : lab.cfg.N_grid)
                    out.push_back(engine::error_bound_check(ctx, {M, ka, N, mode}));
            return out;
        });
    }

    // Moebius reflections of the two-level sum
    for (auto [delta, n] : {std::pair<int64_t, int64_t>{-7, 15},
                            std::pair<int64_t, int64_t>{-4, 21}}) {
        if (!in_range(lab, delta)) continue;
        int64_t nn = n;
        tasks.push_back([&lab, delta, nn]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            out.push_back(engine::lemma42_check(ctx, 50, nn, 10, 1'000'000'000));
            out.push_back(engine::lemma42_check(ctx, 60, nn, 12, 1'000'000'000));
            return out;
        });
    }

    // Mertens sweep and the inclusion-exclusion identity
    tasks.push_back([&lab]() {
        std::vector<Report> out;
        int64_t Lmax = std::min<int64_t>(lab.tables.limit, 1'000'000);
        int64_t run = 0;
        double worst = 1e300;
        int64_t worst_L = 2;
        run += lab.tables.mu[1];
        for (int64_t L = 2; L <= Lmax; ++L) {
            run += lab.tables.mu[static_cast<size_t>(L)];
            double bound = double(L) * std::exp(-std::sqrt(std::log(double(L))) / 10.0);
            double margin = bound - std::abs(double(run));
            if (margin < worst) { worst = margin; worst_L = L; }
        }
        out.push_back(margin_report("mertens", {{"Lmax", fmt(Lmax)}, {"argmin", fmt(worst_L)}},
                                    0.0, 0.0, 0.0, worst));
        for (int64_t H : {int64_t(2), int64_t(10), int64_t(30), int64_t(100)}) {
            auto r = arith::restricted_liouville_identity(lab.tables, 10'000, H);
            bool ok = r.identity_holds && r.gap_within_bound;
            out.push_back(make_report("liouville", {{"x", "10000"}, {"H", fmt(H)}},
                                      double(r.mobius_restricted), double(r.convolution_side),
                                      r.gap_bound, r.gap_bound - r.gap,
                                      ok ? Verdict::pass : Verdict::fail));
        }
        return out;
    });

    // smoothing-window averages and the p0 observation, report-only
    for (int64_t delta : {int64_t(-7), int64_t(-4)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            auto mode = engine::mode_for(tab.disc);
            for (int64_t T : lab.cfg.T_grid) {
                engine::EngineParams p{5, lab.cfg.kappa_grid.front(), T, mode};
                auto avg = engine::omega_avg(ctx, p, T);
                out.push_back(make_report("omega.avg",
                                          {{"D", fmt(ctx.D())}, {"M", fmt(p.M)},
                                           {"kappa", fmt(p.kappa)}, {"T", fmt(T)}},
                                          avg.value, avg.main_term, 0.0,
                                          avg.value - avg.main_term, Verdict::report_only));
            }
            return out;
        });
    }
    tasks.push_back([&lab]() {
        std::vector<Report> out;
        for (int64_t delta : lab.discs) {
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            out.push_back(make_report("p0.bound", {{"D", fmt(ctx.D())}},
                                      double(ctx.p0), ctx.p0_bound, ctx.p0_bound,
                                      ctx.p0_bound - double(ctx.p0), Verdict::report_only));
        }
        return out;
    });
}

// ---------------------------------------------------------------------------
// characters suite

void suite_characters(const Lab& lab, std::vector<std::function<std::vector<Report>()>>& tasks) {
    for (int64_t delta : lab.discs) {
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            int64_t D = tab.disc.abs;

            // total multiplicativity and agreement with the componentwise rules
            int64_t bad = 0;
            int64_t pairs = std::min<int64_t>(D, 120);
            for (int64_t m = 1; m <= pairs; ++m)
                for (int64_t n = m; n <= pairs; n += 3)
                    if (tab.chi(m * n) != tab.chi(m) * tab.chi(n)) ++bad;
            for (int64_t n = 1; n <= std::min<int64_t>(3 * D, 500); ++n)
                if (tab.chi(n) != chars::kronecker_componentwise(delta, n)) ++bad;
            out.push_back(make_report("kron.mult", {{"D", fmt(D)}}, double(bad), 0.0,
                                      0.0, bad ? -1.0 : 0.0,
                                      bad ? Verdict::fail : Verdict::pass));

            double pv = chars::pv_margin(tab);
            out.push_back(margin_report("pv", {{"D", fmt(D)}},
                                        double(tab.max_abs_prefix),
                                        std::sqrt(double(D)) * std::log(double(D)), 0.0, pv));

            auto g = chars::gauss_sum(tab);
            double tol = 1e-6 * std::sqrt(double(D));
            double gdev = tab.disc.sign < 0
                              ? std::abs(g - std::complex<double>(0.0, std::sqrt(double(D))))
                              : std::abs(g - std::complex<double>(std::sqrt(double(D)), 0.0));
            out.push_back(margin_report("gauss", {{"D", fmt(D)}}, g.real(), g.imag(),
                                        tol, tol - gdev));

            double worst_tw = 1e300;
            for (int64_t i = 1; i <= 5; ++i) {
                int64_t r = (i * 37) % (2 * D) + 1;
                auto tg = chars::twisted_gauss_sum(tab, r);
                double dev = std::abs(tg - std::complex<double>(double(tab.chi(r))) * g);
                worst_tw = std::min(worst_tw, tol - dev);
            }
            out.push_back(margin_report("gauss.twisted", {{"D", fmt(D)}}, 0.0, 0.0,
                                        tol, worst_tw));

            auto f4 = chars::fact4_class_number(tab);
            if (tab.disc.delta < -4) {
                int64_t h = quadforms::class_number_negative(tab.disc);
                bool ok = f4.is_integer() && f4.num == h;
                out.push_back(make_report("fact4", {{"D", fmt(D)}}, f4.value(), double(h),
                                          0.0, ok ? 0.0 : -1.0,
                                          ok ? Verdict::pass : Verdict::fail));
            } else if (tab.disc.delta > 0) {
                bool ok = (f4.num == 0);
                out.push_back(make_report("zerosum", {{"D", fmt(D)}}, f4.value(), 0.0, 0.0,
                                          ok ? 0.0 : -1.0,
                                          ok ? Verdict::pass : Verdict::fail));
            }
            return out;
        });
    }
}

// ---------------------------------------------------------------------------
// quadforms suite

void suite_quadforms(const Lab& lab, std::vector<std::function<std::vector<Report>()>>& tasks) {
    for (int64_t delta : lab.discs) {
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            int64_t D = tab.disc.abs;
            if (delta < 0) {
                auto forms = quadforms::reduced_forms(tab.disc);
                int64_t bad = 0;
                for (const auto& f : forms) {
                    if (f.b * f.b - 4 * f.a * f.c != delta) ++bad;
                    if (!(f.a > 0 && f.c > 0 && -f.a < f.b && f.b <= f.a && f.a <= f.c)) ++bad;
                    if (f.a == f.c && f.b < 0) ++bad;
                    if (3 * f.a * f.a > D) ++bad;
                    if (4 * f.a * f.c < D) ++bad;
                }
                out.push_back(make_report("form.invariants", {{"D", fmt(D)}},
                                          double(forms.size()), double(bad), 0.0,
                                          bad ? -1.0 : 0.0,
                                          bad ? Verdict::fail : Verdict::pass));
                auto ff = quadforms::dirichlet_finite_formula_negative(tab);
                int64_t h = static_cast<int64_t>(forms.size());
                bool closure = delta < -4 ? (ff.is_integer() && ff.num == h)
                                          : (ff.is_integer() && ff.num == 1);
                out.push_back(make_report("classno.closure", {{"D", fmt(D)}}, ff.value(),
                                          double(h), 0.0, closure ? 0.0 : -1.0,
                                          closure ? Verdict::pass : Verdict::fail));
                auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
                out.push_back(quadforms::fact6_check(tab, forms, ctx));
                int64_t N = std::min<int64_t>(4 * D + 40, 1'000'000);
                auto sr = quadforms::squarefree_represented(lab.tables, tab, N);
                out.push_back(make_report("lemma1.1", {{"D", fmt(D)}, {"N", fmt(N)}},
                                          double(sr.count), double(sr.prime_lower), sr.upper,
                                          sr.within_bounds ? 0.0 : -1.0,
                                          sr.within_bounds ? Verdict::pass : Verdict::fail));
            } else {
                auto unit = quadforms::fundamental_unit(delta);
                mpz_class pell = unit.x * unit.x - delta * unit.y * unit.y;
                bool ok = (pell == 4 * unit.norm_sign) && unit.log_eta > 0;
                out.push_back(make_report("unit", {{"D", fmt(D)}}, unit.log_eta,
                                          double(unit.norm_sign), 0.0, ok ? 0.0 : -1.0,
                                          ok ? Verdict::pass : Verdict::fail));
                double F = quadforms::dirichlet_finite_formula_positive(tab, unit);
                int64_t h = quadforms::class_number_positive(tab, unit);
                out.push_back(make_report("classno.finite", {{"D", fmt(D)}}, F, double(h),
                                          0.0, std::abs(F / 2.0 - double(h)),
                                          Verdict::report_only));
                out.push_back(make_report("narrow", {{"D", fmt(D)}},
                                          quadforms::narrow_forms_sum(delta), 0.0, 0.0, 0.0,
                                          Verdict::report_only));
                auto lv = lfuncs::l_one(tab, 1e-8);
                for (int64_t N : {int64_t(1000), int64_t(10000)})
                    out.push_back(quadforms::lemma61_check(tab, N, lv.value));
            }
            return out;
        });
    }
}

// ---------------------------------------------------------------------------
// lfuncs suite

void suite_lfuncs(const Lab& lab, std::vector<std::function<std::vector<Report>()>>& tasks) {
    for (int64_t delta : lab.discs) {
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            int64_t D = tab.disc.abs;
            auto lv = lfuncs::l_one(tab, 1e-8);
            if (delta < 0) {
                int64_t h = quadforms::class_number_negative(tab.disc);
                int64_t w = delta < -4 ? 2 : (delta == -4 ? 4 : 6);
                double expect = 2.0 * M_PI * double(h) / (double(w) * std::sqrt(double(D)));
                double margin = 1e-6 - std::abs(lv.value - expect);
                out.push_back(margin_report("closure.neg", {{"D", fmt(D)}}, lv.value,
                                            expect, 1e-6, margin));
            } else {
                auto unit = quadforms::fundamental_unit(delta);
                double F = quadforms::dirichlet_finite_formula_positive(tab, unit);
                double expect = F * unit.log_eta / std::sqrt(double(D));
                double margin = 1e-6 - std::abs(lv.value - expect);
                out.push_back(margin_report("closure.pos", {{"D", fmt(D)}}, lv.value,
                                            expect, 1e-6, margin));
                if (D <= 100)
                    for (int64_t N : {int64_t(100), int64_t(1000)}) {
                        out.push_back(lfuncs::lemma62_convergence(tab, N));
                        out.push_back(lfuncs::lemma64_convergence(tab, N));
                    }
            }
            return out;
        });
    }

    for (int64_t delta : {int64_t(-163), int64_t(-23), int64_t(-7), int64_t(-4)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            auto forms = quadforms::reduced_forms(tab.disc);
            int64_t D = tab.disc.abs;
            int64_t X = std::max<int64_t>(D * D, 1'000'000);
            X = std::min<int64_t>(X, 10'000'000);
            auto f5 = lfuncs::fact5_check(tab, X, ctx, quadforms::inv_leading_sum(forms),
                                          static_cast<int64_t>(forms.size()));
            out.push_back(f5.report);
            out.push_back(make_report("fact5.gap", {{"D", fmt(D)}, {"X", fmt(X)}},
                                      f5.stabilization_gap, 0.0, 0.0, f5.stabilization_gap,
                                      Verdict::report_only));
            return out;
        });
    }
    for (int64_t delta : {int64_t(5), int64_t(8)}) {
        if (!in_range(lab, delta)) continue;
        tasks.push_back([&lab, delta]() {
            std::vector<Report> out;
            auto tab = chars::build_character_table(lab.tables, delta);
            auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
            auto unit = quadforms::fundamental_unit(delta);
            int64_t h = quadforms::class_number_positive(tab, unit);
            auto lv = lfuncs::l_one(tab, 1e-8);
            out.push_back(lfuncs::lemma65_residual(tab, 10'000'000, ctx, lv.value, h));
            return out;
        });
    }
}

// ---------------------------------------------------------------------------
// kernels suite

void suite_kernels(const Lab&, std::vector<std::function<std::vector<Report>()>>& tasks) {
    tasks.push_back([]() {
        std::vector<Report> out;
        // Fejer expansion: squared Dirichlet kernel vs the triangular weights
        double worst = 1e300;
        for (int64_t n = 1; n <= 8; ++n) {
            auto kc = kernels::kernel_coefficients(2, n);
            for (int i = 0; i < 100; ++i) {
                double x = 0.03 + 6.2 * double(i) / 100.0;
                double lhs = 0.0;
                for (int64_t l = -2 * n; l <= 2 * n; ++l)
                    lhs += kc.B(l).get_d() * std::cos(double(l) * x);
                double s = kernels::dirichlet_kernel(n, x);
                worst = std::min(worst, 1e-9 * (2.0 * n + 1.0) * (2.0 * n + 1.0) -
                                            std::abs(lhs - s * s));
            }
        }
        out.push_back(margin_report("fejer.identity", {{"nmax", "8"}}, 0.0, 0.0, 0.0, worst));

        // reconstruction: weighted kernel average equals the Fejer power
        worst = 1e300;
        for (int ka = 1; ka <= 5; ++ka) {
            for (int64_t n = 1; n <= 8; ++n) {
                auto kc = kernels::kernel_coefficients(ka, n);
                auto kw = kernels::kernel_weights(kc);
                for (int i = 0; i < 100; ++i) {
                    double x = 0.05 + 6.1 * double(i) / 100.0;
                    double lhs = 0.0;
                    for (int64_t k = 0; k <= int64_t(ka) * n; ++k)
                        lhs += kw.w[static_cast<size_t>(k)] *
                               kernels::dirichlet_kernel(k, x) / double(2 * k + 1);
                    double base = kernels::dirichlet_kernel(n, x) / double(2 * n + 1);
                    double rhs = 1.0;
                    for (int j = 0; j < ka; ++j) rhs *= base;
                    worst = std::min(worst, 1e-9 - std::abs(lhs - rhs));
                }
            }
        }
        out.push_back(margin_report("reconstruction", {{"kappamax", "5"}, {"nmax", "8"}},
                                    0.0, 0.0, 1e-9, worst));
        return out;
    });

    tasks.push_back([]() {
        std::vector<Report> out;
        for (int ka = 2; ka <= 8; ka += 2) {
            for (int64_t n : {int64_t(16), int64_t(64), int64_t(256)}) {
                auto kc = kernels::kernel_coefficients(ka, n);
                bool mono = true;
                for (int64_t l = 0; l < int64_t(ka) * n; ++l)
                    if (kc.B(l) < kc.B(l + 1)) mono = false;
                mpz_class mass = kc.B(0);
                for (int64_t l = 1; l <= int64_t(ka) * n; ++l) mass += 2 * kc.B(l);
                bool mass_ok = (mass == kc.total);
                auto kw = kernels::kernel_weights(kc);
                bool ok = mono && mass_ok && kw.exact_mass;
                out.push_back(make_report("kernel.mass",
                                          {{"kappa", fmt(ka)}, {"n", fmt(n)}},
                                          double(ka), double(n), 0.0, ok ? 0.0 : -1.0,
                                          ok ? Verdict::pass : Verdict::fail));
            }
        }
        for (int ka : {2, 3}) out.push_back(kernels::coefficient_density_check(ka, 32));
        for (int ka : {2, 4}) {
            double r1 = kernels::clt_residual(ka);
            double r2 = kernels::clt_residual(2 * ka);
            out.push_back(margin_report("clt.trend", {{"kappa", fmt(ka)}}, r1, r2, r1,
                                        r1 - r2));
        }
        return out;
    });

    tasks.push_back([]() {
        std::vector<Report> out;
        for (int ka = 2; ka <= 6; ++ka) {
            double step = 1e-3;
            auto grid = kernels::f_kappa_grid_oracle(ka, step);
            int64_t half = static_cast<int64_t>(std::llround(double(ka) / step));
            double worst = 0.0;
            for (int64_t i = -half; i <= half; ++i) {
                double y = double(i) * step;
                double d = std::abs(grid[static_cast<size_t>(i + half)] -
                                    kernels::f_kappa_closed(ka, y));
                worst = std::max(worst, d);
            }
            // trapezoid mass of the closed form
            double mass = 0.0;
            for (int64_t i = -half; i < half; ++i)
                mass += 0.5 * step * (kernels::f_kappa_closed(ka, double(i) * step) +
                                      kernels::f_kappa_closed(ka, double(i + 1) * step));
            double margin = std::min(1e-6 - worst, 1e-6 - std::abs(mass - 1.0));
            out.push_back(margin_report("fkappa.conv", {{"kappa", fmt(ka)}}, worst, mass,
                                        1e-6, margin));
        }
        return out;
    });
}

// ---------------------------------------------------------------------------

void collect(const Lab& lab, Suite s,
             std::vector<std::function<std::vector<Report>()>>& tasks) {
    if (s == Suite::identities || s == Suite::all) suite_identities(lab, tasks);
    if (s == Suite::bounds || s == Suite::all) suite_bounds(lab, tasks);
    if (s == Suite::characters || s == Suite::all) suite_characters(lab, tasks);
    if (s == Suite::quadforms || s == Suite::all) suite_quadforms(lab, tasks);
    if (s == Suite::kernels || s == Suite::all) suite_kernels(lab, tasks);
    if (s == Suite::lfuncs || s == Suite::all) suite_lfuncs(lab, tasks);
}

} // namespace

void RunConfig::validate() const {
    if (disc_min > disc_max)
        throw std::invalid_argument("config: disc_min must be <= disc_max");
    if (M_grid.empty() || kappa_grid.empty() || N_grid.empty() || T_grid.empty())
        throw std::invalid_argument("config: engine grids must be nonempty");
    for (int64_t m : M_grid)
        if (m < 1) throw std::invalid_argument("config: M must be positive");
    for (int k : kappa_grid)
        if (k < 1 || k > 10) throw std::invalid_argument("config: kappa in 1..10");
    for (int64_t n : N_grid)
        if (n < 1) throw std::invalid_argument("config: N must be positive");
    if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
}

Suite parse_suite(const std::string& s) {
    if (s == "identities") return Suite::identities;
    if (s == "bounds") return Suite::bounds;
    if (s == "characters") return Suite::characters;
    if (s == "quadforms") return Suite::quadforms;
    if (s == "kernels") return Suite::kernels;
    if (s == "lfuncs") return Suite::lfuncs;
    if (s == "all") return Suite::all;
    throw std::invalid_argument("unknown suite: " + s);
}

SignFilter parse_sign(const std::string& s) {
    if (s == "neg") return SignFilter::neg;
    if (s == "pos") return SignFilter::pos;
    if (s == "both") return SignFilter::both;
    throw std::invalid_argument("unknown sign filter: " + s);
}

OutputFormat parse_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    throw std::invalid_argument("unknown format: " + s);
}

std::vector<int64_t> fundamental_range(const RunConfig& cfg) {
    return make_lab(cfg).discs;
}

std::vector<VerificationReport> run_verify(const RunConfig& cfg) {
    Lab lab = make_lab(cfg);
    std::vector<std::function<std::vector<Report>()>> tasks;
    collect(lab, cfg.suite, tasks);

    std::vector<std::vector<Report>> results(tasks.size());
    unsigned workers = cfg.workers > 0 ? unsigned(cfg.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, tasks.size() ? tasks.size() : 1);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            try {
                results[i] = tasks[i]();
            } catch (const std::exception& e) {
                // a throwing check becomes a failing record, not a crash
                std::string what = e.what();
                for (char& c : what)
                    if (c == ',' || c == '"' || c == '\n') c = ';';
                results[i] = {make_report(
                    "task.error", {{"index", std::to_string(i)}, {"what", what}},
                    0, 0, 0, -1, Verdict::fail)};
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<Report> all;
    for (auto& r : results)
        for (auto& rep : r) all.push_back(std::move(rep));
    std::sort(all.begin(), all.end(),
              [](const Report& a, const Report& b) { return a.check_id < b.check_id; });
    return all;
}

std::string serialize_reports(const std::vector<VerificationReport>& reports,
                              OutputFormat format) {
    std::string out;
    if (format == OutputFormat::csv)
        out += "check_id,lhs,rhs,bound,margin,verdict\n";
    for (const auto& r : reports) {
        if (format == OutputFormat::json) {
            out += "{\"check_id\":\"" + r.check_id + "\",\"lhs\":" + format_real(r.lhs) +
                   ",\"rhs\":" + format_real(r.rhs) + ",\"bound\":" + format_real(r.bound) +
                   ",\"margin\":" + format_real(r.margin) + ",\"verdict\":\"" +
                   verdict_name(r.verdict) + "\"}\n";
        } else {
            out += r.check_id + "," + format_real(r.lhs) + "," + format_real(r.rhs) + "," +
                   format_real(r.bound) + "," + format_real(r.margin) + "," +
                   verdict_name(r.verdict) + "\n";
        }
    }
    return out;
}

ScanResult run_scan(const RunConfig& cfg) {
    Lab lab = make_lab(cfg);
    ScanResult res;
    res.min_normalized_l = 1e300;
    for (int64_t delta : lab.discs) {
        auto tab = chars::build_character_table(lab.tables, delta);
        int64_t D = tab.disc.abs;
        ScanRow row;
        row.delta = delta;
        auto lv = lfuncs::l_one(tab, 1e-8);
        row.l_one = lv.value;
        if (delta < 0) {
            auto forms = quadforms::reduced_forms(tab.disc);
            row.h = static_cast<int64_t>(forms.size());
            row.inv_a_or_log_eta = quadforms::inv_leading_sum(forms);
        } else {
            auto unit = quadforms::fundamental_unit(delta);
            row.h = quadforms::class_number_positive(tab, unit);
            row.inv_a_or_log_eta = unit.log_eta;
        }
        row.pv_ratio = double(tab.max_abs_prefix) /
                       (std::sqrt(double(D)) * std::log(double(D)));
        auto ctx = engine::build_context(lab.tables, tab, engine::Z0Variant::z0_prime);
        row.p0 = ctx.p0;
        row.z0_count = static_cast<int64_t>(ctx.z0_primes.size());
        double normalized = row.l_one * std::sqrt(double(D)) / std::log(double(D));
        if (normalized < res.min_normalized_l) {
            res.min_normalized_l = normalized;
            res.min_delta = delta;
        }
        res.rows.push_back(row);
    }
    return res;
}

std::string serialize_scan(const ScanResult& scan, OutputFormat format) {
    std::string out;
    if (format == OutputFormat::csv) {
        out += "delta,h,l1,inv_a_or_log_eta,pv_ratio,p0,z0_primes\n";
        for (const auto& r : scan.rows) {
            out += std::to_string(r.delta) + "," + std::to_string(r.h) + "," +
                   format_real(r.l_one) + "," + format_real(r.inv_a_or_log_eta) + "," +
                   format_real(r.pv_ratio) + "," + std::to_string(r.p0) + "," +
                   std::to_string(r.z0_count) + "\n";
        }
        if (!scan.rows.empty())
            out += "minimal," + std::to_string(scan.min_delta) + "," +
                   format_real(scan.min_normalized_l) + "\n";
    } else {
        for (const auto& r : scan.rows) {
            out += "{\"delta\":" + std::to_string(r.delta) + ",\"h\":" + std::to_string(r.h) +
                   ",\"l1\":" + format_real(r.l_one) + ",\"inv_a_or_log_eta\":" +
                   format_real(r.inv_a_or_log_eta) + ",\"pv_ratio\":" +
                   format_real(r.pv_ratio) + ",\"p0\":" + std::to_string(r.p0) +
                   ",\"z0_primes\":" + std::to_string(r.z0_count) + "}\n";
        }
        if (!scan.rows.empty())
            out += "{\"minimal_delta\":" + std::to_string(scan.min_delta) +
                   ",\"min_normalized_l1\":" + format_real(scan.min_normalized_l) + "}\n";
    }
    return out;
}

std::string run_kernel_table(int kappa, int64_t n) {
    if (kappa < 1 || kappa > 10 || n < 1 || n > 2000)
        throw std::invalid_argument("kernel table: kappa in 1..10, n in 1..2000");
    auto kc = kernels::kernel_coefficients(kappa, n);
    auto kw = kernels::kernel_weights(kc);
    std::string out = "l,B,normalized,f\n";
    for (int64_t l = -int64_t(kappa) * n; l <= int64_t(kappa) * n; ++l) {
        double f = kappa >= 2 ? kernels::f_kappa_closed(kappa, double(l) / double(n)) : 0.0;
        out += std::to_string(l) + "," + kc.B(l).get_str() + "," +
               format_real(kc.norm(l)) + "," + format_real(f) + "\n";
    }
    out += "k,w\n";
    double mass = 0.0;
    for (int64_t k = 0; k <= int64_t(kappa) * n; ++k) {
        mass += kw.w[static_cast<size_t>(k)];
        out += std::to_string(k) + "," + format_real(kw.w[static_cast<size_t>(k)]) + "\n";
    }
    out += "# sum_w," + format_real(mass) + "," +
           std::string(kw.exact_mass ? "exact" : "inexact") + "\n";
    return out;
}

int exit_status(const std::vector<VerificationReport>& reports) {
    for (const auto& r : reports)
        if (r.failed()) return 1;
    return 0;
}

} // namespace siegel::driver
