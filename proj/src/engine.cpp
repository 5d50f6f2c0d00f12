#include "siegel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "siegel/summation.hpp"

namespace siegel::engine {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

int64_t mod_pos(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

int64_t inv_mod(int64_t a, int64_t m) {
    int64_t t = 0, nt = 1, r = m, nr = mod_pos(a, m);
    while (nr != 0) {
        int64_t q = r / nr;
        std::swap(t -= q * nt, nt);
        std::swap(r -= q * nr, nr);
    }
    if (r != 1) throw std::invalid_argument("inv_mod: not invertible");
    return mod_pos(t, m);
}

std::complex<double> unit_phase(int64_t num, int64_t den) {
    double a = kTwoPi * double(mod_pos(num, den)) / double(den);
    return {std::cos(a), std::sin(a)};
}

// sum_{j=j1}^{j2} e^{2 pi i r j / q}
std::complex<double> geometric_window(int64_t r, int64_t q, int64_t j1, int64_t j2) {
    if (j2 < j1) return 0.0;
    int64_t cnt = j2 - j1 + 1;
    r = mod_pos(r, q);
    if (r == 0) return double(cnt);
    std::complex<double> step = unit_phase(r, q);
    std::complex<double> first = unit_phase(r * (j1 % q), q);
    std::complex<double> num = unit_phase(r * (cnt % q), q) - 1.0;
    return first * num / (step - 1.0);
}

// reduced fraction l1/m1 - l2/m2 = num/den
struct Fraction { int64_t num, den; };
Fraction reduced_difference(int64_t m1, int64_t l1, int64_t m2, int64_t l2) {
    int64_t num = l1 * m2 - l2 * m1;
    int64_t den = m1 * m2;
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) g = den; // num == 0 cannot happen for distinct coprime pairs
    return {num / g, den / g};
}

double fejer_ratio(double u, int64_t N) {
    // sin((2N+1)u) / ((2N+1) sin u), u in [0, pi)
    if (u == 0.0) return 1.0;
    return std::sin((2.0 * double(N) + 1.0) * u) /
           ((2.0 * double(N) + 1.0) * std::sin(u));
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

int64_t window_count(int64_t a, int64_t D, double A1, double A2) {
    int64_t j1 = static_cast<int64_t>(std::ceil((A1 - double(a)) / double(D) - 1e-12));
    int64_t j2 = static_cast<int64_t>(std::floor((A2 - double(a)) / double(D) + 1e-12));
    return j2 >= j1 ? j2 - j1 + 1 : 0;
}

std::pair<int64_t, int64_t> window_range(int64_t a, int64_t D, double A1, double A2) {
    int64_t j1 = static_cast<int64_t>(std::ceil((A1 - double(a)) / double(D) - 1e-12));
    int64_t j2 = static_cast<int64_t>(std::floor((A2 - double(a)) / double(D) + 1e-12));
    return {j1, j2};
}

// (m, l) items with m <= M squarefree coprime to Z0, gcd(l, m) = 1, and the
// Moebius/phi coefficient.
struct PairItem { int64_t m, l; double coeff; };
std::vector<PairItem> enumerate_items(const SieveContext& ctx, int64_t M) {
    const auto& t = *ctx.tables;
    std::vector<PairItem> items;
    for (int64_t m = 1; m <= M; ++m) {
        if (!t.squarefree(m) || !ctx.coprime_z0(m)) continue;
        double c = double(t.mu[static_cast<size_t>(m)]) / double(t.phi[static_cast<size_t>(m)]);
        for (int64_t l = 1; l <= m; ++l)
            if (std::gcd(l, m) == 1) items.push_back({m, l, c});
    }
    return items;
}

} // namespace

// ---------------------------------------------------------------------------
// SEvaluator

SEvaluator::SEvaluator(const SieveContext& ctx, int64_t M) : ctx_(&ctx), M_(M) {
    if (M < 1 || M > 200)
        throw std::invalid_argument("SEvaluator: M must lie in [1, 200]");
    const auto& t = *ctx.tables;
    for (int64_t p : t.primes) {
        if (p > M) break;
        primes_.push_back(p);
    }
    if (primes_.size() > 31)
        throw std::invalid_argument("SEvaluator: too many primes <= M");
    for (size_t i = 0; i < primes_.size(); ++i)
        if (ctx.prime_in_z0(primes_[i])) z0_mask_ |= (1u << i);
    for (int64_t k = 1; k <= M; ++k) {
        if (!t.squarefree(k) || !ctx.coprime_z0(k)) continue;
        uint32_t mask = 0;
        int64_t m = k;
        while (m > 1) {
            int64_t p = t.spf[static_cast<size_t>(m)];
            for (size_t i = 0; i < primes_.size(); ++i)
                if (primes_[i] == p) { mask |= (1u << i); break; }
            while (m % p == 0) m /= p;
        }
        ks_.push_back({k, mask, 1.0 / double(t.phi[static_cast<size_t>(k)])});
    }
}

uint32_t SEvaluator::mask_of(int64_t n) const {
    if (n < 0) n = -n;
    uint32_t mask = 0;
    for (size_t i = 0; i < primes_.size(); ++i)
        if (n % primes_[i] == 0) mask |= (1u << i);
    return mask;
}

double SEvaluator::restricted_phi_sum(int64_t x, uint32_t forbidden) const {
    double s = 0.0;
    for (const auto& e : ks_) {
        if (e.k > x) break;
        if ((e.mask & forbidden) == 0) s += e.inv_phi;
    }
    return s;
}

double SEvaluator::S_from_mask(uint32_t n_mask) const {
    for (const auto& kv : memo_)
        if (kv.first == n_mask) return kv.second;
    // divisors d of n coprime to Z0 are the subsets of the non-Z0 small
    // primes of n; terms with d > M vanish (empty inner range)
    uint32_t avail = n_mask & ~z0_mask_;
    std::vector<int> idx;
    for (size_t i = 0; i < primes_.size(); ++i)
        if (avail & (1u << i)) idx.push_back(static_cast<int>(i));
    double total = 0.0;
    uint32_t subsets = 1u << idx.size();
    for (uint32_t s = 0; s < subsets; ++s) {
        int64_t d = 1;
        int sign = 1;
        bool over = false;
        for (size_t b = 0; b < idx.size(); ++b) {
            if (s & (1u << b)) {
                d *= primes_[static_cast<size_t>(idx[b])];
                sign = -sign;
                if (d > M_) { over = true; break; }
            }
        }
        if (over || d > M_) continue;
        total += sign * restricted_phi_sum(M_ / d, n_mask);
    }
    memo_.emplace_back(n_mask, total);
    return total;
}

double s_of_Mn(const SieveContext& ctx, int64_t M, int64_t n) {
    if (n == 0) throw std::invalid_argument("s_of_Mn: n must be nonzero");
    SEvaluator ev(ctx, M);
    return ev.S(n);
}

// ---------------------------------------------------------------------------
// Norm identities

double v_norm_direct(const SieveContext& ctx, int64_t M, int64_t a,
                     double A1, double A2) {
    int64_t D = ctx.D();
    if (!(0 < A1 && A1 < A2))
        throw std::invalid_argument("v_norm_direct: need 0 < A1 < A2");
    if ((A2 - A1) / double(D) > 1e4)
        throw std::invalid_argument("v_norm_direct: window too long");
    const auto& t = *ctx.tables;
    auto [j1, j2] = window_range(a, D, A1, A2);
    KahanSum acc;
    for (int64_t j = j1; j <= j2; ++j) {
        int64_t n = a + j * D;
        std::complex<double> inner = 0.0;
        for (int64_t m = 1; m <= M; ++m) {
            if (!t.squarefree(m) || !ctx.coprime_z0(m)) continue;
            double c = double(t.mu[static_cast<size_t>(m)]) /
                       double(t.phi[static_cast<size_t>(m)]);
            int64_t nm = mod_pos(n, m);
            std::complex<double> es = 0.0;
            for (int64_t l = 1; l <= m; ++l) {
                if (std::gcd(l, m) != 1) continue;
                es += unit_phase(nm * l, m);
            }
            inner += c * es;
        }
        acc.add(std::norm(inner));
    }
    return acc.value();
}

double v_norm_arith(const SieveContext& ctx, int64_t M, int64_t a,
                    double A1, double A2) {
    int64_t D = ctx.D();
    if (!(0 < A1 && A1 < A2))
        throw std::invalid_argument("v_norm_arith: need 0 < A1 < A2");
    auto [j1, j2] = window_range(a, D, A1, A2);
    SEvaluator ev(ctx, M);
    KahanSum acc;
    for (int64_t j = j1; j <= j2; ++j) {
        double s = ev.S(a + j * D);
        acc.add(s * s);
    }
    return acc.value();
}

std::pair<double, double> diag_offdiag(const SieveContext& ctx, int64_t M,
                                       int64_t a, double A1, double A2) {
    int64_t D = ctx.D();
    auto [j1, j2] = window_range(a, D, A1, A2);
    SEvaluator ev(ctx, M);
    double diag = double(window_count(a, D, A1, A2)) * ev.restricted_phi_sum(M, 0);

    auto items = enumerate_items(ctx, M);
    KahanSum off_re;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t k = 0; k < items.size(); ++k) {
            if (i == k) continue;
            const auto& p1 = items[i];
            const auto& p2 = items[k];
            Fraction f = reduced_difference(p1.m, p1.l, p2.m, p2.l);
            std::complex<double> term =
                unit_phase(a * f.num, f.den) *
                geometric_window(mod_pos(D % f.den * f.num, f.den), f.den, j1, j2);
            off_re.add(p1.coeff * p2.coeff * term.real());
        }
    }
    return {diag, off_re.value()};
}

// ---------------------------------------------------------------------------
// Smoothed sums

namespace {

// S^2(M; a + jD) over the smoothing index range, via a stride sieve of the
// primes <= M along the arithmetic progression.
std::vector<double> window_s_squared(const SieveContext& ctx, const SEvaluator& ev,
                                     int64_t a, int64_t j_lo, int64_t j_hi) {
    int64_t D = ctx.D();
    int64_t len = j_hi - j_lo + 1;
    std::vector<uint32_t> masks(static_cast<size_t>(len), 0);
    const auto& primes = ev.small_primes();
    for (size_t i = 0; i < primes.size(); ++i) {
        int64_t p = primes[i];
        if (D % p == 0) {
            if (mod_pos(a, p) == 0)
                for (int64_t j = 0; j < len; ++j) masks[static_cast<size_t>(j)] |= (1u << i);
            continue;
        }
        // a + jD = 0 (mod p)  <=>  j = -a / D (mod p)
        int64_t j0 = mod_pos(-a * inv_mod(D, p), p);
        int64_t start = mod_pos(j0 - mod_pos(j_lo, p), p);
        for (int64_t j = start; j < len; j += p) masks[static_cast<size_t>(j)] |= (1u << i);
    }
    std::vector<double> v(static_cast<size_t>(len));
    for (int64_t j = 0; j < len; ++j) {
        int64_t n = a + (j_lo + j) * D;
        if (n == 0) { v[static_cast<size_t>(j)] = 0.0; continue; }
        double s = ev.S_from_mask(masks[static_cast<size_t>(j)]);
        v[static_cast<size_t>(j)] = s * s;
    }
    return v;
}

std::vector<double> smoothing_weights(const EngineParams& p) {
    auto kc = kernels::kernel_coefficients(p.kappa, p.N);
    return kernels::kernel_weights(kc).w;
}

} // namespace

double smoothed_W(const SieveContext& ctx, const EngineParams& p, int64_t a) {
    int64_t kn = int64_t(p.kappa) * p.N;
    if (kn > 100'000) throw std::invalid_argument("smoothed_W: kappa*N too large");
    SEvaluator ev(ctx, p.M);
    auto w = smoothing_weights(p);
    int64_t j_lo = p.mode == Mode::negative ? 0 : -kn;
    int64_t j_hi = p.mode == Mode::negative ? 2 * kn : kn;
    auto v = window_s_squared(ctx, ev, a, j_lo, j_hi);
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
    int64_t center = p.mode == Mode::negative ? kn : 0;
    KahanSum acc;
    for (int64_t k = 0; k <= kn; ++k) {
        int64_t lo = center - k - j_lo, hi = center + k - j_lo;
        double win = prefix[static_cast<size_t>(hi + 1)] - prefix[static_cast<size_t>(lo)];
        acc.add(w[static_cast<size_t>(k)] * win / double(2 * k + 1));
    }
    return acc.value();
}

double wod_windowed(const SieveContext& ctx, const EngineParams& p, int64_t a,
                    int64_t d) {
    int64_t D = ctx.D();
    int64_t kn = int64_t(p.kappa) * p.N;
    auto w = smoothing_weights(p);
    auto items = enumerate_items(ctx, p.M);
    int64_t center = p.mode == Mode::negative ? kn : 0;
    KahanSum acc;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t k2 = 0; k2 < items.size(); ++k2) {
            if (i == k2) continue;
            const auto& p1 = items[i];
            const auto& p2 = items[k2];
            if (std::gcd(p1.m, p2.m) != d) continue;
            Fraction f = reduced_difference(p1.m, p1.l, p2.m, p2.l);
            int64_t q = f.den;
            int64_t r = mod_pos(D % q * f.num, q); // D * (l1/m1 - l2/m2) mod 1
            std::complex<double> phase_a = unit_phase(a * f.num, q);
            // incremental symmetric windows around the center
            std::complex<double> win = unit_phase(r * mod_pos(center, q), q);
            KahanSum tre, tim;
            {
                double c0 = w[0] * 1.0;
                tre.add(c0 * win.real());
                tim.add(c0 * win.imag());
            }
            for (int64_t k = 1; k <= kn; ++k) {
                win += unit_phase(r * mod_pos(center - k, q), q);
                win += unit_phase(r * mod_pos(center + k, q), q);
                double ck = w[static_cast<size_t>(k)] / double(2 * k + 1);
                tre.add(ck * win.real());
                tim.add(ck * win.imag());
            }
            std::complex<double> total(tre.value(), tim.value());
            acc.add(p1.coeff * p2.coeff * (phase_a * total).real());
        }
    }
    return acc.value();
}

double wod_closed(const SieveContext& ctx, const EngineParams& p, int64_t a,
                  int64_t d) {
    int64_t D = ctx.D();
    auto items = enumerate_items(ctx, p.M);
    KahanSum acc;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t k2 = 0; k2 < items.size(); ++k2) {
            if (i == k2) continue;
            const auto& p1 = items[i];
            const auto& p2 = items[k2];
            if (std::gcd(p1.m, p2.m) != d) continue;
            Fraction f = reduced_difference(p1.m, p1.l, p2.m, p2.l);
            int64_t q = f.den;
            int64_t r = mod_pos(D % q * f.num, q);
            double u = M_PI * double(r) / double(q);
            double fe = ipow(fejer_ratio(u, p.N), p.kappa);
            std::complex<double> term = unit_phase(a * f.num, q) * fe;
            if (p.mode == Mode::negative) {
                double ph = 2.0 * double(p.kappa) * double(p.N) * u;
                term *= std::complex<double>(std::cos(ph), std::sin(ph));
            }
            acc.add(p1.coeff * p2.coeff * term.real());
        }
    }
    return acc.value();
}

double smoothed_W_assembled(const SieveContext& ctx, const EngineParams& p,
                            int64_t a) {
    SEvaluator ev(ctx, p.M);
    double wdiag = ev.restricted_phi_sum(p.M, 0);
    KahanSum acc;
    acc.add(wdiag);
    for (int64_t d = 1; d <= p.M; ++d) {
        if (!ctx.tables->squarefree(d) || !ctx.coprime_z0(d)) continue;
        acc.add(wod_windowed(ctx, p, a, d));
    }
    return acc.value();
}

VerificationReport wod_closed_form_check(const SieveContext& ctx,
                                         const EngineParams& p, int64_t a,
                                         int64_t d) {
    if (p.M > 40)
        throw std::invalid_argument("wod_closed_form_check: M <= 40");
    double lhs = wod_windowed(ctx, p, a, d);
    double rhs = wod_closed(ctx, p, a, d);
    double scale = std::max({std::abs(lhs), std::abs(rhs), 0.1});
    double margin = 1e-8 * scale - std::abs(lhs - rhs);
    return make_report("identity.wod",
                       {{"D", std::to_string(ctx.D())},
                        {"M", std::to_string(p.M)},
                        {"kappa", std::to_string(p.kappa)},
                        {"N", std::to_string(p.N)},
                        {"a", std::to_string(a)},
                        {"d", std::to_string(d)}},
                       lhs, rhs, 1e-8 * scale, margin, verdict_from_margin(margin));
}

// ---------------------------------------------------------------------------
// Omega sums

double omega_diff(const SieveContext& ctx, const EngineParams& p) {
    int64_t D = ctx.D();
    KahanSum acc;
    for (int64_t a = 1; a <= D; ++a) {
        int chi = ctx.table.chi(a);
        if (!chi) continue;
        acc.add(double(chi) * smoothed_W(ctx, p, a));
    }
    return acc.value();
}

OmegaRegrouped omega_diff_regrouped(const SieveContext& ctx, const EngineParams& p) {
    int64_t D = ctx.D();
    int64_t kn = int64_t(p.kappa) * p.N;
    if (D * kn > 100'000'000)
        throw std::invalid_argument("omega_diff_regrouped: D*kappa*N too large");
    SEvaluator ev(ctx, p.M);
    auto w = smoothing_weights(p);
    const auto& t = *ctx.tables;

    int64_t hi = (2 * kn + 1) * D; // covers both window conventions
    // prefix sums of chi(n) S^2(M;n), split on prime powers, sampled at the
    // window cut points
    std::vector<int64_t> cuts;
    if (p.mode == Mode::negative) {
        for (int64_t k = 0; k <= kn; ++k) {
            cuts.push_back((kn - k) * D);
            cuts.push_back((kn + k + 1) * D - 1);
        }
    } else {
        for (int64_t k = 0; k <= kn; ++k) {
            cuts.push_back(k * D - 1);
            cuts.push_back((k + 1) * D);
        }
    }
    cuts.push_back(0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> cut_pp(cuts.size()), cut_rest(cuts.size());
    KahanSum run_pp, run_rest;
    size_t ci = 0;
    while (ci < cuts.size() && cuts[ci] < 1) {
        cut_pp[ci] = 0.0;
        cut_rest[ci] = 0.0;
        ++ci;
    }

    const auto& primes = ev.small_primes();
    int64_t block = 1 << 18;
    std::vector<uint32_t> mask;
    std::vector<int64_t> reduce;
    for (int64_t lo = 1; lo <= hi; lo += block) {
        int64_t len = std::min(block, hi - lo + 1);
        mask.assign(static_cast<size_t>(len), 0);
        reduce.resize(static_cast<size_t>(len));
        for (int64_t i = 0; i < len; ++i) reduce[static_cast<size_t>(i)] = lo + i;
        // small primes: masks for S; all primes <= sqrt(hi): factor out for
        // the prime-power split
        for (size_t pi = 0; pi < primes.size(); ++pi) {
            int64_t q = primes[pi];
            for (int64_t n = ((lo + q - 1) / q) * q; n < lo + len; n += q)
                mask[static_cast<size_t>(n - lo)] |= (1u << pi);
        }
        for (int64_t q : t.primes) {
            if (q * q > hi) break;
            for (int64_t n = ((lo + q - 1) / q) * q; n < lo + len; n += q) {
                int64_t& v = reduce[static_cast<size_t>(n - lo)];
                while (v % q == 0) v /= q;
            }
        }
        for (int64_t i = 0; i < len; ++i) {
            int64_t n = lo + i;
            int chi = ctx.table.chi(n);
            if (chi) {
                double s = ev.S_from_mask(mask[static_cast<size_t>(i)]);
                double c = double(chi) * s * s;
                // n is a prime power iff a single prime survives the
                // factor-out pass (reduce == 1 after dividing by one prime,
                // or n itself is prime: reduce == n)
                int64_t red = reduce[static_cast<size_t>(i)];
                bool prime_power;
                if (red == n) prime_power = true; // no prime <= sqrt(hi) divides: n prime
                else if (red == 1) {
                    // divided out by possibly several primes; recheck directly
                    int64_t m = n, pdiv = 0;
                    for (int64_t q : t.primes) {
                        if (q * q > m) break;
                        if (m % q == 0) { pdiv = q; break; }
                    }
                    if (pdiv == 0) prime_power = true;
                    else {
                        while (m % pdiv == 0) m /= pdiv;
                        prime_power = (m == 1);
                    }
                } else prime_power = false; // a prime > sqrt(hi) remains besides others
                if (prime_power) run_pp.add(c); else run_rest.add(c);
            }
            while (ci < cuts.size() && cuts[ci] == n) {
                cut_pp[ci] = run_pp.value();
                cut_rest[ci] = run_rest.value();
                ++ci;
            }
        }
    }
    while (ci < cuts.size()) { cut_pp[ci] = run_pp.value(); cut_rest[ci] = run_rest.value(); ++ci; }

    auto at = [&](int64_t x, const std::vector<double>& cv) {
        if (x < 1) return 0.0;
        auto it = std::lower_bound(cuts.begin(), cuts.end(), x);
        return cv[static_cast<size_t>(it - cuts.begin())];
    };

    OmegaRegrouped out;
    KahanSum pp, rest;
    for (int64_t k = 0; k <= kn; ++k) {
        double ck = w[static_cast<size_t>(k)] / double(2 * k + 1);
        double wpp, wrest;
        if (p.mode == Mode::negative) {
            int64_t lo = (kn - k) * D, up = (kn + k + 1) * D - 1;
            wpp = at(up, cut_pp) - at(lo, cut_pp);
            wrest = at(up, cut_rest) - at(lo, cut_rest);
        } else {
            // window n in [1-kD, (k+1)D]; chi is even here, so the negative
            // side folds onto the positive prefix
            wpp = at((k + 1) * D, cut_pp) + at(k * D - 1, cut_pp);
            wrest = at((k + 1) * D, cut_rest) + at(k * D - 1, cut_rest);
        }
        pp.add(ck * wpp);
        rest.add(ck * wrest);
    }
    out.prime_power = pp.value();
    out.rest = rest.value();
    return out;
}

VerificationReport omega_regroup_check(const SieveContext& ctx,
                                       const EngineParams& p) {
    double lhs = omega_diff(ctx, p);
    auto rg = omega_diff_regrouped(ctx, p);
    double rhs = rg.total();
    double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-3});
    double margin = 1e-6 * scale - std::abs(lhs - rhs);
    return make_report("identity.regroup",
                       {{"D", std::to_string(ctx.D())},
                        {"M", std::to_string(p.M)},
                        {"kappa", std::to_string(p.kappa)},
                        {"N", std::to_string(p.N)}},
                       lhs, rhs, 1e-6 * scale, margin, verdict_from_margin(margin));
}

OmegaAverage omega_avg(const SieveContext& ctx, const EngineParams& p, int64_t T) {
    if (T < 1) throw std::invalid_argument("omega_avg: T >= 1");
    KahanSum acc;
    for (int64_t N = T; N < 2 * T; ++N) {
        EngineParams q = p;
        q.N = N;
        acc.add(omega_diff(ctx, q));
    }
    OmegaAverage out;
    out.value = acc.value() / double(T);
    double prod = 1.0;
    for (int64_t q : ctx.z0_primes) prod *= 1.0 - 1.0 / double(q);
    out.main_term = prod * prod * double(ctx.D()) *
                    (std::log(double(T)) - 2.0 * std::log(double(p.M)));
    return out;
}

// ---------------------------------------------------------------------------
// Pair classes and the resolved residue

PairCountResult pair_count(int64_t m1, int64_t m2, int64_t d1, int64_t ell) {
    auto squarefree_small = [](int64_t m) {
        for (const auto& [q, e] : arith::factorize(m))
            if (e > 1) return false;
        return true;
    };
    if (m1 < 1 || m2 < 1 || !squarefree_small(m1) || !squarefree_small(m2))
        throw std::invalid_argument("pair_count: m1, m2 must be squarefree");
    int64_t d = std::gcd(m1, m2);
    if (d1 < 1 || d % d1 != 0)
        throw std::invalid_argument("pair_count: d1 must divide gcd(m1, m2)");
    int64_t n = m1 / d * (m2 / d) * d1;
    if (ell < 1 || ell >= n || std::gcd(ell, n) != 1)
        throw std::invalid_argument("pair_count: need 1 <= ell < n coprime to n");

    int64_t brute = 0;
    for (int64_t l1 = 1; l1 <= m1; ++l1) {
        if (std::gcd(l1, m1) != 1) continue;
        for (int64_t l2 = 1; l2 <= m2; ++l2) {
            if (std::gcd(l2, m2) != 1) continue;
            if (m1 == m2 && l1 == l2) continue;
            Fraction f = reduced_difference(m1, l1, m2, l2);
            if (f.den != n) continue;
            if (f.num == ell || f.num == ell - n) ++brute;
        }
    }
    int64_t formula = 1;
    for (const auto& [q, e] : arith::factorize(d1)) formula *= (q - 2);
    for (const auto& [q, e] : arith::factorize(d / d1)) formula *= (q - 1);
    if (formula < 0) formula = 0; // p = 2 in d1 kills the class
    PairCountResult r{brute, formula, brute == formula};
    return r;
}

ResolvedS resolve_s(int64_t D, int64_t m1, int64_t ell1, int64_t m2,
                    int64_t ell2, int64_t d1) {
    if (std::gcd(ell1, m1) != 1 || std::gcd(ell2, m2) != 1)
        throw std::invalid_argument("resolve_s: residues must be coprime to moduli");
    if (m1 == m2 && ell1 == ell2)
        throw std::invalid_argument("resolve_s: pairs must be distinct");
    int64_t d = std::gcd(m1, m2);
    Fraction f = reduced_difference(m1, ell1, m2, ell2);
    ResolvedS out;
    out.n = f.den;
    out.ell = mod_pos(f.num, f.den);
    if (out.n != m1 / d * (m2 / d) * d1)
        throw std::invalid_argument("resolve_s: d1 inconsistent with the reduced fraction");
    if (std::gcd(mod_pos(D, out.n), out.n) != 1) {
        out.gcd_ok = false;
        return out;
    }
    int64_t s = mod_pos(D % out.n * out.ell, out.n);
    if (2 * s > out.n) s -= out.n;
    out.s = s;
    return out;
}

VerificationReport lemma31_check(const chars::CharacterTable& tab, int64_t n,
                                 int64_t ell) {
    int64_t D = tab.disc.abs;
    std::vector<std::pair<std::string, std::string>> params = {
        {"D", std::to_string(D)}, {"n", std::to_string(n)}, {"l", std::to_string(ell)}};
    if (n < 2 || std::gcd(mod_pos(ell, n) == 0 ? n : mod_pos(ell, n), n) != 1 ||
        std::gcd(mod_pos(D, n) == 0 ? n : mod_pos(D, n), n) != 1) {
        return make_report("lemma3.1", params, 0, 0, 0, 0,
                           VerificationReport::Verdict::report_only);
    }
    KahanSum re, im;
    for (int64_t a = 1; a <= D; ++a) {
        int chi = tab.values[static_cast<size_t>(a % D)];
        if (!chi) continue;
        auto ph = unit_phase(a * mod_pos(ell, n), n);
        re.add(chi * ph.real());
        im.add(chi * ph.imag());
    }
    std::complex<double> sum(re.value(), im.value());
    int64_t s = mod_pos(D % n * mod_pos(ell, n), n);
    if (2 * s > n) s -= n;
    double root_d = std::sqrt(double(D));
    std::complex<double> dev;
    if (std::gcd(s < 0 ? -s : s, D) == 1) {
        double c = double(tab.chi(s)) * double(tab.chi(n));
        if (tab.disc.sign < 0)
            dev = sum + std::complex<double>(0.0, c * root_d);
        else
            dev = sum - std::complex<double>(c * root_d, 0.0);
    } else {
        dev = sum;
    }
    double lhs = std::abs(dev);
    double bound = kTwoPi * double(D) * double(s < 0 ? -s : s) / double(n);
    double margin = bound - lhs;
    params.push_back({"s", std::to_string(s)});
    return make_report("lemma3.1", params, lhs, 0.0, bound, margin,
                       verdict_from_margin(margin));
}

// ---------------------------------------------------------------------------
// Gauss-sum main term and the closed error bound

double od_main(const SieveContext& ctx, const EngineParams& p) {
    if (p.M > 60) throw std::invalid_argument("od_main: M <= 60");
    int64_t D = ctx.D();
    const auto& t = *ctx.tables;
    const auto& tab = ctx.table;

    // inner s-sums are shared across pairs with the same n = m1' m2' d1
    std::vector<double> ssum_cache(static_cast<size_t>(p.M * p.M + 1),
                                   std::numeric_limits<double>::quiet_NaN());
    auto ssum = [&](int64_t n) {
        double& slot = ssum_cache[static_cast<size_t>(n)];
        if (!std::isnan(slot)) return slot;
        KahanSum acc;
        for (int64_t s = 1; 2 * s <= n; ++s) {
            if (std::gcd(s, n) != 1) continue;
            int chi = tab.chi(s);
            if (!chi) continue;
            double u = M_PI * double(s) / double(n);
            double fe = ipow(fejer_ratio(u, p.N), p.kappa);
            double term = double(chi) * fe;
            if (p.mode == Mode::negative)
                term *= std::sin(2.0 * double(p.kappa) * double(p.N) * u);
            acc.add(term);
        }
        slot = 2.0 * acc.value();
        return slot;
    };

    KahanSum total;
    for (int64_t d = 1; d <= p.M; ++d) {
        if (!t.squarefree(d) || !ctx.coprime_z0(d)) continue;
        std::vector<int64_t> d1s;
        for (int64_t d1 = 1; d1 <= d; ++d1)
            if (d % d1 == 0) d1s.push_back(d1);
        for (int64_t m1p = 1; m1p * d <= p.M; ++m1p) {
            int64_t m1 = m1p * d;
            if (!t.squarefree(m1) || !ctx.coprime_z0(m1)) continue;
            for (int64_t m2p = 1; m2p * d <= p.M; ++m2p) {
                if (std::gcd(m1p, m2p) != 1) continue;
                int64_t m2 = m2p * d;
                if (!t.squarefree(m2) || !ctx.coprime_z0(m2)) continue;
                double coeff = double(t.mu[static_cast<size_t>(m1)]) *
                               double(t.mu[static_cast<size_t>(m2)]) /
                               (double(t.phi[static_cast<size_t>(m1)]) *
                                double(t.phi[static_cast<size_t>(m2)]));
                for (int64_t d1 : d1s) {
                    int64_t n = m1p * m2p * d1;
                    int chi_fac = tab.chi(n);
                    if (!chi_fac) continue;
                    double wd1 = 1.0;
                    for (const auto& [q, e] : arith::factorize(d1))
                        wd1 *= double(q - 2) / double(q - 1);
                    total.add(double(t.phi[static_cast<size_t>(d)]) * wd1 * coeff *
                              double(chi_fac) * ssum(n));
                }
            }
        }
    }
    return 0.5 * std::sqrt(double(D)) * total.value();
}

VerificationReport error_bound_check(const SieveContext& ctx,
                                     const EngineParams& p) {
    if (p.kappa < 3)
        throw std::invalid_argument("error_bound_check: kappa >= 3");
    if (p.M > 40)
        throw std::invalid_argument("error_bound_check: M <= 40");
    int64_t D = ctx.D();
    const auto& tab = ctx.table;

    // character-weighted off-diagonal via the closed Fejer-power form
    auto items = enumerate_items(ctx, p.M);
    KahanSum re;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t k2 = 0; k2 < items.size(); ++k2) {
            if (i == k2) continue;
            const auto& p1 = items[i];
            const auto& p2 = items[k2];
            Fraction f = reduced_difference(p1.m, p1.l, p2.m, p2.l);
            int64_t q = f.den;
            int64_t r = mod_pos(D % q * f.num, q);
            // sum over a of chi(a) e^{2 pi i a num/q}
            KahanSum cre, cim;
            for (int64_t a = 1; a <= D; ++a) {
                int chi = tab.values[static_cast<size_t>(a % D)];
                if (!chi) continue;
                auto ph = unit_phase(a * f.num, q);
                cre.add(chi * ph.real());
                cim.add(chi * ph.imag());
            }
            std::complex<double> char_sum(cre.value(), cim.value());
            double u = M_PI * double(r) / double(q);
            double fe = ipow(fejer_ratio(u, p.N), p.kappa);
            std::complex<double> term = char_sum * fe;
            if (p.mode == Mode::negative) {
                double ph = 2.0 * double(p.kappa) * double(p.N) * u;
                term *= std::complex<double>(std::cos(ph), std::sin(ph));
            }
            re.add(p1.coeff * p2.coeff * term.real());
        }
    }
    double lhs = re.value();
    double od = od_main(ctx, p);
    double resid = std::abs(lhs - 2.0 * od);
    double loglogM = std::max(1.0, std::log(std::max(1.0, std::log(double(p.M)))));
    double tau_d = 1.0;
    for (const auto& [q, e] : arith::factorize(D)) tau_d *= double(e + 1);
    double bound = 1e8 * tau_d * double(D) * double(p.M) * double(p.M) *
                   loglogM * loglogM / (double(p.N) * double(p.N));
    double margin = bound - resid;
    return make_report("bound.error",
                       {{"D", std::to_string(D)},
                        {"M", std::to_string(p.M)},
                        {"kappa", std::to_string(p.kappa)},
                        {"N", std::to_string(p.N)}},
                       lhs, 2.0 * od, bound, margin, verdict_from_margin(margin));
}

// ---------------------------------------------------------------------------
// Restricted phi-sum main term

Lemma21Result lemma21_check(const SieveContext& ctx,
                            const arith::PrimeSeriesConstants& consts,
                            int64_t L, int64_t Q) {
    const auto& t = *ctx.tables;
    if (L < 2 || L > t.limit || L > 1'000'000)
        throw std::invalid_argument("lemma21_check: L out of range");
    if (Q < 1) throw std::invalid_argument("lemma21_check: Q >= 1");
    auto q_factors = arith::factorize(Q);
    for (const auto& [q, e] : q_factors)
        if (ctx.prime_in_z0(q))
            throw std::invalid_argument("lemma21_check: Q must be coprime to Z0");

    KahanSum lhs_acc;
    for (int64_t k = 1; k <= L; ++k) {
        if (!t.squarefree(k)) continue;
        if (Q > 1 && std::gcd(k, Q) != 1) continue;
        if (!ctx.coprime_z0(k)) continue;
        lhs_acc.add(1.0 / double(t.phi[static_cast<size_t>(k)]));
    }
    double lhs = lhs_acc.value();

    std::vector<int64_t> qs;
    for (int64_t pz : ctx.z0_primes) qs.push_back(pz);
    for (const auto& [q, e] : q_factors) qs.push_back(q);
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

    double prod = 1.0;
    KahanSum logq;
    for (int64_t q : qs) {
        prod *= 1.0 - 1.0 / double(q);
        logq.add(std::log(double(q)) / double(q));
    }
    double main = prod * (std::log(double(L)) + consts.c_prime + logq.value());

    double residual = std::abs(lhs - main);
    double logD = ctx.variant == Z0Variant::disabled ? 0.0 : std::log(double(ctx.D()));
    double logL = std::log(double(L));
    double logQ = std::log(double(Q));
    double tau_q = 1.0;
    for (const auto& [q, e] : q_factors) tau_q *= double(e + 1);
    double d5 = ctx.variant == Z0Variant::disabled
                    ? 1.0
                    : std::pow(double(ctx.D()), 5.0);
    double denom = std::max(double(L) * std::exp(-6.0 * logD * logD), 1.0);
    double bound = 1e4 * tau_q * logD * logL / std::pow(double(L), 0.25) +
                   1e4 * (10.0 + logQ) / d5 +
                   4.0 * (10.0 + logL + 2.0 * logD * logD + logQ * logQ) / denom;

    double margin = bound - residual;
    Lemma21Result out;
    out.sum = lhs;
    out.main = main;
    out.residual = residual;
    out.report = make_report(
        "lemma2.1",
        {{"D", std::to_string(ctx.variant == Z0Variant::disabled ? 0 : ctx.D())},
         {"Q", std::to_string(Q)},
         {"L", std::to_string(L)}},
        lhs, main, bound, margin, verdict_from_margin(margin));
    return out;
}

// ---------------------------------------------------------------------------
// Moebius-reflection rewrite of S(M;n)

VerificationReport lemma42_check(const SieveContext& ctx, int64_t M, int64_t n,
                                 int64_t Mprime, int64_t H) {
    const auto& t = *ctx.tables;
    if (n < 2) throw std::invalid_argument("lemma42_check: n >= 2");
    if (!ctx.coprime_z0(n))
        throw std::invalid_argument("lemma42_check: n must be coprime to Z0");
    if (Mprime < 1 || Mprime >= M)
        throw std::invalid_argument("lemma42_check: need 1 <= M' < M");
    int64_t nstar = arith::squarefree_kernel(n);
    auto nfac = arith::factorize(nstar);
    if (nfac.size() < 2)
        throw std::invalid_argument("lemma42_check: n must not be a prime power");

    // smooth part of nstar and the rough primes
    std::vector<int64_t> smooth_primes, rough_primes;
    for (const auto& [q, e] : nfac)
        (q <= H ? smooth_primes : rough_primes).push_back(q);
    int64_t ell = 1;
    for (int64_t q : smooth_primes) ell *= q;

    // all squarefree divisors of nstar with mu and exponent vectors
    size_t np = nfac.size();
    std::vector<int64_t> divs;
    std::vector<int> mus;
    std::vector<uint32_t> vecs;
    for (uint32_t s = 0; s < (1u << np); ++s) {
        int64_t d = 1;
        int mu = 1;
        for (size_t b = 0; b < np; ++b)
            if (s & (1u << b)) { d *= nfac[b].first; mu = -mu; }
        divs.push_back(d);
        mus.push_back(mu);
        vecs.push_back(s);
    }
    int mu_nstar = (np % 2 == 0) ? 1 : -1;

    // reflection identities, exact in integers / the exponent lattice
    int64_t left18 = 0, right18 = 0;
    std::vector<int64_t> left19(np, 0), right19(np, 0);
    for (size_t i = 0; i < divs.size(); ++i) {
        if (divs[i] <= Mprime) {
            left18 += mus[i];
            for (size_t b = 0; b < np; ++b)
                if (vecs[i] & (1u << b)) left19[b] -= mus[i]; // -sum mu(d) log d
        }
        if (divs[i] * Mprime < nstar) { // d2 < nstar / M'
            right18 -= mu_nstar * mus[i];
            for (size_t b = 0; b < np; ++b)
                if (!(vecs[i] & (1u << b))) right19[b] += mu_nstar * mus[i]; // log(n*/d2)
        }
    }
    bool reflections_ok = (left18 == right18) && (left19 == right19);

    // restricted 1/phi sum; the k-condition follows the smooth part
    auto G = [&](int64_t x) {
        double s = 0.0;
        for (int64_t k = 1; k <= x; ++k) {
            if (!t.squarefree(k)) continue;
            if (std::gcd(k, ell) != 1) continue;
            if (!ctx.coprime_z0(k)) continue;
            s += 1.0 / double(t.phi[static_cast<size_t>(k)]);
        }
        return s;
    };

    // main expression in terms of the smooth part
    std::vector<int64_t> union_primes;
    for (int64_t q : smooth_primes) union_primes.push_back(q);
    for (int64_t q : ctx.z0_primes)
        if (std::find(union_primes.begin(), union_primes.end(), q) == union_primes.end())
            union_primes.push_back(q);
    double prod1 = 1.0;
    double logq_sum = 0.0;
    for (int64_t q : union_primes) {
        prod1 *= 1.0 - 1.0 / double(q);
        logq_sum += std::log(double(q)) / double(q);
    }
    for (int64_t q : rough_primes) {
        prod1 *= 1.0 - 1.0 / double(q);
        logq_sum += std::log(double(q)) / double(q);
    }

    double consts_c = arith::prime_series_constants(t, t.limit).c_prime;
    KahanSum d2_sum;
    KahanSum d1_sum;
    for (size_t i = 0; i < divs.size(); ++i) {
        int64_t d = divs[i];
        if (ell % d != 0) continue;
        if (d * Mprime < nstar) { // d2 side
            d2_sum.add(mus[i] * (std::log(double(nstar) / double(d)) -
                                 std::log(double(M)) - consts_c - logq_sum));
        }
        // d1 side: nstar <= d1 M and d1 M' < nstar
        if (d * M >= nstar && d * Mprime < nstar) {
            int64_t x = (M * d) / nstar;
            d1_sum.add(mus[i] * G(x));
        }
    }
    double main = mu_nstar * (prod1 * d2_sum.value() + d1_sum.value());

    double S = s_of_Mn(ctx, M, n);
    double residual = std::abs(S - main);
    double tau_n = 1.0;
    for (const auto& [q, e] : arith::factorize(n)) tau_n *= double(e + 1);
    double bound = 1e7 * tau_n * tau_n * std::log(double(n)) /
                   (double(ctx.D()) * double(ctx.D()));
    double margin = bound - residual;
    auto verdict = (reflections_ok && margin >= 0)
                       ? VerificationReport::Verdict::pass
                       : VerificationReport::Verdict::fail;
    return make_report("lemma4.2",
                       {{"D", std::to_string(ctx.D())},
                        {"M", std::to_string(M)},
                        {"n", std::to_string(n)},
                        {"Mprime", std::to_string(Mprime)},
                        {"H", std::to_string(H)},
                        {"reflections", reflections_ok ? "exact" : "broken"}},
                       S, main, bound, margin, verdict);
}

} // namespace siegel::engine
