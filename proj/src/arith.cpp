#include "siegel/arith.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "siegel/summation.hpp"

namespace siegel::arith {

ArithTables build_tables(int64_t limit) {
    if (limit < 2 || limit > 100'000'000)
        throw std::invalid_argument("build_tables: limit must lie in [2, 1e8]");

    ArithTables t;
    t.limit = limit;
    size_t n = static_cast<size_t>(limit) + 1;
    t.mu.assign(n, 0);
    t.phi.assign(n, 0);
    t.tau.assign(n, 0);
    t.lambda.assign(n, 0);
    t.spf.assign(n, 0);
    std::vector<uint8_t> exp_low(n, 0); // exponent of spf in the factorization

    t.mu[1] = 1;
    t.phi[1] = 1;
    t.tau[1] = 1;
    t.lambda[1] = 1;
    t.spf[1] = 1;

    for (int64_t i = 2; i <= limit; ++i) {
        size_t ui = static_cast<size_t>(i);
        if (t.spf[ui] == 0) {
            t.spf[ui] = static_cast<uint32_t>(i);
            t.primes.push_back(i);
            t.mu[ui] = -1;
            t.phi[ui] = static_cast<uint32_t>(i - 1);
            t.tau[ui] = 2;
            t.lambda[ui] = -1;
            exp_low[ui] = 1;
        }
        for (int64_t p : t.primes) {
            if (p > t.spf[ui] || i * p > limit) break;
            size_t j = static_cast<size_t>(i * p);
            t.spf[j] = static_cast<uint32_t>(p);
            t.lambda[j] = static_cast<int8_t>(-t.lambda[ui]);
            if (p == t.spf[ui]) {
                t.mu[j] = 0;
                t.phi[j] = static_cast<uint32_t>(t.phi[ui] * p);
                exp_low[j] = static_cast<uint8_t>(exp_low[ui] + 1);
                t.tau[j] = t.tau[ui] / (exp_low[ui] + 1) * (exp_low[ui] + 2);
            } else {
                t.mu[j] = static_cast<int8_t>(-t.mu[ui]);
                t.phi[j] = static_cast<uint32_t>(t.phi[ui] * (p - 1));
                exp_low[j] = 1;
                t.tau[j] = t.tau[ui] * 2;
            }
        }
    }
    return t;
}

std::vector<std::pair<int64_t, int>> factorize(int64_t n) {
    if (n < 0) n = -n;
    std::vector<std::pair<int64_t, int>> f;
    if (n <= 1) return f;
    for (int64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            f.emplace_back(p, e);
        }
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

int64_t squarefree_kernel(int64_t n) {
    if (n < 1) throw std::invalid_argument("squarefree_kernel: n must be >= 1");
    int64_t k = 1;
    for (const auto& [p, e] : factorize(n)) k *= p;
    return k;
}

std::pair<int64_t, int64_t> rough_smooth_split(int64_t n, int64_t H) {
    if (n < 1 || H < 2)
        throw std::invalid_argument("rough_smooth_split: need n >= 1, H >= 2");
    int64_t smooth = 1, rough = 1;
    for (const auto& [p, e] : factorize(n)) {
        int64_t pk = 1;
        for (int i = 0; i < e; ++i) pk *= p;
        (p <= H ? smooth : rough) *= pk;
    }
    return {smooth, rough};
}

namespace {

int64_t phi_of(int64_t n) {
    int64_t r = n;
    for (const auto& [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

int mu_of(int64_t n) {
    int m = 1;
    for (const auto& [p, e] : factorize(n)) {
        if (e > 1) return 0;
        m = -m;
    }
    return m;
}

} // namespace

int64_t ramanujan_sum(int64_t m, int64_t n) {
    if (m < 1) throw std::invalid_argument("ramanujan_sum: m must be >= 1");
    int64_t g = std::gcd(n < 0 ? -n : n, m);
    if (n == 0) g = m;
    int64_t mp = m / g;
    int mu_mp = mu_of(mp);
    if (mu_mp == 0) return 0;
    return mu_mp * (phi_of(m) / phi_of(mp));
}

MertensResult mertens(const ArithTables& t, int64_t L) {
    if (L < 1 || L > t.limit)
        throw std::invalid_argument("mertens: L out of table range");
    int64_t m = 0;
    for (int64_t k = 1; k <= L; ++k) m += t.mu[static_cast<size_t>(k)];
    double bound = L >= 2 ? double(L) * std::exp(-std::sqrt(std::log(double(L))) / 10.0)
                          : 1.0;
    return {m, bound, bound - std::abs(double(m))};
}

LiouvilleIdentityResult restricted_liouville_identity(const ArithTables& t,
                                                      int64_t x, int64_t H) {
    if (x < 1 || x > t.limit || x > 1'000'000)
        throw std::invalid_argument("restricted_liouville_identity: x out of range");
    if (H < 2) throw std::invalid_argument("restricted_liouville_identity: H < 2");

    // Mertens prefix up to x
    std::vector<int32_t> M(static_cast<size_t>(x) + 1, 0);
    for (int64_t k = 1; k <= x; ++k)
        M[static_cast<size_t>(k)] =
            M[static_cast<size_t>(k - 1)] + t.mu[static_cast<size_t>(k)];

    int64_t mu_rough = 0, lam_rough = 0, conv = 0;
    for (int64_t n = 1; n <= x; ++n) {
        size_t un = static_cast<size_t>(n);
        bool rough = (n == 1) || (t.spf[un] > H); // smallest factor > H
        if (rough) {
            mu_rough += t.mu[un];
            lam_rough += t.lambda[un];
        }
        // H-smooth test: walk the spf chain
        int64_t m = n;
        bool smooth = true;
        while (m > 1) {
            int64_t p = t.spf[static_cast<size_t>(m)];
            if (p > H) { smooth = false; break; }
            while (m % p == 0) m /= p;
        }
        if (smooth) conv += M[static_cast<size_t>(x / n)];
    }

    LiouvilleIdentityResult r;
    r.mobius_restricted = mu_rough;
    r.convolution_side = conv;
    r.liouville_restricted = lam_rough;
    r.gap = std::abs(double(lam_rough - mu_rough));
    r.gap_bound = double(x) / double(H);
    r.identity_holds = (mu_rough == conv);
    r.gap_within_bound = r.gap <= r.gap_bound;
    return r;
}

DivisorMoment divisor_moment(const ArithTables& t, int64_t L, int k) {
    if (L < 1 || L > t.limit)
        throw std::invalid_argument("divisor_moment: L out of table range");
    if (k < 1 || k > 4) throw std::invalid_argument("divisor_moment: k in 1..4");
    KahanSum s;
    for (int64_t n = 1; n <= L; ++n) {
        double tau = t.tau[static_cast<size_t>(n)];
        double v = tau;
        for (int i = 1; i < k; ++i) v *= tau;
        s.add(v);
    }
    double mean = s.value() / double(L);
    double ratio;
    if (L == 1) {
        ratio = mean; // log 1 = 0; record the raw mean
    } else {
        double lg = std::log(double(L));
        ratio = mean / std::pow(lg, double((1 << k) - 1));
    }
    return {mean, ratio};
}

PrimeSeriesConstants prime_series_constants(const ArithTables& t, int64_t cutoff) {
    if (cutoff < 2) throw std::invalid_argument("prime_series_constants: cutoff < 2");
    if (cutoff > t.limit) cutoff = t.limit;
    KahanSum gs, gss;
    for (int64_t p : t.primes) {
        if (p > cutoff) break;
        double lp = std::log(double(p));
        gs.add(lp / (double(p) * double(p) - 1.0));
        gss.add(lp / (double(p) * double(p + 1)));
    }
    PrimeSeriesConstants c;
    c.gamma0 = kEulerGamma;
    c.gamma_star = gs.value();
    c.gamma_double_star = gss.value();
    c.c_prime = c.gamma0 + 2.0 * c.gamma_star - c.gamma_double_star;
    c.prime_cutoff = cutoff;
    return c;
}

} // namespace siegel::arith
