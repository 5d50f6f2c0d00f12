#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace siegel::arith {

// Sieved multiplicative-function tables for 1..limit, built once by a
// linear (smallest-prime-factor) sieve and immutable afterwards.
struct ArithTables {
    int64_t limit = 0;
    std::vector<int8_t> mu;      // Moebius
    std::vector<uint32_t> phi;   // Euler totient
    std::vector<uint32_t> tau;   // divisor count
    std::vector<int8_t> lambda;  // Liouville
    std::vector<uint32_t> spf;   // smallest prime factor (spf[1] = 1)
    std::vector<int64_t> primes;

    bool is_prime(int64_t n) const {
        return n >= 2 && n <= limit && spf[static_cast<size_t>(n)] == n;
    }
    bool squarefree(int64_t n) const { return mu[static_cast<size_t>(n)] != 0; }
};

// limit in [2, 1e8]; the upper guard protects table memory.
ArithTables build_tables(int64_t limit);

// Trial-division factorization, (prime, exponent) pairs. Pure; fine for the
// desk-scale arguments these helpers see.
std::vector<std::pair<int64_t, int>> factorize(int64_t n);

// Largest squarefree divisor of n (product of its distinct primes).
int64_t squarefree_kernel(int64_t n);

// Splits n into (smooth, rough): prime factors <= H with multiplicity,
// and those > H. smooth * rough == n; empty products are 1.
std::pair<int64_t, int64_t> rough_smooth_split(int64_t n, int64_t H);

// Closed form mu(m') phi(m) / phi(m') with m' = m / gcd(n, m); equals the
// exponential sum over residues coprime to m.
int64_t ramanujan_sum(int64_t m, int64_t n);

struct MertensResult {
    int64_t value;  // M(L)
    double bound;   // L exp(-sqrt(log L)/10)
    double margin;  // bound - |M(L)|
};
MertensResult mertens(const ArithTables& t, int64_t L);

struct LiouvilleIdentityResult {
    int64_t mobius_restricted;   // sum of mu(n) over H-rough n <= x
    int64_t convolution_side;    // sum over H-smooth m <= x of M(floor(x/m))
    int64_t liouville_restricted;
    double gap;                  // |restricted lambda-sum - mu-sum|
    double gap_bound;            // x / H
    bool identity_holds;
    bool gap_within_bound;
};
// Inclusion-exclusion identity for the restricted Moebius sum plus the
// lambda-vs-mu tail bound. Exact integer equality.
LiouvilleIdentityResult restricted_liouville_identity(const ArithTables& t,
                                                      int64_t x, int64_t H);

struct DivisorMoment {
    double mean;             // (1/L) sum tau^k(n)
    double log_power_ratio;  // mean / (log L)^(2^k - 1), trend only
};
DivisorMoment divisor_moment(const ArithTables& t, int64_t L, int k);

struct PrimeSeriesConstants {
    double gamma0;            // Euler's constant
    double gamma_star;        // sum log p / (p^2 - 1), partial
    double gamma_double_star; // sum log p / (p (p+1)), partial
    double c_prime;           // gamma0 + 2 gamma_star - gamma_double_star
    int64_t prime_cutoff;
};
PrimeSeriesConstants prime_series_constants(const ArithTables& t, int64_t cutoff);

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

} // namespace siegel::arith
