#pragma once

#include <cstdint>
#include <vector>

#include "siegel/characters.hpp"

namespace siegel::engine {

enum class Z0Variant { z0_prime, z0_double_prime, disabled };

// The sieved prime set Z0 for a discriminant: all primes p <= D with
// chi(p) != -1 (chi = 0 primes included), optionally extended by p0, the
// smallest prime not dividing D. Represented as a prime set with a
// membership predicate; the literal product is never materialized.
struct SieveContext {
    chars::CharacterTable table;
    const arith::ArithTables* tables = nullptr;
    Z0Variant variant = Z0Variant::z0_prime;
    std::vector<int64_t> z0_primes;
    std::vector<bool> in_z0; // indexed by p <= D (and p0)
    int64_t p0 = 0;
    double p0_bound = 0.0;      // 2 log D
    bool p0_bound_holds = true; // p0 < 2 log D; violations reported, not assumed

    int64_t D() const { return table.disc.abs; }

    bool prime_in_z0(int64_t p) const {
        return p >= 0 && p < static_cast<int64_t>(in_z0.size()) &&
               in_z0[static_cast<size_t>(p)];
    }

    // True iff no prime factor of |m| lies in z0_primes. m == 0 is rejected.
    bool coprime_z0(int64_t m) const;
};

SieveContext build_context(const arith::ArithTables& t,
                           const chars::CharacterTable& table,
                           Z0Variant variant);

// Context with an empty prime set (the classical, unsieved sums). Carries a
// character table only so that D() stays meaningful for callers that want it;
// membership tests always succeed.
SieveContext empty_context(const arith::ArithTables& t,
                           const chars::CharacterTable& table);

} // namespace siegel::engine
