#include "siegel/context.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace siegel::engine {

bool SieveContext::coprime_z0(int64_t m) const {
    if (m == 0) throw std::invalid_argument("coprime_z0: m must be nonzero");
    if (m < 0) m = -m;
    if (z0_primes.empty()) return true;
    // all Z0 members are <= max(D, p0), so only factors in that range matter
    if (tables && m <= tables->limit) {
        while (m > 1) {
            int64_t p = tables->spf[static_cast<size_t>(m)];
            if (prime_in_z0(p)) return false;
            while (m % p == 0) m /= p;
        }
        return true;
    }
    int64_t cap = static_cast<int64_t>(in_z0.size());
    for (int64_t p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        if (prime_in_z0(p)) return false;
        while (m % p == 0) m /= p;
        if (p >= cap && m < cap) break;
    }
    if (m > 1 && prime_in_z0(m)) return false;
    return true;
}

SieveContext build_context(const arith::ArithTables& t,
                           const chars::CharacterTable& table,
                           Z0Variant variant) {
    if (variant == Z0Variant::disabled) return empty_context(t, table);
    int64_t D = table.disc.abs;
    if (D > t.limit)
        throw std::invalid_argument("build_context: D exceeds sieve limit");

    SieveContext ctx;
    ctx.table = table;
    ctx.tables = &t;
    ctx.variant = variant;

    // smallest prime not dividing D
    int64_t p0 = 0;
    for (int64_t p : t.primes) {
        if (D % p != 0) { p0 = p; break; }
    }
    ctx.p0 = p0;
    ctx.p0_bound = 2.0 * std::log(double(D));
    ctx.p0_bound_holds = double(p0) < ctx.p0_bound;

    int64_t cap = std::max(D, p0) + 1;
    ctx.in_z0.assign(static_cast<size_t>(cap), false);
    for (int64_t p : t.primes) {
        if (p > D) break;
        if (table.chi(p) != -1) {
            ctx.z0_primes.push_back(p);
            ctx.in_z0[static_cast<size_t>(p)] = true;
        }
    }
    if (variant == Z0Variant::z0_double_prime && !ctx.prime_in_z0(p0)) {
        ctx.z0_primes.push_back(p0);
        ctx.in_z0[static_cast<size_t>(p0)] = true;
        std::sort(ctx.z0_primes.begin(), ctx.z0_primes.end());
    }

    // spot-check: restricted to squarefree m <= D coprime to Z0, the Moebius
    // function agrees with the character
    std::mt19937_64 rng(static_cast<uint64_t>(D) * 2654435761u + 1);
    std::uniform_int_distribution<int64_t> pick(1, D);
    int checked = 0;
    for (int tries = 0; tries < 4000 && checked < 100; ++tries) {
        int64_t m = pick(rng);
        if (!t.squarefree(m) || !ctx.coprime_z0(m)) continue;
        ++checked;
        if (int(t.mu[static_cast<size_t>(m)]) != table.chi(m))
            throw std::runtime_error("build_context: mu(m) != chi(m) on the sieved set");
    }
    return ctx;
}

SieveContext empty_context(const arith::ArithTables& t,
                           const chars::CharacterTable& table) {
    SieveContext ctx;
    ctx.table = table;
    ctx.tables = &t;
    ctx.variant = Z0Variant::disabled;
    int64_t D = table.disc.abs;
    for (int64_t p : t.primes) {
        if (D % p != 0) { ctx.p0 = p; break; }
    }
    ctx.p0_bound = 2.0 * std::log(double(D));
    ctx.p0_bound_holds = double(ctx.p0) < ctx.p0_bound;
    return ctx;
}

} // namespace siegel::engine
