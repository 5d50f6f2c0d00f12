#pragma once

#include <cstdint>

#include "siegel/characters.hpp"
#include "siegel/context.hpp"
#include "siegel/report.hpp"

namespace siegel::lfuncs {

struct LValue {
    int64_t delta = 0;
    double value = 0.0;
    double tail_bound = 0.0; // guaranteed absolute error, <= requested tol
    int64_t truncation = 0;  // series summed for n <= truncation
};

// Truncated direct series sum chi(n)/n over full periods, with the remainder
// evaluated by second-order partial summation: the block tail carries the
// main term A psi'(K) / D^2, A = sum of one period's prefix sums, plus an
// explicitly bounded rest controlled by max |S|. tol >= 1e-12.
LValue l_one(const chars::CharacterTable& tab, double tol);

// Truncation-gap check for sum chi(n) log n at N Delta vs 2 N Delta
// (delta > 0); the stabilized value estimates -L'(0, chi).
VerificationReport lemma62_convergence(const chars::CharacterTable& tab, int64_t N);

// Same for sum chi(n) log^2 n; estimates L''(0, chi).
VerificationReport lemma64_convergence(const chars::CharacterTable& tab, int64_t N);

struct Fact5Result {
    VerificationReport report; // bound check of the logarithmic character sum
    double lhs = 0.0;          // sum_{j<=X'} chi(j) log j, X' full periods
    double rhs = 0.0;          // -(pi/6) sqrt(D) * sum 1/a
    double stabilization_gap = 0.0; // drift-corrected |T(2X') - T(X') + Abar log 2|
};

// Logarithmic character sum against the reduced-form reciprocal sum, with
// the stated four-term bound. inv_a_sum and h come from the quadforms route.
Fact5Result fact5_check(const chars::CharacterTable& tab, int64_t X,
                        const engine::SieveContext& ctx, double inv_a_sum,
                        int64_t h);

// Report-only: sum chi(j) log^2 j + (pi^2/6) sqrt(D) * (the fact-6 product),
// recorded alongside L(1,chi) sqrt(D) log D and h scales.
VerificationReport lemma65_residual(const chars::CharacterTable& tab, int64_t X,
                                    const engine::SieveContext& ctx,
                                    double l_value, int64_t h);

} // namespace siegel::lfuncs
