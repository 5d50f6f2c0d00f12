#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "siegel/characters.hpp"
#include "siegel/context.hpp"
#include "siegel/report.hpp"

namespace siegel::quadforms {

// Primitive reduced form (a,b,c) of negative discriminant:
// b^2 - 4ac = delta, a > 0, c > 0, -a < b <= a <= c, b >= 0 if a == c.
struct ReducedForm {
    int64_t a, b, c;
};

// Complete list for delta < 0, ordered by (a, b); length == h(delta).
std::vector<ReducedForm> reduced_forms(const chars::Discriminant& disc);

int64_t class_number_negative(const chars::Discriminant& disc);

// Exact rational -(w/2/|delta|) sum n chi(n); equals h(delta) for
// delta < -4 and 1 for delta in {-3, -4} after the w correction.
chars::Rational dirichlet_finite_formula_negative(const chars::CharacterTable& tab);

// eta = (x + y sqrt(delta))/2 with x^2 - delta y^2 = 4 * norm_sign, minimal.
struct FundamentalUnit {
    mpz_class x, y;
    int norm_sign = 1;
    double log_eta = 0.0;
};

// Continued-fraction solution of x^2 - delta y^2 = +-4 for fundamental
// delta > 0 (half-integer units included via the exact cube-root descent).
FundamentalUnit fundamental_unit(int64_t delta);

// -(1/log eta) sum chi(n) log sin(pi n / delta); returns 2h at every checked
// delta (printed-convention factor; see class_number_positive).
double dirichlet_finite_formula_positive(const chars::CharacterTable& tab,
                                         const FundamentalUnit& unit);

// Finite-formula route: round(F/2) with an integrality check.
int64_t class_number_positive(const chars::CharacterTable& tab,
                              const FundamentalUnit& unit);

// sum over reduced forms of 1/a.
double inv_leading_sum(const std::vector<ReducedForm>& forms);

// R(delta; n) = sum_{m | n} chi(m), for delta > 0.
int64_t representation_count(const chars::CharacterTable& tab, int64_t n);

// sum of 1/A over integer triples (A,B,C), B^2 - 4AC = delta,
// -A < B <= A < sqrt(delta)/4, C integral.
double narrow_forms_sum(int64_t delta);

struct SquarefreeRepresented {
    int64_t count = 0;        // squarefree n <= N represented by some form
    int64_t prime_lower = 0;  // #{p <= N : chi(p) = 1}
    double upper = 0.0;       // 12 h N / sqrt(D)
    bool within_bounds = false;
};
// Exhaustive lattice scan over the (x, y) ranges of the form's completed
// square; dedup across forms via a bitset over n <= N.
SquarefreeRepresented squarefree_represented(const arith::ArithTables& t,
                                             const chars::CharacterTable& tab,
                                             int64_t N);

// 0 <= prod_{p in Z0, chi(p) != -1} (p+1)/(p-1) * prod_{p|D} (p-1)/p - sum 1/a
// within the stated three-term error; report_only below regime (D < 4).
VerificationReport fact6_check(const chars::CharacterTable& tab,
                               const std::vector<ReducedForm>& forms,
                               const engine::SieveContext& ctx);

// |sum_{n<=N} R(delta;n) - L(1,chi) N| <= 4 sqrt(N) delta^{1/4} sqrt(log delta).
// l_value must carry tail error <= 1e-8.
VerificationReport lemma61_check(const chars::CharacterTable& tab, int64_t N,
                                 double l_value);

} // namespace siegel::quadforms
