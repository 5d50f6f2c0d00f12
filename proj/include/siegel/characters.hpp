#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include "siegel/arith.hpp"

namespace siegel::chars {

// A validated fundamental discriminant.
struct Discriminant {
    int64_t delta = 0;
    int64_t abs = 0;
    int sign = 0; // +1 or -1
};

struct Rational {
    int64_t num = 0;
    int64_t den = 1;
    void reduce() {
        int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    bool is_integer() const { return den == 1; }
    double value() const { return double(num) / double(den); }
};

// True iff delta is a fundamental discriminant: delta = 1 (mod 4) squarefree,
// or delta/4 = 3 (mod 4) squarefree, or delta/8 odd squarefree. delta = 1 is
// rejected (trivial character). Needs squarefree tests up to |delta|.
bool is_fundamental(const arith::ArithTables& t, int64_t delta);

// Throws std::invalid_argument when delta is not fundamental or exceeds the
// table limit.
Discriminant make_discriminant(const arith::ArithTables& t, int64_t delta);

// Kronecker symbol (delta / n) by the reciprocity recursion.
int kronecker(int64_t delta, int64_t n);

// Independent evaluation from the componentwise rules: Legendre symbol via
// Euler's criterion at odd primes, the mod-8 rule at 2, the sign rule at -1,
// extended totally multiplicatively. Cross-check oracle for kronecker().
int kronecker_componentwise(int64_t delta, int64_t n);

// One full period of chi plus prefix sums S(k) = sum_{j<=k} chi(j).
struct CharacterTable {
    Discriminant disc;
    std::vector<int8_t> values;  // chi(0..D-1)
    std::vector<int32_t> prefix; // S(0..D); S(D) == 0
    int32_t max_abs_prefix = 0;  // max over 1<=k<=D of |S(k)|
    int64_t prefix_total = 0;    // sum_{k=1..D} S(k)

    int chi(int64_t n) const {
        int64_t d = disc.abs;
        int64_t r = n % d;
        if (r < 0) r += d;
        return values[static_cast<size_t>(r)];
    }
};

CharacterTable build_character_table(const arith::ArithTables& t, int64_t delta);

// S(k) for arbitrary k >= 0, reduced by periodicity.
int64_t char_sum(const CharacterTable& tab, int64_t k);

// sqrt(D) log D - max |S(k)|; nonnegative whenever Polya-Vinogradov holds.
double pv_margin(const CharacterTable& tab);

std::complex<double> gauss_sum(const CharacterTable& tab);
std::complex<double> twisted_gauss_sum(const CharacterTable& tab, int64_t r);

// (1/D) sum_{k=1..D} S(k) as an exact rational. Equals h for delta < -4 and
// 0 for delta > 0.
Rational fact4_class_number(const CharacterTable& tab);

// Streamed sum of chi(j) log^power(j) for j <= X, compensated accumulation.
double log_char_sum(const CharacterTable& tab, int64_t X, int power);

} // namespace siegel::chars
