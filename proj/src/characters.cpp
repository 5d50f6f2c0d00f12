#include "siegel/characters.hpp"

#include <cmath>
#include <stdexcept>

#include "siegel/summation.hpp"

namespace siegel::chars {

namespace {

int64_t mod_pos(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

int64_t pow_mod(int64_t base, int64_t exp, int64_t mod) {
    unsigned __int128 r = 1, b = static_cast<unsigned __int128>(mod_pos(base, mod));
    while (exp > 0) {
        if (exp & 1) r = r * b % static_cast<unsigned __int128>(mod);
        b = b * b % static_cast<unsigned __int128>(mod);
        exp >>= 1;
    }
    return static_cast<int64_t>(r);
}

// Legendre symbol by Euler's criterion, odd prime p.
int legendre_euler(int64_t a, int64_t p) {
    a = mod_pos(a, p);
    if (a == 0) return 0;
    int64_t e = pow_mod(a, (p - 1) / 2, p);
    return e == 1 ? 1 : -1;
}

} // namespace

bool is_fundamental(const arith::ArithTables& t, int64_t delta) {
    if (delta == 0 || delta == 1) return false;
    int64_t a = delta < 0 ? -delta : delta;
    if (a > t.limit)
        throw std::invalid_argument("is_fundamental: |delta| exceeds table limit");
    if (mod_pos(delta, 4) == 1) return t.squarefree(a);
    if (delta % 4 != 0) return false;
    int64_t q = delta / 4;
    int64_t aq = q < 0 ? -q : q;
    if (mod_pos(q, 4) == 3) return t.squarefree(aq);
    if (q % 2 != 0) return false;
    int64_t r = q / 2; // delta / 8
    int64_t ar = r < 0 ? -r : r;
    return (ar % 2 == 1) && t.squarefree(ar);
}

Discriminant make_discriminant(const arith::ArithTables& t, int64_t delta) {
    if (!is_fundamental(t, delta))
        throw std::invalid_argument("make_discriminant: not a fundamental discriminant");
    Discriminant d;
    d.delta = delta;
    d.abs = delta < 0 ? -delta : delta;
    d.sign = delta < 0 ? -1 : 1;
    return d;
}

int kronecker(int64_t a, int64_t n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int t = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) t = -t;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (a % 2 == 0) return 0;
        int64_t am = mod_pos(a, 8);
        if (am == 3 || am == 5) t = -t;
    }
    a = mod_pos(a, n);
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            int64_t nm = n % 8;
            if (nm == 3 || nm == 5) t = -t;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) t = -t;
        a %= n;
    }
    return n == 1 ? t : 0;
}

int kronecker_componentwise(int64_t delta, int64_t n) {
    if (n == 0) return 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        result = delta < 0 ? -1 : 1; // value at -1 follows the sign of delta
    }
    // totally multiplicative over the prime factorization of n
    for (const auto& [p, e] : arith::factorize(n)) {
        int cp;
        if (p == 2) {
            if (mod_pos(delta, 4) == 0) cp = 0;
            else {
                int64_t dm = mod_pos(delta, 8);
                cp = (dm == 1) ? 1 : -1; // dm == 5 gives -1; dm even excluded above
            }
        } else {
            cp = legendre_euler(delta, p);
        }
        if (cp == 0) return 0;
        if (e % 2 == 1 && cp == -1) result = -result;
    }
    return result;
}

CharacterTable build_character_table(const arith::ArithTables& t, int64_t delta) {
    CharacterTable tab;
    tab.disc = make_discriminant(t, delta);
    int64_t D = tab.disc.abs;
    tab.values.resize(static_cast<size_t>(D));
    tab.prefix.resize(static_cast<size_t>(D) + 1);
    tab.prefix[0] = 0;
    int32_t run = 0;
    int64_t total = 0;
    int32_t max_abs = 0;
    for (int64_t r = 0; r < D; ++r) {
        int v = kronecker(delta, r);
        tab.values[static_cast<size_t>(r)] = static_cast<int8_t>(v);
        if (r >= 1) {
            run += v;
            tab.prefix[static_cast<size_t>(r)] = run;
            total += run;
            if (std::abs(run) > max_abs) max_abs = std::abs(run);
        }
    }
    run += tab.values[0]; // chi(D) = chi(0) = 0
    tab.prefix[static_cast<size_t>(D)] = run;
    total += run;
    if (run != 0)
        throw std::runtime_error("character table: full-period sum is nonzero");
    tab.max_abs_prefix = max_abs;
    tab.prefix_total = total;
    return tab;
}

int64_t char_sum(const CharacterTable& tab, int64_t k) {
    if (k < 0) throw std::invalid_argument("char_sum: k must be >= 0");
    int64_t D = tab.disc.abs;
    // S over any full period vanishes, so only k mod D survives.
    return tab.prefix[static_cast<size_t>(k % D)];
}

double pv_margin(const CharacterTable& tab) {
    double D = double(tab.disc.abs);
    return std::sqrt(D) * std::log(D) - double(tab.max_abs_prefix);
}

std::complex<double> gauss_sum(const CharacterTable& tab) {
    int64_t D = tab.disc.abs;
    KahanSum re, im;
    double w = 2.0 * M_PI / double(D);
    for (int64_t k = 1; k <= D; ++k) {
        int v = tab.values[static_cast<size_t>(k % D)];
        if (!v) continue;
        re.add(v * std::cos(w * double(k)));
        im.add(v * std::sin(w * double(k)));
    }
    return {re.value(), im.value()};
}

std::complex<double> twisted_gauss_sum(const CharacterTable& tab, int64_t r) {
    int64_t D = tab.disc.abs;
    int64_t rr = mod_pos(r, D);
    KahanSum re, im;
    double w = 2.0 * M_PI / double(D);
    for (int64_t k = 1; k <= D; ++k) {
        int v = tab.values[static_cast<size_t>(k % D)];
        if (!v) continue;
        int64_t e = (rr * k) % D;
        re.add(v * std::cos(w * double(e)));
        im.add(v * std::sin(w * double(e)));
    }
    return {re.value(), im.value()};
}

Rational fact4_class_number(const CharacterTable& tab) {
    Rational r{tab.prefix_total, tab.disc.abs};
    if (r.num == 0) { r.den = 1; return r; }
    r.reduce();
    return r;
}

double log_char_sum(const CharacterTable& tab, int64_t X, int power) {
    if (X < 0 || X > 2'000'000'000)
        throw std::invalid_argument("log_char_sum: X out of range");
    if (power != 1 && power != 2)
        throw std::invalid_argument("log_char_sum: power must be 1 or 2");
    int64_t D = tab.disc.abs;
    KahanSum s;
    int64_t r = 1 % D;
    for (int64_t j = 1; j <= X; ++j) {
        int v = tab.values[static_cast<size_t>(r)];
        if (v) {
            double lj = std::log(double(j));
            s.add(power == 1 ? v * lj : v * lj * lj);
        }
        if (++r == D) r = 0;
    }
    return s.value();
}

} // namespace siegel::chars
