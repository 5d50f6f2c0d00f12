#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "siegel/characters.hpp"
#include "siegel/context.hpp"
#include "siegel/lfuncs.hpp"
#include "siegel/quadforms.hpp"

using namespace siegel;

namespace {

const arith::ArithTables& tables() {
    static arith::ArithTables t = arith::build_tables(2'000'000);
    return t;
}

// independent enumeration with the loops the other way around (b outer)
std::set<std::array<int64_t, 3>> forms_oracle(int64_t delta) {
    std::set<std::array<int64_t, 3>> out;
    int64_t D = -delta;
    for (int64_t b = -D; b <= D; ++b) {
        if (((b * b - delta) % 4) != 0) continue;
        for (int64_t a = std::max<int64_t>(1, b < 0 ? -b + 1 : b); 3 * a * a <= D; ++a) {
            if (b < -a + 1 || b > a) continue;
            int64_t num = b * b + D;
            if (num % (4 * a)) continue;
            int64_t c = num / (4 * a);
            if (c < a || (a == c && b < 0)) continue;
            if (std::gcd(std::gcd(a, std::abs(b)), c) != 1) continue;
            out.insert({a, b, c});
        }
    }
    return out;
}

// minimal x^2 - d y^2 = +-4 by brute force over y (oracle for small units)
bool pell4_oracle(int64_t d, int64_t y_cap, int64_t& x_out, int64_t& y_out) {
    for (int64_t y = 1; y <= y_cap; ++y) {
        for (int64_t s : {-4, 4}) {
            __int128 t = (__int128)d * y * y + s;
            if (t < 0) continue;
            int64_t x = (int64_t)std::llround(std::sqrt((double)t));
            for (int64_t xx = std::max<int64_t>(1, x - 2); xx <= x + 2; ++xx)
                if ((__int128)xx * xx == t) { x_out = xx; y_out = y; return true; }
        }
    }
    return false;
}

} // namespace

TEST_CASE("reduced forms: frozen lists and invariants") {
    const auto& t = tables();
    auto d4 = chars::make_discriminant(t, -4);
    auto f4 = quadforms::reduced_forms(d4);
    REQUIRE(f4.size() == 1);
    CHECK(f4[0].a == 1); CHECK(f4[0].b == 0); CHECK(f4[0].c == 1);

    auto d23 = chars::make_discriminant(t, -23);
    auto f23 = quadforms::reduced_forms(d23);
    REQUIRE(f23.size() == 3);
    CHECK(f23[0].a == 1); CHECK(f23[0].b == 1); CHECK(f23[0].c == 6);
    CHECK(f23[1].a == 2); CHECK(f23[1].b == -1); CHECK(f23[1].c == 3);
    CHECK(f23[2].a == 2); CHECK(f23[2].b == 1); CHECK(f23[2].c == 3);

    auto d163 = chars::make_discriminant(t, -163);
    auto f163 = quadforms::reduced_forms(d163);
    REQUIRE(f163.size() == 1);
    CHECK(f163[0].a == 1); CHECK(f163[0].b == 1); CHECK(f163[0].c == 41);

    CHECK(quadforms::class_number_negative(chars::make_discriminant(t, -47)) == 5);

    for (int64_t delta = -3; delta >= -1000; --delta) {
        if (!chars::is_fundamental(t, delta)) continue;
        auto disc = chars::make_discriminant(t, delta);
        auto forms = quadforms::reduced_forms(disc);
        std::set<std::array<int64_t, 3>> got;
        for (const auto& f : forms) {
            REQUIRE(f.b * f.b - 4 * f.a * f.c == delta);
            REQUIRE(f.a > 0);
            REQUIRE(f.c > 0);
            REQUIRE(-f.a < f.b);
            REQUIRE(f.b <= f.a);
            REQUIRE(f.a <= f.c);
            if (f.a == f.c) REQUIRE(f.b >= 0);
            REQUIRE(std::gcd(std::gcd(f.a, std::abs(f.b)), f.c) == 1);
            REQUIRE(3 * f.a * f.a <= disc.abs);
            REQUIRE(4 * f.a * f.c >= disc.abs);
            got.insert({f.a, f.b, f.c});
        }
        REQUIRE(got == forms_oracle(delta)); // loop order does not matter
        REQUIRE(got.size() == forms.size());
    }
}

TEST_CASE("finite class number formula, negative discriminants") {
    const auto& t = tables();
    auto f7 = quadforms::dirichlet_finite_formula_negative(
        chars::build_character_table(t, -7));
    CHECK(f7.num == 1);
    CHECK(f7.den == 1);
    auto f4 = quadforms::dirichlet_finite_formula_negative(
        chars::build_character_table(t, -4));
    CHECK(f4.num == 1); // w-corrected
    auto f3 = quadforms::dirichlet_finite_formula_negative(
        chars::build_character_table(t, -3));
    CHECK(f3.num == 1);

    for (int64_t delta = -3; delta >= -2000; --delta) {
        if (!chars::is_fundamental(t, delta)) continue;
        auto tab = chars::build_character_table(t, delta);
        auto ff = quadforms::dirichlet_finite_formula_negative(tab);
        REQUIRE(ff.den == 1);
        int64_t expect = delta < -4
                             ? quadforms::class_number_negative(tab.disc)
                             : 1;
        REQUIRE(ff.num == expect);
    }
}

TEST_CASE("inverse leading coefficients") {
    const auto& t = tables();
    auto inv = [&](int64_t d) {
        return quadforms::inv_leading_sum(
            quadforms::reduced_forms(chars::make_discriminant(t, d)));
    };
    CHECK(inv(-163) == doctest::Approx(1.0));
    CHECK(inv(-23) == doctest::Approx(2.0));
    CHECK(inv(-4) == doctest::Approx(1.0));
}

TEST_CASE("representation counts") {
    const auto& t = tables();
    auto t5 = chars::build_character_table(t, 5);
    CHECK(quadforms::representation_count(t5, 1) == 1);
    CHECK(quadforms::representation_count(t5, 4) == 1);
    CHECK(quadforms::representation_count(t5, 5) == 1);
    // multiplicative pattern at prime powers: chi(p) = 1 gives k+1 div;
    // chi(p) = -1 alternates 1, 0; chi(p) = 0 stays 1
    auto t13 = chars::build_character_table(t, 13);
    for (int64_t p : {2, 3, 5, 7, 11, 17}) {
        int chi = t13.chi(p);
        int64_t pk = 1;
        for (int k = 1; k <= 4; ++k) {
            pk *= p;
            int64_t expect = chi == 1 ? k + 1 : (chi == 0 ? 1 : (k % 2 == 0 ? 1 : 0));
            REQUIRE(quadforms::representation_count(t13, pk) == expect);
        }
    }
}

TEST_CASE("divisor-sum average against L(1,chi)") {
    const auto& t = tables();
    auto t5 = chars::build_character_table(t, 5);
    auto l5 = lfuncs::l_one(t5, 1e-8);
    auto r = quadforms::lemma61_check(t5, 10'000, l5.value);
    CHECK(r.verdict == VerificationReport::Verdict::pass);

    auto t8 = chars::build_character_table(t, 8);
    auto l8 = lfuncs::l_one(t8, 1e-8);
    auto r8 = quadforms::lemma61_check(t8, 1, l8.value);
    CHECK(r8.verdict == VerificationReport::Verdict::pass);
    CHECK(r8.lhs == 1.0); // R(8;1) = 1

    auto t13 = chars::build_character_table(t, 13);
    auto l13 = lfuncs::l_one(t13, 1e-8);
    CHECK(quadforms::lemma61_check(t13, 100'000, l13.value).verdict ==
          VerificationReport::Verdict::pass);
}

TEST_CASE("squarefree represented: lattice scan") {
    const auto& t = tables();
    auto t4 = chars::build_character_table(t, -4);
    auto r = quadforms::squarefree_represented(t, t4, 20);
    CHECK(r.count == 6); // {1, 2, 5, 10, 13, 17}
    CHECK(r.prime_lower == 3);
    CHECK(r.upper == doctest::Approx(120.0));
    CHECK(r.within_bounds);

    auto t3 = chars::build_character_table(t, -3);
    CHECK(quadforms::squarefree_represented(t, t3, 10).count == 3); // {1, 3, 7}

    auto t7 = chars::build_character_table(t, -7);
    auto r7 = quadforms::squarefree_represented(t, t7, 30);
    CHECK(r7.count == 8);
    CHECK(r7.within_bounds);

    // bounds hold across a small sweep
    for (int64_t delta : {-8, -11, -15, -20, -23, -163}) {
        auto tab = chars::build_character_table(t, delta);
        auto rr = quadforms::squarefree_represented(t, tab, 4 * tab.disc.abs + 40);
        REQUIRE(rr.within_bounds);
    }
}

TEST_CASE("fundamental units from the continued fraction") {
    const auto& t = tables();
    auto u5 = quadforms::fundamental_unit(5);
    CHECK(u5.x == 1); CHECK(u5.y == 1);
    CHECK(u5.log_eta == doctest::Approx(0.481211825060).epsilon(1e-10));
    auto u8 = quadforms::fundamental_unit(8);
    CHECK(u8.x == 2); CHECK(u8.y == 1);
    CHECK(u8.log_eta == doctest::Approx(0.881373587020).epsilon(1e-10));
    auto u13 = quadforms::fundamental_unit(13);
    CHECK(u13.x == 3); CHECK(u13.y == 1);
    CHECK(u13.log_eta == doctest::Approx(1.194763217287).epsilon(1e-10));

    // Pell identity and minimality against the brute-force oracle
    for (int64_t delta = 2; delta <= 500; ++delta) {
        if (!chars::is_fundamental(t, delta)) continue;
        auto u = quadforms::fundamental_unit(delta);
        mpz_class pell = u.x * u.x - delta * u.y * u.y;
        REQUIRE(pell == 4 * u.norm_sign);
        REQUIRE(u.log_eta > 0);
        int64_t xo, yo;
        if (pell4_oracle(delta, 100'000, xo, yo)) {
            if (mpz_cmp_si(u.y.get_mpz_t(), yo) != 0) {
                CAPTURE(delta);
                REQUIRE(u.y == yo);
            }
            REQUIRE(u.x == xo);
        }
    }
    CHECK_THROWS(quadforms::fundamental_unit(-5));
}

TEST_CASE("narrow-window form sums") {
    CHECK(quadforms::narrow_forms_sum(5) == doctest::Approx(0.0)); // A < sqrt(5)/4 empty
    CHECK(quadforms::narrow_forms_sum(40) == doctest::Approx(1.0));
    // A=1: B=1; A=2: B=+-1; A=4: B=+-1; A=5: B=+-1 (hand enumeration)
    CHECK(quadforms::narrow_forms_sum(401) == doctest::Approx(2.9));
    // triple-level oracle with the loops the other way around
    for (int64_t delta : {8, 40, 60, 229, 401, 1021}) {
        double expect = 0.0;
        for (int64_t B = -delta; B <= delta; ++B)
            for (int64_t A = 1; 16 * A * A < delta; ++A) {
                if (B <= -A || B > A) continue;
                if ((((B * B - delta) % (4 * A)) + 4 * A) % (4 * A) == 0)
                    expect += 1.0 / double(A);
            }
        REQUIRE(quadforms::narrow_forms_sum(delta) == doctest::Approx(expect));
    }
}

TEST_CASE("leading-coefficient product bound") {
    const auto& t = tables();
    for (int64_t delta : {-163, -23, -7, -4}) {
        auto tab = chars::build_character_table(t, delta);
        auto ctx = engine::build_context(t, tab, engine::Z0Variant::z0_prime);
        auto forms = quadforms::reduced_forms(tab.disc);
        auto rep = quadforms::fact6_check(tab, forms, ctx);
        REQUIRE(rep.verdict == VerificationReport::Verdict::pass);
        REQUIRE(rep.rhs >= rep.lhs); // the product dominates the form sum
    }
    // below-regime discriminant only reports
    auto t3 = chars::build_character_table(t, -3);
    auto ctx3 = engine::build_context(t, t3, engine::Z0Variant::z0_prime);
    auto rep3 = quadforms::fact6_check(t3, quadforms::reduced_forms(t3.disc), ctx3);
    CHECK(rep3.verdict == VerificationReport::Verdict::report_only);
}
