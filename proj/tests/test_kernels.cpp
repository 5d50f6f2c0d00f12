#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "siegel/kernels.hpp"

using namespace siegel;

TEST_CASE("dirichlet kernel: closed form vs direct cosine sum") {
    CHECK(kernels::dirichlet_kernel(0, 0.37) == doctest::Approx(1.0));
    CHECK(kernels::dirichlet_kernel(2, 0.0) == doctest::Approx(5.0));
    // direct 7-term sum at x = 1
    double direct = 1.0;
    for (int k = 1; k <= 3; ++k) direct += 2.0 * std::cos(k * 1.0);
    CHECK(std::abs(kernels::dirichlet_kernel(3, 1.0) - direct) < 1e-12);
    // periodicity point
    CHECK(kernels::dirichlet_kernel(4, 2.0 * M_PI) == doctest::Approx(9.0));
    for (int n = 0; n <= 6; ++n)
        for (double x = -3.0; x <= 3.0; x += 0.17) {
            double d = 1.0;
            for (int k = 1; k <= n; ++k) d += 2.0 * std::cos(k * x);
            REQUIRE(std::abs(kernels::dirichlet_kernel(n, x) - d) < 1e-10);
        }
}

TEST_CASE("kernel coefficients: frozen sequences") {
    auto k22 = kernels::kernel_coefficients(2, 2);
    const int64_t fejer[] = {5, 4, 3, 2, 1}; // l = 0..4
    for (int64_t l = 0; l <= 4; ++l) REQUIRE(k22.B(l) == fejer[l]);
    REQUIRE(k22.B(-3) == 2); // symmetry
    REQUIRE(k22.B(5) == 0);

    auto k13 = kernels::kernel_coefficients(1, 3);
    for (int64_t l = -3; l <= 3; ++l) REQUIRE(k13.B(l) == 1);

    auto k31 = kernels::kernel_coefficients(3, 1);
    const int64_t cube[] = {7, 6, 3, 1}; // of [1,3,6,7,6,3,1]
    for (int64_t l = 0; l <= 3; ++l) REQUIRE(k31.B(l) == cube[l]);
}

TEST_CASE("kernel coefficients: symmetry, monotonicity, mass") {
    for (int ka = 1; ka <= 8; ++ka) {
        for (int64_t n : {1, 2, 5, 16, 64, 256}) {
            auto kc = kernels::kernel_coefficients(ka, n);
            mpz_class mass = kc.B(0);
            for (int64_t l = 1; l <= int64_t(ka) * n; ++l) {
                REQUIRE(kc.B(l - 1) >= kc.B(l));
                REQUIRE(kc.B(l) >= 0);
                mass += 2 * kc.B(l);
            }
            REQUIRE(mass == kc.total);
            // Fejer case has the exact triangular coefficients
            if (ka == 2)
                for (int64_t l = 0; l <= 2 * n; ++l)
                    REQUIRE(kc.B(l) == 2 * n + 1 - l);
        }
    }
}

TEST_CASE("fejer expansion of the squared kernel") {
    for (int64_t n = 1; n <= 8; ++n) {
        auto kc = kernels::kernel_coefficients(2, n);
        for (int i = 0; i < 100; ++i) {
            double x = 0.011 + 6.2 * i / 100.0;
            double lhs = 0.0;
            for (int64_t l = -2 * n; l <= 2 * n; ++l)
                lhs += kc.B(l).get_d() * std::cos(l * x);
            double s = kernels::dirichlet_kernel(n, x);
            REQUIRE(std::abs(lhs - s * s) < 1e-9 * (2 * n + 1) * (2 * n + 1));
        }
    }
}

TEST_CASE("weights: frozen values, mass, reconstruction") {
    auto w11 = kernels::kernel_weights(kernels::kernel_coefficients(1, 1));
    REQUIRE(w11.w.size() == 2);
    CHECK(w11.w[0] == doctest::Approx(0.0));
    CHECK(w11.w[1] == doctest::Approx(1.0));

    auto w21 = kernels::kernel_weights(kernels::kernel_coefficients(2, 1));
    REQUIRE(w21.w.size() == 3);
    CHECK(w21.w[0] == doctest::Approx(1.0 / 9.0));
    CHECK(w21.w[1] == doctest::Approx(3.0 / 9.0));
    CHECK(w21.w[2] == doctest::Approx(5.0 / 9.0));

    for (int ka = 1; ka <= 8; ++ka)
        for (int64_t n : {1, 3, 8, 64, 256}) {
            auto kw = kernels::kernel_weights(kernels::kernel_coefficients(ka, n));
            REQUIRE(kw.exact_mass); // telescoped integer mass, exact
            for (double w : kw.w) REQUIRE(w >= 0.0);
        }

    // reconstruction: weighted average of S_k/(2k+1) equals the power
    for (int ka = 1; ka <= 5; ++ka) {
        for (int64_t n = 1; n <= 8; ++n) {
            auto kw = kernels::kernel_weights(kernels::kernel_coefficients(ka, n));
            for (int i = 0; i < 100; ++i) {
                double x = 0.013 + 6.2 * i / 100.0;
                double lhs = 0.0;
                for (int64_t k = 0; k <= int64_t(ka) * n; ++k)
                    lhs += kw.w[k] * kernels::dirichlet_kernel(k, x) / double(2 * k + 1);
                double rhs = 1.0, base = kernels::dirichlet_kernel(n, x) / double(2 * n + 1);
                for (int j = 0; j < ka; ++j) rhs *= base;
                REQUIRE(std::abs(lhs - rhs) < 1e-9);
            }
        }
    }
}

TEST_CASE("convolution-power density: closed form") {
    CHECK(kernels::f_kappa_closed(2, 0.0) == doctest::Approx(0.5));
    CHECK(kernels::f_kappa_closed(3, 0.0) == doctest::Approx(3.0 / 8.0));
    CHECK(kernels::f_kappa_closed(3, 1.0) == doctest::Approx(0.25));
    // both branch formulas agree at the seam y = 1
    CHECK(kernels::f_kappa_closed(3, 1.0 - 1e-9) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(kernels::f_kappa_closed(3, 1.0 + 1e-9) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(kernels::f_kappa_closed(2, 2.5) == 0.0);
    CHECK(kernels::f_kappa_closed(4, -4.5) == 0.0);
    // triangular (roof) shape for kappa = 2
    for (double y = 0.0; y <= 2.0; y += 0.1)
        REQUIRE(kernels::f_kappa_closed(2, y) == doctest::Approx(0.5 - y / 4.0));
}

TEST_CASE("closed form vs numeric convolution, and unit mass") {
    for (int ka = 2; ka <= 10; ++ka) {
        double step = 1e-3;
        // unit mass by composite trapezoid
        int64_t half = (int64_t)std::llround(ka / step);
        double mass = 0.0;
        for (int64_t i = -half; i < half; ++i)
            mass += 0.5 * step * (kernels::f_kappa_closed(ka, i * step) +
                                  kernels::f_kappa_closed(ka, (i + 1) * step));
        REQUIRE(std::abs(mass - 1.0) < 1e-6);
        if (ka > 6) continue; // oracle grid below
        auto grid = kernels::f_kappa_grid_oracle(ka, step);
        double worst = 0.0;
        for (int64_t i = -half; i <= half; ++i)
            worst = std::max(worst, std::abs(grid[i + half] -
                                             kernels::f_kappa_closed(ka, i * step)));
        REQUIRE(worst < 1e-6);
    }
}

TEST_CASE("coefficient density trend") {
    auto r2 = kernels::coefficient_density_check(2, 64);
    CHECK(r2.verdict == VerificationReport::Verdict::pass);
    auto r3 = kernels::coefficient_density_check(3, 128);
    CHECK(r3.verdict == VerificationReport::Verdict::pass);
    // algebra at l = 0, kappa = 2: |n(2n+1)/(2n+1)^2 - 1/2| = O(1/n)
    for (int64_t n : {16, 64, 256}) {
        auto kc = kernels::kernel_coefficients(2, n);
        double dev = std::abs(double(n) * kc.norm(0) - 0.5);
        REQUIRE(dev <= 1.0 / double(n));
    }
}

TEST_CASE("gaussian limit trend") {
    double r2 = kernels::clt_residual(2);
    // residual at y = 0 is |1/2 - 1/sqrt(2 pi * 2/3)|
    double at0 = std::abs(0.5 - 1.0 / std::sqrt(2.0 * M_PI * 2.0 / 3.0));
    CHECK(r2 >= at0 - 1e-12);
    double r4 = kernels::clt_residual(4);
    double r8 = kernels::clt_residual(8);
    CHECK(r4 < r2);
    CHECK(r8 < r4);
}
