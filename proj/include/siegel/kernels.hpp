#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "siegel/report.hpp"

namespace siegel::kernels {

// S_n(x) = sum_{k=-n..n} e^{ikx} = sin((n+1/2)x)/sin(x/2), with the removable
// singularity at x = 0 (mod 2pi) set to 2n+1.
double dirichlet_kernel(int64_t n, double x);

// Fourier coefficients of the kappa-th power of the Dirichlet kernel:
// exact integers (kappa-fold self-convolution of the all-ones sequence of
// length 2n+1), stored for l >= 0 only (B is even in l).
struct KernelCoefficients {
    int kappa = 0;
    int64_t n = 0;
    std::vector<mpz_class> coeff;   // B_l, l = 0..kappa*n
    std::vector<double> normalized; // B_l / (2n+1)^kappa
    mpz_class total;                // (2n+1)^kappa

    const mpz_class& B(int64_t l) const;
    double norm(int64_t l) const;
};

KernelCoefficients kernel_coefficients(int kappa, int64_t n);

// The smoothing weights w_k = (2k+1)(B_k - B_{k+1}) / (2n+1)^kappa,
// k = 0..kappa*n: the unique solution of the coefficient-matching system,
// a discrete probability distribution by monotonicity.
struct KernelWeights {
    int kappa = 0;
    int64_t n = 0;
    std::vector<double> w;
    bool exact_mass; // telescoped integer mass equals (2n+1)^kappa exactly
};

KernelWeights kernel_weights(const KernelCoefficients& coeffs);

// kappa-fold convolution power of the uniform density on [-1,1], by the
// alternating-binomial closed form; 0 for |y| > kappa.
double f_kappa_closed(int kappa, double y);

// Numeric convolution oracle on a trapezoid grid (test support).
std::vector<double> f_kappa_grid_oracle(int kappa, double step);

// max_l |n B_l/(2n+1)^kappa - f_kappa(l/n)|, compared at n and 2n: the max
// must at least halve within factor 1.5.
VerificationReport coefficient_density_check(int kappa, int64_t n);

// max_y |f_kappa(y) - N(0, kappa/3) density|; no constant asserted, the
// trend residual(2 kappa) <= residual(kappa) is what the suites check.
double clt_residual(int kappa);

} // namespace siegel::kernels
