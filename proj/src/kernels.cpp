#include "siegel/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "siegel/summation.hpp"

namespace siegel::kernels {

double dirichlet_kernel(int64_t n, double x) {
    if (n < 0) throw std::invalid_argument("dirichlet_kernel: n >= 0");
    double s = std::sin(x / 2.0);
    if (std::abs(s) < 1e-9) {
        // near the removable singularity the cosine sum is the stable route
        double v = 1.0;
        for (int64_t k = 1; k <= n; ++k) v += 2.0 * std::cos(k * x);
        return v;
    }
    return std::sin((double(n) + 0.5) * x) / s;
}

const mpz_class& KernelCoefficients::B(int64_t l) const {
    static const mpz_class zero = 0;
    if (l < 0) l = -l;
    if (l > int64_t(kappa) * n) return zero;
    return coeff[static_cast<size_t>(l)];
}

double KernelCoefficients::norm(int64_t l) const {
    if (l < 0) l = -l;
    if (l > int64_t(kappa) * n) return 0.0;
    return normalized[static_cast<size_t>(l)];
}

KernelCoefficients kernel_coefficients(int kappa, int64_t n) {
    if (kappa < 1 || kappa > 10 || n < 1)
        throw std::invalid_argument("kernel_coefficients: kappa in 1..10, n >= 1");
    if (int64_t(kappa) * n > 2'000'000)
        throw std::invalid_argument("kernel_coefficients: kappa*n too large");

    // kappa-fold self-convolution of the all-ones window of length 2n+1,
    // as a sliding window sum per stage. cur[i] holds the coefficient of
    // e^{i(l)x} for l = i - offset, offset = stage*n.
    std::vector<mpz_class> cur(1, 1); // kappa = 0: the constant 1
    for (int stage = 1; stage <= kappa; ++stage) {
        int64_t old_half = int64_t(stage - 1) * n;
        int64_t new_half = int64_t(stage) * n;
        std::vector<mpz_class> next(static_cast<size_t>(2 * new_half + 1));
        // prefix sums of cur
        std::vector<mpz_class> pre(cur.size() + 1);
        pre[0] = 0;
        for (size_t i = 0; i < cur.size(); ++i) pre[i + 1] = pre[i] + cur[i];
        for (int64_t l = -new_half; l <= new_half; ++l) {
            // sum of cur over indices [l-n, l+n] in old coordinates
            int64_t lo = std::max(l - n, -old_half) + old_half;
            int64_t hi = std::min(l + n, old_half) + old_half;
            if (lo > hi) continue;
            next[static_cast<size_t>(l + new_half)] =
                pre[static_cast<size_t>(hi + 1)] - pre[static_cast<size_t>(lo)];
        }
        cur = std::move(next);
    }

    KernelCoefficients kc;
    kc.kappa = kappa;
    kc.n = n;
    int64_t half = int64_t(kappa) * n;
    kc.coeff.resize(static_cast<size_t>(half) + 1);
    for (int64_t l = 0; l <= half; ++l)
        kc.coeff[static_cast<size_t>(l)] = cur[static_cast<size_t>(l + half)];
    mpz_class tot = 2 * n + 1;
    mpz_pow_ui(kc.total.get_mpz_t(), tot.get_mpz_t(), static_cast<unsigned long>(kappa));
    kc.normalized.resize(kc.coeff.size());
    mpf_class ftot(kc.total, 256);
    for (size_t i = 0; i < kc.coeff.size(); ++i) {
        mpf_class r(kc.coeff[i], 256);
        r /= ftot;
        kc.normalized[i] = r.get_d();
    }
    return kc;
}

KernelWeights kernel_weights(const KernelCoefficients& coeffs) {
    int64_t half = int64_t(coeffs.kappa) * coeffs.n;
    KernelWeights kw;
    kw.kappa = coeffs.kappa;
    kw.n = coeffs.n;
    kw.w.resize(static_cast<size_t>(half) + 1);
    mpz_class mass = 0;
    mpf_class ftot(coeffs.total, 256);
    for (int64_t k = 0; k <= half; ++k) {
        mpz_class diff = coeffs.B(k) - coeffs.B(k + 1);
        if (diff < 0)
            throw std::runtime_error("kernel_weights: monotonicity violated");
        mpz_class num = (2 * k + 1) * diff;
        mass += num;
        mpf_class r(num, 256);
        r /= ftot;
        kw.w[static_cast<size_t>(k)] = r.get_d();
    }
    kw.exact_mass = (mass == coeffs.total); // telescoped mass, exact in integers
    return kw;
}

double f_kappa_closed(int kappa, double y) {
    if (kappa < 2 || kappa > 12)
        throw std::invalid_argument("f_kappa_closed: kappa in 2..12");
    y = std::abs(y);
    if (y > double(kappa)) return 0.0;
    int jmax = static_cast<int>(std::floor((double(kappa) + y) / 2.0));
    if (jmax > kappa) jmax = kappa;
    double binom = 1.0; // C(kappa, j)
    double sum = 0.0;
    for (int j = 0; j <= jmax; ++j) {
        double base = double(kappa) + y - 2.0 * double(j);
        if (base > 0) {
            double term = binom * std::pow(base, double(kappa - 1));
            sum += (j % 2 == 0) ? term : -term;
        }
        binom = binom * double(kappa - j) / double(j + 1);
    }
    double fact = 1.0;
    for (int i = 2; i < kappa; ++i) fact *= double(i);
    return sum / (std::pow(2.0, double(kappa)) * fact);
}

std::vector<double> f_kappa_grid_oracle(int kappa, double step) {
    // grid over [-kappa, kappa]; convolve g_{k+1}(y) = (1/2) int_{y-1}^{y+1} g_k.
    // The first step integrates the uniform density exactly (its prefix is a
    // clamp); the trapezoid rule would be O(step) across the jump. Later
    // stages are continuous and the trapezoid prefix is O(step^2).
    int64_t half = static_cast<int64_t>(std::llround(double(kappa) / step));
    int64_t total = 2 * half + 1;
    auto idx = [&](int64_t i) { return static_cast<size_t>(i + half); };
    std::vector<double> g(static_cast<size_t>(total), 0.0);
    auto uniform_prefix = [](double x) {
        if (x <= -1.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return (x + 1.0) / 2.0;
    };
    for (int64_t i = -half; i <= half; ++i) {
        double y = double(i) * step;
        g[idx(i)] = 0.5 * (uniform_prefix(y + 1.0) - uniform_prefix(y - 1.0));
    }

    int64_t one = static_cast<int64_t>(std::llround(1.0 / step));
    for (int stage = 3; stage <= kappa; ++stage) {
        // trapezoid prefix integral of g
        std::vector<double> G(static_cast<size_t>(total), 0.0);
        for (int64_t i = 1; i < total; ++i)
            G[static_cast<size_t>(i)] = G[static_cast<size_t>(i - 1)] +
                0.5 * step * (g[static_cast<size_t>(i - 1)] + g[static_cast<size_t>(i)]);
        auto Gat = [&](int64_t i) {
            if (i < 0) return 0.0;
            if (i >= total) return G[static_cast<size_t>(total - 1)];
            return G[static_cast<size_t>(i)];
        };
        std::vector<double> next(static_cast<size_t>(total), 0.0);
        for (int64_t i = -half; i <= half; ++i)
            next[idx(i)] = 0.5 * (Gat(i + half + one) - Gat(i + half - one));
        g = std::move(next);
    }
    return g;
}

VerificationReport coefficient_density_check(int kappa, int64_t n) {
    if (n < 16) throw std::invalid_argument("coefficient_density_check: n >= 16");
    auto dev = [&](int64_t m) {
        auto kc = kernel_coefficients(kappa, m);
        double worst = 0.0;
        for (int64_t l = 0; l <= int64_t(kappa) * m; ++l) {
            double d = std::abs(double(m) * kc.norm(l) -
                                f_kappa_closed(kappa, double(l) / double(m)));
            if (d > worst) worst = d;
        }
        return worst;
    };
    double d1 = dev(n), d2 = dev(2 * n);
    double margin = 0.75 * d1 - d2; // halving within factor 1.5
    return make_report("kernel.density",
                       {{"kappa", std::to_string(kappa)}, {"n", std::to_string(n)}},
                       d1, d2, 0.75 * d1, margin, verdict_from_margin(margin));
}

double clt_residual(int kappa) {
    double sigma2 = double(kappa) / 3.0;
    double worst = 0.0;
    for (double y = 0.0; y <= double(kappa) + 1e-12; y += 0.01) {
        double gauss = std::exp(-y * y / (2.0 * sigma2)) /
                       std::sqrt(2.0 * M_PI * sigma2);
        double d = std::abs(f_kappa_closed(kappa, y) - gauss);
        if (d > worst) worst = d;
    }
    return worst;
}

} // namespace siegel::kernels
