#pragma once

#include <cmath>

namespace siegel {

// Neumaier-compensated accumulator. All real sums longer than a few
// thousand terms go through this; the suite tolerances assume it.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Relative agreement with an absolute floor; the standard identity
// tolerance used across the engine suites.
inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
    double scale = std::max({std::abs(a), std::abs(b), abs_floor / rel});
    return std::abs(a - b) <= rel * scale;
}

} // namespace siegel
