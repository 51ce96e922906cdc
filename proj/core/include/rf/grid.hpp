#pragma once

#include <stdexcept>
#include <string>

namespace rf {

// Uniform time grid t_k = k*T/N on [0, T].
class Grid {
public:
    // horizon == 0 with n_steps == 0 denotes the degenerate single-point grid
    // (used as the neutral element of concatenation).
    Grid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
        const bool point = horizon == 0.0 && n_steps == 0;
        if (!point && !(horizon > 0.0))
            throw std::invalid_argument("Grid: horizon must be positive");
        if (!point && n_steps < 1)
            throw std::invalid_argument("Grid: need at least one step");
    }

    double horizon() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    int n_points() const { return n_steps_ + 1; }
    double step() const { return n_steps_ == 0 ? 0.0 : horizon_ / n_steps_; }
    double time(int k) const {
        return n_steps_ == 0 ? 0.0 : horizon_ * static_cast<double>(k) / n_steps_;
    }

    bool operator==(const Grid& o) const {
        return horizon_ == o.horizon_ && n_steps_ == o.n_steps_;
    }

private:
    double horizon_;
    int n_steps_;
};

// Hoelder exponent in (1/3, 1/2], the regularity range the level-2 theory covers.
class HoelderExponent {
public:
    explicit HoelderExponent(double v) : value_(v) {
        if (!(v > 1.0 / 3.0 && v <= 0.5))
            throw std::invalid_argument("HoelderExponent: value " + std::to_string(v) +
                                        " outside (1/3, 1/2]");
    }
    double value() const { return value_; }

private:
    double value_;
};

// The exponent triple beta < alpha < alpha0 used throughout the solvers.
struct HoelderTriple {
    HoelderExponent beta;
    HoelderExponent alpha;
    HoelderExponent alpha0;

    HoelderTriple(double b, double a, double a0)
        : beta(b), alpha(a), alpha0(a0) {
        if (!(b < a && a < a0))
            throw std::invalid_argument("HoelderTriple: need beta < alpha < alpha0");
    }
};

}  // namespace rf
