#pragma once

#include "rf/integral.hpp"

namespace rf {

// Numerical surrogate for the explosion time: a state beyond this bound or
// a non-finite entry aborts the solve.
inline constexpr double kBlowupThreshold = 1e12;

struct ExplosionError : std::runtime_error {
    ExplosionError(const std::string& what, int idx)
        : std::runtime_error(what + " (first bad index " + std::to_string(idx) + ")"),
          index(idx) {}
    int index;
};

// Coefficients of dY = f(Y, psi) dt + sigma(Y) dX plus the assumption
// metadata the diagnostics need.
struct VectorFieldSet {
    int state_dim = 0;  // W
    int noise_dim = 0;  // V

    std::function<Mat(const Vec&)> sigma;                      // state -> state x noise
    std::function<Mat(const Vec&, const Vec&)> sigma_deriv;    // directional derivative
    std::function<Mat(const Vec&, const Vec&, const Vec&)> sigma_deriv2;  // optional

    std::function<Vec(const Vec&, const Vec&)> drift;  // f(y, psi); psi may be empty
    std::vector<Vec> psi;                              // grid samples, empty if absent

    // metadata (H1/H2-style flags)
    double lip_f = 0.0;
    double f_inf = 0.0;
    double sigma_c3b = 0.0;
    bool flag_c3b = false;
    bool flag_f_bounded_lipschitz = false;

    double bound_constant() const { return std::max({sigma_c3b, f_inf, lip_f}); }
    const Vec& psi_at(int k) const;
};

// y + f(y, psi) dt + sigma(y) x1 + (grad sigma . sigma)(y) <x2>
Vec rough_euler_step(const Vec& y, const VectorFieldSet& vfs, const Vec& x1,
                     const Mat& x2, double dt, const Vec& psi);

// One-step scheme over the grid; the returned path carries Gubinelli
// derivative sigma(Y_k) at every node.
GridControlledPath solve_rde(const VectorFieldSet& vfs, RoughPathPtr rp, const Vec& xi);

// Windowed Picard fixed-point reference solver. Window length follows the
// contraction estimate {8 kappa_beta (K+1)^3 (|||X|||_alpha + 1)^3}^{-1/(alpha-beta)}.
// `iteration_gaps`, when given, records the sup-change per iteration per window.
GridControlledPath solve_rde_picard(const VectorFieldSet& vfs, RoughPathPtr rp,
                                    const Vec& xi, double beta, double tol,
                                    int max_iter,
                                    std::vector<std::vector<double>>* iteration_gaps = nullptr);

// (||sigma|| |||X|||)^{1/beta} + ||sigma|| |||X||| + ||f||_inf; the
// multiplicative constant is existence-only and must be envelope-fitted.
double apriori_bracket(const VectorFieldSet& vfs, const GridRoughPath& rp, double beta,
                       long pair_budget = kDefaultPairBudget);

struct StabilityGap {
    std::vector<Vec> m_path;  // defect path M on the grid
    double gap_norm;          // ||Y - Ytilde||_beta
    double m_norm;            // ||M||_{2 beta}
    double exp_bracket;       // exp(|||X|||_alpha^nu)
};

// Solves both RDEs (shared sigma, X, xi; drifts f vs ftilde) and evaluates
// the defect M_t = (Y - Y~)_t - int {g(Y)-g(Y~)} ds - int {sigma(Y)-sigma(Y~)} dX.
StabilityGap stability_gap(const VectorFieldSet& vfs_f, const VectorFieldSet& vfs_ftilde,
                           const SmoothMap& g, RoughPathPtr rp, const Vec& xi,
                           double beta, double nu = 3.0,
                           long pair_budget = kDefaultPairBudget);

}  // namespace rf
