#pragma once

#include "rf/lifts.hpp"
#include "rf/rde.hpp"

namespace rf {

struct AssumptionMeta {
    double gamma1 = 0.0;  // dissipativity rate, (H6)_q
    double gamma2 = 0.0;  // monotonicity rate, (H7)
    double eta1 = 0.0;
    double eta2 = 0.0;
    double eta3 = 0.0;
    double q = 2.0;
    double r = 0.0;
    double lip_f = 0.0;
    double f_inf = 0.0;
    double sigma_c3b = 0.0;
    double lip_g = 0.0;
    double lip_h = 0.0;
};

// Coefficient quadruple (f, g, h, sigma) of the slow-fast system. sigma
// depends on the slow variable only.
struct SlowFastCoeffs {
    int slow_dim = 0;        // m
    int fast_dim = 0;        // n
    int slow_noise_dim = 0;  // d
    int fast_noise_dim = 0;  // e

    std::function<Vec(const Vec&, const Vec&)> f;      // (x,y) -> R^m
    std::function<Vec(const Vec&, const Vec&)> g;      // (x,y) -> R^n
    std::function<Mat(const Vec&, const Vec&)> h;      // (x,y) -> n x e
    std::function<Mat(const Vec&)> sigma;              // x -> m x d
    std::function<Mat(const Vec&, const Vec&)> sigma_deriv;             // dir in R^m
    std::function<Mat(const Vec&, const Vec&, const Vec&)> h_deriv_x;   // dir in R^m
    std::function<Mat(const Vec&, const Vec&, const Vec&)> h_deriv_y;   // dir in R^n

    AssumptionMeta meta;

    void validate() const;  // enforces q > 2r and shape sanity

    // Spot-checks of (H6)_q / (H7) on a sampled (x, y) cloud; returns the
    // worst slack (negative means a violation beyond the allowed constant).
    double dissipativity_slack(const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                               double envelope_c) const;
    double monotonicity_slack(const std::vector<Vec>& xs, const std::vector<Vec>& y1s,
                              const std::vector<Vec>& y2s) const;
};

struct MicroStepPolicy {
    double c_micro = 0.1;  // requires macro step <= c_micro * epsilon
    bool include_cross_terms = true;  // I[B,W] and W^2 summand terms
};

struct SlowFastSolution {
    double epsilon = 1.0;
    std::vector<Vec> x_path;  // slow values on the macro grid
    std::vector<Vec> y_path;  // fast values on the macro grid
    double max_fast_abs = 0.0;
    double slow_hoelder_beta = 0.0;  // diagnostic estimate at beta = 0.4
};

// F_eps = (f, g/eps), Sigma_eps = diag(sigma, h/sqrt(eps)).
std::pair<Vec, Mat> assemble_blocks(const SlowFastCoeffs& coeffs, double epsilon,
                                    const Vec& z);

// One-step scheme for the coupled system driven by the mixed lift; the fast
// block update carries the I[B,W] and W^2 terms of the modified summand.
SlowFastSolution solve_slow_fast(const SlowFastCoeffs& coeffs, const MixedLift& xi,
                                 double epsilon, const Vec& x0, const Vec& y0,
                                 const MicroStepPolicy& policy = {});

// Drift-side Ito-Stratonovich switch: g~(x,y) = g - lambda grad_y h h <Id_e>.
// Pair with stratonovich_from_ito on the W block of the lift.
SlowFastCoeffs ito_strat_switch(const SlowFastCoeffs& coeffs, double lambda);

// Re-integrates the fast component by Euler-Maruyama on the micro grid with
// the same Brownian increments and the solution's slow path frozen per
// macro cell; returns max_k |Y_k - Y^EM_k| over macro nodes.
double fast_sde_consistency(const SlowFastCoeffs& coeffs,
                            const SlowFastSolution& solution, const MixedLift& xi);

// The slow block as a standalone RDE problem with psi := fast path; used to
// verify the slow-component extraction identity.
VectorFieldSet slow_block_as_rde(const SlowFastCoeffs& coeffs,
                                 const std::vector<Vec>& fast_path);

}  // namespace rf
