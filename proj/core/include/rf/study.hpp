#pragma once

#include <string>

#include "rf/models.hpp"

namespace rf {

// s(delta) = floor(s / delta) * delta, the nearest block start at or before s.
double floor_to_block(double s, double delta);

enum class DeltaMode { theory, fixed };

// theory mode: epsilon^{1/(4 beta)} log(1/epsilon), clamped into
// (grid_step, horizon/2]; requires epsilon in (0,1). fixed mode returns
// fixed_value unchanged. grid_step = 0 / horizon = inf disable the clamp.
double delta_schedule(double epsilon, double beta, DeltaMode mode,
                      double fixed_value = 0.0, double grid_step = 0.0,
                      double horizon = std::numeric_limits<double>::infinity(),
                      bool* clamped = nullptr);

// Auxiliary fast process: Euler-Maruyama on the micro grid of w with the
// slow argument frozen at X^eps_{s(delta)} (snapped to macro nodes), driven
// by the same Brownian increments as the coupled run. Returns values at the
// macro nodes.
std::vector<Vec> khasminskii_aux(const SlowFastCoeffs& coeffs,
                                 const std::vector<Vec>& x_path,
                                 const MicroPath& w_micro, double epsilon,
                                 double delta, const Vec& y0);

struct AuxGapSlope {
    std::vector<double> deltas;
    std::vector<double> gaps;  // mean over paths of sup_t |Y - Yhat|^2
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;  // all gaps below noise floor; slope not meaningful
};

// Monte Carlo sweep of the auxiliary-process gap over a delta list at fixed
// epsilon, followed by a log-log regression of the gap on delta.
AuxGapSlope aux_gap_slope(const SlowFastCoeffs& coeffs, const Vec& x0, const Vec& y0,
                          const Grid& grid, int substeps, double epsilon,
                          const std::vector<double>& deltas, int m_mc,
                          std::uint64_t seed, int workers = 1);

struct MDecomposition {
    // Left-point quadrature paths of the four drift-difference integrals:
    //   1: f(X_s, Y_s)        - f(X_{s(d)}, Y_s)
    //   2: f(X_{s(d)}, Y_s)   - f(X_{s(d)}, Yhat_s)
    //   3: f(X_{s(d)}, Yhat_s) - fbar(X_{s(d)})
    //   4: fbar(X_{s(d)})     - fbar(X_s)
    std::vector<Vec> term1, term2, term3, term4;
    double lip1 = 0.0, lip2 = 0.0, lip4 = 0.0;  // Lipschitz norms
    double hoelder3 = 0.0;                      // gamma-Hoelder norm of term 3
};

MDecomposition decompose_M(const SlowFastCoeffs& coeffs, const Grid& grid,
                           const std::vector<Vec>& x_path,
                           const std::vector<Vec>& y_path,
                           const std::vector<Vec>& yhat_path,
                           const std::function<Vec(const Vec&)>& fbar, double delta,
                           double gamma);

struct StudySpec {
    std::string model = "ou_sine";
    std::map<std::string, double> model_params;
    std::vector<double> epsilons;  // descending, values in (0,1]
    double p = 1.0;
    double beta = 0.4;
    int m_mc = 64;
    int macro_steps = 200;  // norm-evaluation grid
    double horizon = 1.0;
    int substeps = 4;  // micro factor inside each dynamics cell
    NoiseKind b_kind = NoiseKind::brownian_strat;
    double hurst = 0.4;  // fbm drivers only
    double c_micro = 0.1;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

struct StudyResult {
    std::vector<double> epsilons;
    std::vector<double> means;    // mean of ||X^eps - Xbar||_beta^p
    std::vector<double> stderrs;
    std::vector<int> n_samples;
    double slope = 0.0;      // fitted d log(mean) / d log(eps)
    double intercept = 0.0;
    double runtime_seconds = 0.0;
    std::vector<std::uint64_t> lift_hashes;  // per seed, shared-B content hash

    std::string to_csv() const;  // epsilon,mean,stderr,n rows at %.17g
};

// For each seed: one B sample shared by the averaged solution and every
// epsilon run; independent w streams per (seed, epsilon). Reductions are
// indexed by seed, so the result is byte-stable for any worker count.
StudyResult convergence_study(const StudySpec& spec);

// Least-squares fit of log(ys) on log(xs); returns {slope, intercept}.
std::pair<double, double> fit_loglog(const std::vector<double>& xs,
                                     const std::vector<double>& ys);

}  // namespace rf
