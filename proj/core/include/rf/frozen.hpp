#pragma once

#include <optional>

#include "rf/slow_fast.hpp"

namespace rf {

// Analytic descriptors registered for benchmark models.
struct FrozenClosedForm {
    std::function<Vec(const Vec&)> fbar;
    std::function<Vec(const Vec&)> invariant_mean;   // optional
    std::function<Mat(const Vec&)> invariant_cov;    // optional
};

// The fast equation with the slow variable frozen:
// dY = g(x, Y) dt + h(x, Y) dw.
struct FrozenModel {
    int slow_dim = 0;
    int fast_dim = 0;
    int fast_noise_dim = 0;
    std::function<Vec(const Vec&, const Vec&)> f;  // slow drift, averaged over mu^x
    std::function<Vec(const Vec&, const Vec&)> g;
    std::function<Mat(const Vec&, const Vec&)> h;
    AssumptionMeta meta;
    std::optional<FrozenClosedForm> closed_form;
};

FrozenModel frozen_model(const SlowFastCoeffs& coeffs,
                         std::optional<FrozenClosedForm> closed_form = std::nullopt);

// Euler-Maruyama path at nodes k * h_step, k = 0..floor(T/h).
std::vector<Vec> solve_frozen(const FrozenModel& model, const Vec& x, const Vec& y0,
                              double t_long, double h_step, std::uint64_t seed,
                              std::uint64_t stream_id = 0);

// Synchronously coupled pair; returns the estimate of E|Y^{x,y1}_t - Y^{x,y2}_t|^2
// at the requested times.
std::vector<double> contraction_check(const FrozenModel& model, const Vec& x,
                                      const Vec& y1, const Vec& y2,
                                      const std::vector<double>& times, int n_seeds,
                                      double h_step, std::uint64_t seed);

enum class AvgMethod { closed_form, ergodic_average, endpoint_mc };

struct AveragingBudget {
    double t_long = 200.0;   // ergodic horizon
    double t_burn = 10.0;    // ergodic burn-in
    double t_mix = 10.0;     // endpoint horizon
    double h_step = 1e-2;
    int n_seeds = 4096;      // endpoint paths
    std::uint64_t seed = 0;
    double tolerance = 0.0;  // 0 disables the budget check
    Vec y0;                  // start point; zero vector when empty
};

struct AvgEstimate {
    Vec value;
    double std_error = 0.0;
    bool within_tolerance = true;  // false when the error estimate exceeds budget.tolerance
};

// f_bar(x) = int f(x, y) mu^x(dy) by the chosen method.
AvgEstimate averaged_drift(const FrozenModel& model, const Vec& x, AvgMethod method,
                           const AveragingBudget& budget);

// Long-run estimate of the q-th absolute moment of the invariant law.
double invariant_moment(const FrozenModel& model, const Vec& x, double q,
                        const AveragingBudget& budget);

// E|Y_t|^q along the transient, for envelope checks against
// e^{-t q gamma1/4} |y0|^q + C_q (1 + |x|^{q eta3/2}).
std::vector<double> transient_moment_curve(const FrozenModel& model, const Vec& x,
                                           const Vec& y0, double q,
                                           const std::vector<double>& times, int n_seeds,
                                           double h_step, std::uint64_t seed);

// |P^x_t phi(y) - mu^x(phi)| on the time grid; mu^x(phi) estimated by the
// ergodic average unless supplied.
std::vector<double> mixing_decay_check(const FrozenModel& model, const Vec& x,
                                       const Vec& y,
                                       const std::function<double(const Vec&)>& phi,
                                       const std::vector<double>& times,
                                       const AveragingBudget& budget,
                                       std::optional<double> mu_phi = std::nullopt);

// E | int_0^t (f(x, Y_s) - fbar(x)) ds |^2 curve (the linear-in-t contract).
std::vector<double> time_average_sq_error(const FrozenModel& model, const Vec& x,
                                          const Vec& y, const Vec& fbar_x,
                                          const std::vector<double>& times, int n_seeds,
                                          double h_step, std::uint64_t seed);

// Averaged RDE dX = fbar(X) dt + sigma(X) dB, delegated to solve_rde.
GridControlledPath solve_averaged(const std::function<Vec(const Vec&)>& fbar,
                                  const std::function<Mat(const Vec&)>& sigma,
                                  const std::function<Mat(const Vec&, const Vec&)>& sigma_deriv,
                                  RoughPathPtr b, const Vec& x0);

// Tabulated averaged drift on a uniform 1-D x grid with natural cubic
// spline interpolation; exportable so the averaging stage can be decoupled
// from the RDE stage.
class FbarTable {
public:
    FbarTable(std::vector<double> xs, std::vector<Vec> values,
              std::vector<double> std_errors);

    Vec eval(double x) const;  // clamped to the table range
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<Vec>& values() const { return values_; }
    const std::vector<double>& std_errors() const { return std_errors_; }

    void save_csv(const std::string& path) const;
    static FbarTable load_csv(const std::string& path);

private:
    void build_spline();
    std::vector<double> xs_;
    std::vector<Vec> values_;
    std::vector<double> std_errors_;
    std::vector<Vec> second_derivs_;  // natural cubic spline coefficients
};

FbarTable build_fbar_table(const FrozenModel& model, double x_min, double x_max,
                           int n_points, AvgMethod method, const AveragingBudget& budget);

}  // namespace rf
