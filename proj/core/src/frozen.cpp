#include "rf/frozen.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rf {

namespace {

// One EM micro-integrator shared by all frozen diagnostics.
class FrozenStepper {
public:
    FrozenStepper(const FrozenModel& model, const Vec& x, double h_step,
                  std::uint64_t seed, std::uint64_t stream_id)
        : model_(model), x_(x), h_(h_step), sqrt_h_(std::sqrt(h_step)),
          rng_(seed, stream_id) {}

    Vec step(const Vec& y, std::uint64_t micro_index) const {
        Vec dw(model_.fast_noise_dim);
        for (int c = 0; c < model_.fast_noise_dim; ++c)
            dw(c) = sqrt_h_ * rng_.gaussian(micro_index * model_.fast_noise_dim + c);
        Vec out = y + model_.g(x_, y) * h_ + model_.h(x_, y) * dw;
        if (!out.allFinite() || out.lpNorm<Eigen::Infinity>() > kBlowupThreshold)
            throw ExplosionError("frozen EM: state blow-up",
                                 static_cast<int>(micro_index));
        return out;
    }

private:
    const FrozenModel& model_;
    Vec x_;
    double h_, sqrt_h_;
    CounterRng rng_;
};

Vec default_y0(const FrozenModel& model, const Vec& given) {
    return given.size() == model.fast_dim ? given : Vec(Vec::Zero(model.fast_dim));
}

}  // namespace

FrozenModel frozen_model(const SlowFastCoeffs& coeffs,
                         std::optional<FrozenClosedForm> closed_form) {
    FrozenModel m;
    m.slow_dim = coeffs.slow_dim;
    m.fast_dim = coeffs.fast_dim;
    m.fast_noise_dim = coeffs.fast_noise_dim;
    m.f = coeffs.f;
    m.g = coeffs.g;
    m.h = coeffs.h;
    m.meta = coeffs.meta;
    m.closed_form = std::move(closed_form);
    return m;
}

std::vector<Vec> solve_frozen(const FrozenModel& model, const Vec& x, const Vec& y0,
                              double t_long, double h_step, std::uint64_t seed,
                              std::uint64_t stream_id) {
    if (!(h_step > 0.0)) throw std::invalid_argument("solve_frozen: h_step must be > 0");
    const int n = static_cast<int>(std::floor(t_long / h_step + 0.5));
    FrozenStepper stepper(model, x, h_step, seed, stream_id);
    std::vector<Vec> path(n + 1);
    path[0] = y0;
    for (int j = 0; j < n; ++j) path[j + 1] = stepper.step(path[j], j);
    return path;
}

std::vector<double> contraction_check(const FrozenModel& model, const Vec& x,
                                      const Vec& y1, const Vec& y2,
                                      const std::vector<double>& times, int n_seeds,
                                      double h_step, std::uint64_t seed) {
    std::vector<double> acc(times.size(), 0.0);
    for (int s = 0; s < n_seeds; ++s) {
        FrozenStepper stepper(model, x, h_step, seed, derive_stream(1, s));
        Vec a = y1, b = y2;
        std::size_t ti = 0;
        double t = 0.0;
        std::uint64_t j = 0;
        while (ti < times.size()) {
            while (t + 1e-12 < times[ti]) {
                // Shared increments: synchronous coupling.
                a = stepper.step(a, j);
                b = stepper.step(b, j);
                ++j;
                t += h_step;
            }
            acc[ti] += (a - b).squaredNorm();
            ++ti;
        }
    }
    for (double& v : acc) v /= n_seeds;
    return acc;
}

AvgEstimate averaged_drift(const FrozenModel& model, const Vec& x, AvgMethod method,
                           const AveragingBudget& budget) {
    AvgEstimate out;
    switch (method) {
        case AvgMethod::closed_form: {
            if (!model.closed_form || !model.closed_form->fbar)
                throw std::invalid_argument("averaged_drift: no closed form registered");
            out.value = model.closed_form->fbar(x);
            out.std_error = 0.0;
            break;
        }
        case AvgMethod::ergodic_average: {
            const Vec y0 = default_y0(model, budget.y0);
            const auto path =
                solve_frozen(model, x, y0, budget.t_long, budget.h_step, budget.seed, 17);
            const int burn = static_cast<int>(budget.t_burn / budget.h_step);
            const int n = static_cast<int>(path.size()) - 1;
            if (burn >= n)
                throw std::invalid_argument("averaged_drift: burn-in exceeds horizon");
            // Batch means over 16 batches for the error estimate.
            const int kept = n - burn;
            const int n_batches = 16;
            const int batch = std::max(1, kept / n_batches);
            std::vector<Vec> batch_means;
            Vec total = Vec::Zero(model.slow_dim);
            for (int b0 = burn; b0 + batch <= n; b0 += batch) {
                Vec bm = Vec::Zero(model.slow_dim);
                for (int j = b0; j < b0 + batch; ++j) bm += model.f(x, path[j]);
                bm /= batch;
                batch_means.push_back(bm);
                total += bm;
            }
            out.value = total / static_cast<double>(batch_means.size());
            double var = 0.0;
            for (const auto& bm : batch_means) var += (bm - out.value).squaredNorm();
            var /= std::max<std::size_t>(1, batch_means.size() - 1);
            out.std_error = std::sqrt(var / batch_means.size());
            break;
        }
        case AvgMethod::endpoint_mc: {
            const Vec y0 = default_y0(model, budget.y0);
            Vec sum = Vec::Zero(model.slow_dim);
            double sum_sq = 0.0;
            std::vector<Vec> samples(budget.n_seeds);
            const int n = static_cast<int>(std::floor(budget.t_mix / budget.h_step + 0.5));
            for (int s = 0; s < budget.n_seeds; ++s) {
                FrozenStepper stepper(model, x, budget.h_step, budget.seed,
                                      derive_stream(23, s));
                Vec y = y0;
                for (int j = 0; j < n; ++j) y = stepper.step(y, j);
                samples[s] = model.f(x, y);
                sum += samples[s];
            }
            out.value = sum / budget.n_seeds;
            for (const auto& v : samples) sum_sq += (v - out.value).squaredNorm();
            out.std_error =
                std::sqrt(sum_sq / (budget.n_seeds - 1) / budget.n_seeds);
            break;
        }
    }
    if (budget.tolerance > 0.0 && out.std_error > budget.tolerance)
        out.within_tolerance = false;
    return out;
}

double invariant_moment(const FrozenModel& model, const Vec& x, double q,
                        const AveragingBudget& budget) {
    const Vec y0 = default_y0(model, budget.y0);
    const auto path =
        solve_frozen(model, x, y0, budget.t_long, budget.h_step, budget.seed, 31);
    const int burn = static_cast<int>(budget.t_burn / budget.h_step);
    double acc = 0.0;
    int count = 0;
    for (std::size_t j = burn; j < path.size(); ++j) {
        acc += std::pow(path[j].norm(), q);
        ++count;
    }
    return acc / count;
}

std::vector<double> transient_moment_curve(const FrozenModel& model, const Vec& x,
                                           const Vec& y0, double q,
                                           const std::vector<double>& times, int n_seeds,
                                           double h_step, std::uint64_t seed) {
    std::vector<double> acc(times.size(), 0.0);
    for (int s = 0; s < n_seeds; ++s) {
        FrozenStepper stepper(model, x, h_step, seed, derive_stream(37, s));
        Vec y = y0;
        std::size_t ti = 0;
        double t = 0.0;
        std::uint64_t j = 0;
        while (ti < times.size()) {
            while (t + 1e-12 < times[ti]) {
                y = stepper.step(y, j);
                ++j;
                t += h_step;
            }
            acc[ti] += std::pow(y.norm(), q);
            ++ti;
        }
    }
    for (double& v : acc) v /= n_seeds;
    return acc;
}

std::vector<double> mixing_decay_check(const FrozenModel& model, const Vec& x,
                                       const Vec& y,
                                       const std::function<double(const Vec&)>& phi,
                                       const std::vector<double>& times,
                                       const AveragingBudget& budget,
                                       std::optional<double> mu_phi) {
    double mu;
    if (mu_phi) {
        mu = *mu_phi;
    } else {
        const Vec y0 = default_y0(model, budget.y0);
        const auto path =
            solve_frozen(model, x, y0, budget.t_long, budget.h_step, budget.seed, 41);
        const int burn = static_cast<int>(budget.t_burn / budget.h_step);
        double acc = 0.0;
        int count = 0;
        for (std::size_t j = burn; j < path.size(); ++j) {
            acc += phi(path[j]);
            ++count;
        }
        mu = acc / count;
    }
    std::vector<double> acc(times.size(), 0.0);
    for (int s = 0; s < budget.n_seeds; ++s) {
        FrozenStepper stepper(model, x, budget.h_step, budget.seed, derive_stream(43, s));
        Vec yt = y;
        std::size_t ti = 0;
        double t = 0.0;
        std::uint64_t j = 0;
        while (ti < times.size()) {
            while (t + 1e-12 < times[ti]) {
                yt = stepper.step(yt, j);
                ++j;
                t += budget.h_step;
            }
            acc[ti] += phi(yt);
            ++ti;
        }
    }
    std::vector<double> out(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        out[ti] = std::abs(acc[ti] / budget.n_seeds - mu);
    return out;
}

std::vector<double> time_average_sq_error(const FrozenModel& model, const Vec& x,
                                          const Vec& y, const Vec& fbar_x,
                                          const std::vector<double>& times, int n_seeds,
                                          double h_step, std::uint64_t seed) {
    std::vector<double> acc(times.size(), 0.0);
    for (int s = 0; s < n_seeds; ++s) {
        FrozenStepper stepper(model, x, h_step, seed, derive_stream(47, s));
        Vec yt = y;
        Vec integral = Vec::Zero(model.slow_dim);
        std::size_t ti = 0;
        double t = 0.0;
        std::uint64_t j = 0;
        while (ti < times.size()) {
            while (t + 1e-12 < times[ti]) {
                integral += (model.f(x, yt) - fbar_x) * h_step;
                yt = stepper.step(yt, j);
                ++j;
                t += h_step;
            }
            acc[ti] += integral.squaredNorm();
            ++ti;
        }
    }
    for (double& v : acc) v /= n_seeds;
    return acc;
}

GridControlledPath solve_averaged(const std::function<Vec(const Vec&)>& fbar,
                                  const std::function<Mat(const Vec&)>& sigma,
                                  const std::function<Mat(const Vec&, const Vec&)>& sigma_deriv,
                                  RoughPathPtr b, const Vec& x0) {
    VectorFieldSet vfs;
    vfs.state_dim = static_cast<int>(x0.size());
    vfs.noise_dim = b->dim();
    vfs.sigma = sigma;
    vfs.sigma_deriv = sigma_deriv;
    vfs.drift = [fbar](const Vec& x, const Vec&) {
        Vec v = fbar(x);
        if (!v.allFinite())
            throw std::runtime_error("solve_averaged: fbar evaluation failed");
        return v;
    };
    return solve_rde(vfs, std::move(b), x0);
}

FbarTable::FbarTable(std::vector<double> xs, std::vector<Vec> values,
                     std::vector<double> std_errors)
    : xs_(std::move(xs)), values_(std::move(values)), std_errors_(std::move(std_errors)) {
    if (xs_.size() < 2 || xs_.size() != values_.size() || xs_.size() != std_errors_.size())
        throw std::invalid_argument("FbarTable: need >= 2 consistent rows");
    for (std::size_t i = 1; i < xs_.size(); ++i)
        if (!(xs_[i] > xs_[i - 1]))
            throw std::invalid_argument("FbarTable: x grid must be strictly increasing");
    build_spline();
}

void FbarTable::build_spline() {
    // Natural cubic spline second derivatives, componentwise tridiagonal solve.
    const int n = static_cast<int>(xs_.size());
    const long dim = values_[0].size();
    second_derivs_.assign(n, Vec::Zero(dim));
    if (n < 3) return;
    std::vector<Vec> rhs(n, Vec::Zero(dim));
    std::vector<double> diag(n, 0.0), upper(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
        const double h0 = xs_[i] - xs_[i - 1];
        const double h1 = xs_[i + 1] - xs_[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((values_[i + 1] - values_[i]) / h1 -
                        (values_[i] - values_[i - 1]) / h0);
    }
    // Thomas algorithm on the interior.
    for (int i = 2; i < n - 1; ++i) {
        const double w = (xs_[i] - xs_[i - 1]) / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 2; i >= 1; --i) {
        Vec v = rhs[i];
        if (i + 1 < n - 1) v -= upper[i] * second_derivs_[i + 1];
        second_derivs_[i] = v / diag[i];
    }
}

Vec FbarTable::eval(double x) const {
    const int n = static_cast<int>(xs_.size());
    const double xc = std::clamp(x, xs_.front(), xs_.back());
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (xs_[mid] <= xc ? lo : hi) = mid;
    }
    const double h = xs_[hi] - xs_[lo];
    const double a = (xs_[hi] - xc) / h;
    const double b = (xc - xs_[lo]) / h;
    return a * values_[lo] + b * values_[hi] +
           ((a * a * a - a) * second_derivs_[lo] + (b * b * b - b) * second_derivs_[hi]) *
               (h * h) / 6.0;
}

void FbarTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("FbarTable: cannot open " + path);
    out << "x";
    for (long c = 0; c < values_[0].size(); ++c) out << ",fbar" << c;
    out << ",stderr\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        out << xs_[i];
        for (long c = 0; c < values_[i].size(); ++c) out << "," << values_[i](c);
        out << "," << std_errors_[i] << "\n";
    }
}

FbarTable FbarTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("FbarTable: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("FbarTable: empty file");
    std::vector<double> xs, errs;
    std::vector<Vec> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 3) throw std::runtime_error("FbarTable: malformed row");
        xs.push_back(row.front());
        errs.push_back(row.back());
        Vec v(static_cast<long>(row.size()) - 2);
        for (std::size_t c = 1; c + 1 < row.size(); ++c) v(c - 1) = row[c];
        vals.push_back(v);
    }
    return FbarTable(std::move(xs), std::move(vals), std::move(errs));
}

FbarTable build_fbar_table(const FrozenModel& model, double x_min, double x_max,
                           int n_points, AvgMethod method, const AveragingBudget& budget) {
    if (model.slow_dim != 1)
        throw std::invalid_argument("build_fbar_table: tabulation supports slow_dim == 1");
    if (n_points < 2) throw std::invalid_argument("build_fbar_table: need >= 2 points");
    std::vector<double> xs(n_points), errs(n_points);
    std::vector<Vec> vals(n_points);
    for (int i = 0; i < n_points; ++i) {
        xs[i] = x_min + (x_max - x_min) * i / (n_points - 1);
        AveragingBudget b = budget;
        b.seed = derive_stream(budget.seed, 1000 + i);
        Vec x(1);
        x << xs[i];
        const AvgEstimate est = averaged_drift(model, x, method, b);
        vals[i] = est.value;
        errs[i] = est.std_error;
    }
    return FbarTable(std::move(xs), std::move(vals), std::move(errs));
}

}  // namespace rf
