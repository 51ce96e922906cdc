#include "rf/study.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "rf/parallel.hpp"
#include "rf/serialize.hpp"

namespace rf {

double floor_to_block(double s, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("floor_to_block: delta must be > 0");
    return std::floor(s / delta) * delta;
}

double delta_schedule(double epsilon, double beta, DeltaMode mode, double fixed_value,
                      double grid_step, double horizon, bool* clamped) {
    if (clamped) *clamped = false;
    if (mode == DeltaMode::fixed) return fixed_value;
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument(
            "delta_schedule: theory mode needs epsilon in (0,1), got " +
            std::to_string(epsilon));
    double delta = std::pow(epsilon, 1.0 / (4.0 * beta)) * std::log(1.0 / epsilon);
    const double hi = horizon / 2.0;
    if (delta > hi) {
        delta = hi;
        if (clamped) *clamped = true;
    }
    if (delta <= grid_step) {
        delta = std::nextafter(grid_step, horizon);
        if (clamped) *clamped = true;
    }
    return delta;
}

std::pair<double, double> fit_loglog(const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_loglog: need >= 2 matched samples");
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_loglog: samples must be positive");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-14)
        throw std::invalid_argument("fit_loglog: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

std::vector<Vec> khasminskii_aux(const SlowFastCoeffs& coeffs,
                                 const std::vector<Vec>& x_path,
                                 const MicroPath& w_micro, double epsilon,
                                 double delta, const Vec& y0) {
    const Grid& macro = w_micro.macro;
    if (static_cast<int>(x_path.size()) != macro.n_points())
        throw std::invalid_argument("khasminskii_aux: slow path / micro grid mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("khasminskii_aux: delta must be > 0");
    const int n_macro = macro.n_steps();
    const int m = w_micro.substeps;
    const double dt = w_micro.micro_step();
    const double macro_step = macro.step();
    const double inv_eps = 1.0 / epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(epsilon);

    std::vector<Vec> out(n_macro + 1);
    out[0] = y0;
    Vec y = y0;
    for (int k = 0; k < n_macro; ++k) {
        for (int j = k * m; j < (k + 1) * m; ++j) {
            // Block start s(delta) snapped onto the macro grid.
            const double t = w_micro.micro_time(j);
            int frozen_idx =
                static_cast<int>(floor_to_block(t, delta) / macro_step + 0.5);
            frozen_idx = std::min(frozen_idx, n_macro);
            const Vec& x = x_path[frozen_idx];
            y += coeffs.g(x, y) * (dt * inv_eps) +
                 inv_sqrt_eps * (coeffs.h(x, y) * w_micro.increment(j));
            if (!y.allFinite() || y.lpNorm<Eigen::Infinity>() > kBlowupThreshold)
                throw ExplosionError("khasminskii_aux: state blow-up", j);
        }
        out[k + 1] = y;
    }
    return out;
}

AuxGapSlope aux_gap_slope(const SlowFastCoeffs& coeffs, const Vec& x0, const Vec& y0,
                          const Grid& grid, int substeps, double epsilon,
                          const std::vector<double>& deltas, int m_mc,
                          std::uint64_t seed, int workers) {
    if (deltas.empty()) throw std::invalid_argument("aux_gap_slope: empty delta list");
    if (m_mc < 1) throw std::invalid_argument("aux_gap_slope: m_mc must be >= 1");
    coeffs.validate();

    const int n_delta = static_cast<int>(deltas.size());
    std::vector<std::vector<double>> per_path(m_mc,
                                              std::vector<double>(n_delta, 0.0));
    parallel_for_index(m_mc, workers, [&](int i) {
        NoiseSpec bs;
        bs.kind = NoiseKind::brownian_strat;
        bs.dim = coeffs.slow_noise_dim;
        bs.substeps = substeps;
        bs.seed = seed;
        bs.stream_id = derive_stream(0x42, static_cast<std::uint64_t>(i));
        NoiseSpec ws = bs;
        ws.dim = coeffs.fast_noise_dim;
        ws.stream_id = derive_stream(0x1000, static_cast<std::uint64_t>(i));

        MicroPath bm = sample_brownian_micro(bs, grid);
        MicroPath wm = sample_brownian_micro(ws, grid);
        MicroLift bl{geometric_lift_from_micro(bm, 0.5), bm};
        MicroLift wl{ito_lift_from_micro(wm, 0.5, wm.dim == 1), wm};
        MixedLift xi = mixed_lift(bl, wl);
        const SlowFastSolution sol = solve_slow_fast(coeffs, xi, epsilon, x0, y0);

        for (int di = 0; di < n_delta; ++di) {
            const auto yhat =
                khasminskii_aux(coeffs, sol.x_path, wm, epsilon, deltas[di], y0);
            double gap = 0.0;
            for (std::size_t k = 0; k < yhat.size(); ++k)
                gap = std::max(gap, (sol.y_path[k] - yhat[k]).squaredNorm());
            per_path[i][di] = gap;
        }
    });

    AuxGapSlope out;
    out.deltas = deltas;
    out.gaps.assign(n_delta, 0.0);
    for (int i = 0; i < m_mc; ++i)
        for (int di = 0; di < n_delta; ++di) out.gaps[di] += per_path[i][di];
    for (double& g : out.gaps) g /= m_mc;

    double max_gap = 0.0;
    for (double g : out.gaps) max_gap = std::max(max_gap, g);
    if (n_delta < 2 || max_gap < 1e-14) {
        out.degenerate = true;
        return out;
    }
    std::tie(out.slope, out.intercept) = fit_loglog(out.deltas, out.gaps);
    return out;
}

MDecomposition decompose_M(const SlowFastCoeffs& coeffs, const Grid& grid,
                           const std::vector<Vec>& x_path,
                           const std::vector<Vec>& y_path,
                           const std::vector<Vec>& yhat_path,
                           const std::function<Vec(const Vec&)>& fbar, double delta,
                           double gamma) {
    const int np = grid.n_points();
    if (static_cast<int>(x_path.size()) != np ||
        static_cast<int>(y_path.size()) != np ||
        static_cast<int>(yhat_path.size()) != np)
        throw std::invalid_argument("decompose_M: paths must live on the common grid");
    const double h = grid.step();

    MDecomposition out;
    out.term1.assign(np, Vec::Zero(coeffs.slow_dim));
    out.term2.assign(np, Vec::Zero(coeffs.slow_dim));
    out.term3.assign(np, Vec::Zero(coeffs.slow_dim));
    out.term4.assign(np, Vec::Zero(coeffs.slow_dim));
    for (int k = 0; k < np - 1; ++k) {
        int bi = static_cast<int>(floor_to_block(grid.time(k), delta) / h + 0.5);
        bi = std::min(bi, np - 1);
        const Vec& x = x_path[k];
        const Vec& xb = x_path[bi];
        const Vec& y = y_path[k];
        const Vec& yh = yhat_path[k];
        out.term1[k + 1] = out.term1[k] + (coeffs.f(x, y) - coeffs.f(xb, y)) * h;
        out.term2[k + 1] = out.term2[k] + (coeffs.f(xb, y) - coeffs.f(xb, yh)) * h;
        out.term3[k + 1] = out.term3[k] + (coeffs.f(xb, yh) - fbar(xb)) * h;
        out.term4[k + 1] = out.term4[k] + (fbar(xb) - fbar(x)) * h;
    }

    auto norm_of = [&grid](const std::vector<Vec>& path, double g) {
        return hoelder_seminorm(
            grid, [&path](int i, int k) { return (path[k] - path[i]).norm(); }, g);
    };
    out.lip1 = norm_of(out.term1, 1.0);
    out.lip2 = norm_of(out.term2, 1.0);
    out.lip4 = norm_of(out.term4, 1.0);
    out.hoelder3 = norm_of(out.term3, gamma);
    return out;
}

void StudySpec::validate() const {
    if (epsilons.empty()) throw std::invalid_argument("StudySpec: empty epsilon list");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] <= 1.0))
            throw std::invalid_argument("StudySpec: epsilon values must lie in (0,1]");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("StudySpec: epsilon list must be descending");
    }
    if (!(p >= 1.0)) throw std::invalid_argument("StudySpec: p must be >= 1");
    const double alpha = b_kind == NoiseKind::fbm ? hurst : 0.5;
    if (!(beta > 0.0 && beta < alpha))
        throw std::invalid_argument("StudySpec: need 0 < beta < alpha of the driver");
    if (m_mc < 1 || macro_steps < 2 || substeps < 1 || !(horizon > 0.0))
        throw std::invalid_argument("StudySpec: infeasible budget");
    if (!(c_micro > 0.0)) throw std::invalid_argument("StudySpec: c_micro must be > 0");
}

namespace {

MicroPath sample_noise(const NoiseSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case NoiseKind::brownian_ito:
        case NoiseKind::brownian_strat:
            return sample_brownian_micro(spec, grid);
        case NoiseKind::fbm:
            return sample_fbm_micro(spec, grid);
        case NoiseKind::deterministic_smooth:
            return sample_smooth_micro(spec, grid);
    }
    throw std::logic_error("sample_noise: unreachable");
}

GridRoughPath lift_view(const MicroPath& view, NoiseKind kind, double hurst) {
    switch (kind) {
        case NoiseKind::brownian_ito:
            return ito_lift_from_micro(view, 0.5, view.dim == 1);
        case NoiseKind::brownian_strat:
            return geometric_lift_from_micro(view, 0.5);
        case NoiseKind::fbm:
            return geometric_lift_from_micro(view, hurst);
        case NoiseKind::deterministic_smooth:
            return geometric_lift_from_micro(view, 0.5);
    }
    throw std::logic_error("lift_view: unreachable");
}

}  // namespace

StudyResult convergence_study(const StudySpec& spec) {
    const auto t_start = std::chrono::steady_clock::now();
    spec.validate();
    const ModelBundle model = make_model(spec.model, spec.model_params);
    model.coeffs.validate();

    std::function<Vec(const Vec&)> fbar;
    std::shared_ptr<FbarTable> table;
    if (model.frozen.closed_form && model.frozen.closed_form->fbar) {
        fbar = model.frozen.closed_form->fbar;
    } else {
        AveragingBudget budget;
        budget.seed = derive_stream(spec.seed, 0x7ab);
        const double x_lo = model.x0(0) - 3.0, x_hi = model.x0(0) + 3.0;
        table = std::make_shared<FbarTable>(build_fbar_table(
            model.frozen, x_lo, x_hi, 33, AvgMethod::ergodic_average, budget));
        fbar = [table](const Vec& x) { return table->eval(x(0)); };
    }

    const int n_macro = spec.macro_steps;
    const double T = spec.horizon;
    const Grid macro_grid(T, n_macro);
    const int n_eps = static_cast<int>(spec.epsilons.size());

    // Refinement factor per epsilon: power of two so every dynamics grid is
    // a coarsening of the finest one and all of them share the micro data.
    std::vector<int> refine(n_eps, 1);
    int k_max = 1;
    for (int e = 0; e < n_eps; ++e) {
        const double need = macro_grid.step() / (spec.c_micro * spec.epsilons[e]);
        int k = 1;
        while (k < need - 1e-12) k *= 2;
        refine[e] = k;
        k_max = std::max(k_max, k);
    }
    const Grid fine_grid(T, n_macro * k_max);

    StudyResult res;
    res.epsilons = spec.epsilons;
    res.lift_hashes.assign(spec.m_mc, 0);
    std::vector<std::vector<double>> samples(spec.m_mc,
                                             std::vector<double>(n_eps, 0.0));

    parallel_for_index(spec.m_mc, spec.workers, [&](int s) {
        NoiseSpec bs;
        bs.kind = spec.b_kind;
        bs.dim = model.coeffs.slow_noise_dim;
        bs.hurst = spec.hurst;
        bs.substeps = spec.substeps;
        bs.seed = spec.seed;
        bs.stream_id = derive_stream(0x42, static_cast<std::uint64_t>(s));
        const MicroPath b_micro = sample_noise(bs, fine_grid);
        res.lift_hashes[s] = content_hash(b_micro);

        // Averaged solution driven by the same B, viewed on the macro grid.
        auto rpb = std::make_shared<GridRoughPath>(
            lift_view(b_micro.with_macro(n_macro), spec.b_kind, spec.hurst));
        VectorFieldSet vfs;
        vfs.state_dim = model.coeffs.slow_dim;
        vfs.noise_dim = model.coeffs.slow_noise_dim;
        vfs.sigma = model.coeffs.sigma;
        vfs.sigma_deriv = model.coeffs.sigma_deriv;
        vfs.drift = [&fbar](const Vec& x, const Vec&) { return fbar(x); };
        const GridControlledPath xbar = solve_rde(vfs, rpb, model.x0);

        for (int e = 0; e < n_eps; ++e) {
            const int n_dyn = n_macro * refine[e];
            MicroPath b_view = b_micro.with_macro(n_dyn);
            MicroLift bl{lift_view(b_view, spec.b_kind, spec.hurst),
                         std::move(b_view)};
            NoiseSpec wsp;
            wsp.kind = NoiseKind::brownian_ito;
            wsp.dim = model.coeffs.fast_noise_dim;
            wsp.substeps = spec.substeps;
            wsp.seed = spec.seed;
            wsp.stream_id = derive_stream(
                0x1000 + static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(s));
            MicroPath wm = sample_brownian_micro(wsp, fine_grid).with_macro(n_dyn);
            MicroLift wl{ito_lift_from_micro(wm, 0.5, wm.dim == 1), std::move(wm)};
            MixedLift xi = mixed_lift(bl, wl);

            MicroStepPolicy policy;
            policy.c_micro = spec.c_micro;
            const SlowFastSolution sol = solve_slow_fast(
                model.coeffs, xi, spec.epsilons[e], model.x0, model.y0, policy);

            std::vector<Vec> diff(n_macro + 1);
            for (int k = 0; k <= n_macro; ++k)
                diff[k] = sol.x_path[static_cast<std::size_t>(k) * refine[e]] -
                          xbar.value(k);
            const double norm = path_hoelder_seminorm(macro_grid, diff, spec.beta);
            samples[s][e] = std::pow(norm, spec.p);
        }
    });

    res.means.assign(n_eps, 0.0);
    res.stderrs.assign(n_eps, 0.0);
    res.n_samples.assign(n_eps, spec.m_mc);
    for (int e = 0; e < n_eps; ++e) {
        double sum = 0.0;
        for (int s = 0; s < spec.m_mc; ++s) sum += samples[s][e];
        res.means[e] = sum / spec.m_mc;
        if (spec.m_mc > 1) {
            double var = 0.0;
            for (int s = 0; s < spec.m_mc; ++s) {
                const double d = samples[s][e] - res.means[e];
                var += d * d;
            }
            var /= (spec.m_mc - 1);
            res.stderrs[e] = std::sqrt(var / spec.m_mc);
        }
        if (!std::isfinite(res.means[e]))
            throw std::runtime_error("convergence_study: non-finite estimate");
    }

    bool all_positive = true;
    for (double m : res.means) all_positive = all_positive && m > 0.0;
    if (n_eps >= 2 && all_positive)
        std::tie(res.slope, res.intercept) = fit_loglog(res.epsilons, res.means);

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return res;
}

std::string StudyResult::to_csv() const {
    std::ostringstream out;
    out << "epsilon,mean,stderr,n\n";
    for (std::size_t e = 0; e < epsilons.size(); ++e)
        out << format_double(epsilons[e]) << "," << format_double(means[e]) << ","
            << format_double(stderrs[e]) << "," << n_samples[e] << "\n";
    return out.str();
}

}  // namespace rf
