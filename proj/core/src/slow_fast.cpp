#include "rf/slow_fast.hpp"

#include <cmath>

namespace rf {

void SlowFastCoeffs::validate() const {
    if (slow_dim < 1 || fast_dim < 1 || slow_noise_dim < 1 || fast_noise_dim < 1)
        throw std::invalid_argument("SlowFastCoeffs: dimensions must be positive");
    if (!(meta.q >= 2.0) || meta.r < 0.0 || !(meta.q > 2.0 * meta.r))
        throw std::invalid_argument("SlowFastCoeffs: need q >= 2, r >= 0, q > 2r");
    if (!(meta.gamma1 > 0.0) || !(meta.gamma2 > 0.0))
        throw std::invalid_argument("SlowFastCoeffs: gamma1, gamma2 must be positive");
    if (!f || !g || !h || !sigma || !sigma_deriv || !h_deriv_x || !h_deriv_y)
        throw std::invalid_argument("SlowFastCoeffs: missing evaluator");
}

double SlowFastCoeffs::dissipativity_slack(const std::vector<Vec>& xs,
                                           const std::vector<Vec>& ys,
                                           double envelope_c) const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : xs)
        for (const auto& y : ys) {
            const double lhs = 2.0 * y.dot(g(x, y)) + (meta.q - 1.0) * h(x, y).squaredNorm();
            const double rhs = -meta.gamma1 * y.squaredNorm() +
                               envelope_c * (std::pow(x.norm(), meta.eta3) + 1.0);
            worst = std::min(worst, rhs - lhs);
        }
    return worst;
}

double SlowFastCoeffs::monotonicity_slack(const std::vector<Vec>& xs,
                                          const std::vector<Vec>& y1s,
                                          const std::vector<Vec>& y2s) const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : xs)
        for (std::size_t i = 0; i < y1s.size(); ++i) {
            const Vec& y1 = y1s[i];
            const Vec& y2 = y2s[i % y2s.size()];
            const double lhs = 2.0 * (y1 - y2).dot(g(x, y1) - g(x, y2)) +
                               (h(x, y1) - h(x, y2)).squaredNorm();
            worst = std::min(worst, -meta.gamma2 * (y1 - y2).squaredNorm() - lhs);
        }
    return worst;
}

std::pair<Vec, Mat> assemble_blocks(const SlowFastCoeffs& coeffs, double epsilon,
                                    const Vec& z) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("assemble_blocks: epsilon must be in (0,1]");
    const int m = coeffs.slow_dim, n = coeffs.fast_dim;
    const int d = coeffs.slow_noise_dim, e = coeffs.fast_noise_dim;
    const Vec x = z.head(m), y = z.tail(n);
    Vec F(m + n);
    F.head(m) = coeffs.f(x, y);
    F.tail(n) = coeffs.g(x, y) / epsilon;
    Mat S = Mat::Zero(m + n, d + e);
    S.topLeftCorner(m, d) = coeffs.sigma(x);
    S.bottomRightCorner(n, e) = coeffs.h(x, y) / std::sqrt(epsilon);
    return {std::move(F), std::move(S)};
}

SlowFastSolution solve_slow_fast(const SlowFastCoeffs& coeffs, const MixedLift& xi,
                                 double epsilon, const Vec& x0, const Vec& y0,
                                 const MicroStepPolicy& policy) {
    coeffs.validate();
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("solve_slow_fast: epsilon must be in (0,1]");
    const Grid& grid = xi.rp().grid();
    const double dt = grid.step();
    if (dt > policy.c_micro * epsilon + 1e-15)
        throw std::invalid_argument(
            "solve_slow_fast: policy violation, grid step " + std::to_string(dt) +
            " exceeds c_micro * epsilon = " + std::to_string(policy.c_micro * epsilon));
    if (xi.slow_noise_dim() != coeffs.slow_noise_dim ||
        xi.fast_noise_dim() != coeffs.fast_noise_dim)
        throw std::invalid_argument("solve_slow_fast: noise dimension mismatch");

    const int n_steps = grid.n_steps();
    const double inv_eps = 1.0 / epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(epsilon);
    const int d = coeffs.slow_noise_dim, e = coeffs.fast_noise_dim;

    SlowFastSolution sol;
    sol.epsilon = epsilon;
    sol.x_path.resize(n_steps + 1);
    sol.y_path.resize(n_steps + 1);
    sol.x_path[0] = x0;
    sol.y_path[0] = y0;
    sol.max_fast_abs = y0.norm();

    for (int k = 0; k < n_steps; ++k) {
        const Vec& x = sol.x_path[k];
        const Vec& y = sol.y_path[k];
        const Vec b1 = xi.b1_cell(k);
        const Vec w1 = xi.w1_cell(k);
        const Mat sig = coeffs.sigma(x);
        const Mat hm = coeffs.h(x, y);

        // slow block: f dt + sigma B^1 + (grad sigma sigma) <B^2>; term order
        // mirrors rough_euler_step so the slow-block extraction is bit-exact.
        Vec xn = x;
        xn += coeffs.f(x, y) * dt;
        xn += sig * b1;
        {
            const Mat b2 = xi.b2_cell(k);
            for (int a = 0; a < d; ++a)
                xn += coeffs.sigma_deriv(x, sig.col(a)) * b2.row(a).transpose();
        }

        // fast block: g dt / eps + h W^1 / sqrt(eps)
        //           + grad_x h sigma <I[B,W]> / sqrt(eps) + grad_y h h <W^2> / eps
        Vec yn = y + coeffs.g(x, y) * (dt * inv_eps) + inv_sqrt_eps * (hm * w1);
        if (policy.include_cross_terms) {
            const Mat ibw = xi.ibw_cell(k);
            for (int a = 0; a < d; ++a)
                yn += inv_sqrt_eps *
                      (coeffs.h_deriv_x(x, y, sig.col(a)) * ibw.row(a).transpose());
            const Mat w2 = xi.w2_cell(k);
            for (int a = 0; a < e; ++a)
                yn += inv_eps *
                      (coeffs.h_deriv_y(x, y, hm.col(a)) * w2.row(a).transpose());
        }

        if (!xn.allFinite() || !yn.allFinite() ||
            xn.lpNorm<Eigen::Infinity>() > kBlowupThreshold ||
            yn.lpNorm<Eigen::Infinity>() > kBlowupThreshold)
            throw ExplosionError("solve_slow_fast: state blow-up", k + 1);

        sol.x_path[k + 1] = std::move(xn);
        sol.y_path[k + 1] = std::move(yn);
        sol.max_fast_abs = std::max(sol.max_fast_abs, sol.y_path[k + 1].norm());
    }
    sol.slow_hoelder_beta = path_hoelder_seminorm(grid, sol.x_path, 0.4);
    return sol;
}

SlowFastCoeffs ito_strat_switch(const SlowFastCoeffs& coeffs, double lambda) {
    SlowFastCoeffs out = coeffs;
    const auto g0 = coeffs.g;
    const auto h0 = coeffs.h;
    const auto hdy = coeffs.h_deriv_y;
    const int e = coeffs.fast_noise_dim;
    out.g = [g0, h0, hdy, lambda, e](const Vec& x, const Vec& y) {
        Vec v = g0(x, y);
        const Mat hm = h0(x, y);
        // grad_y h h <Id_e> = sum_a [D_y h in direction h e_a] e_a
        for (int a = 0; a < e; ++a) v -= lambda * hdy(x, y, hm.col(a)).col(a);
        return v;
    };
    return out;
}

double fast_sde_consistency(const SlowFastCoeffs& coeffs,
                            const SlowFastSolution& solution, const MixedLift& xi) {
    const MicroPath& w = xi.w_micro();
    if (w.values.empty())
        throw std::invalid_argument("fast_sde_consistency: missing micro data");
    const int n = w.macro.n_steps();
    const int m = w.substeps;
    const double dt = w.micro_step();
    const double inv_eps = 1.0 / solution.epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(solution.epsilon);

    Vec y = solution.y_path[0];
    double max_gap = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec& x = solution.x_path[k];  // frozen per macro cell
        for (int j = k * m; j < (k + 1) * m; ++j) {
            y += coeffs.g(x, y) * (dt * inv_eps) +
                 inv_sqrt_eps * (coeffs.h(x, y) * w.increment(j));
            if (!y.allFinite())
                throw ExplosionError("fast_sde_consistency: blow-up", j);
        }
        max_gap = std::max(max_gap, (y - solution.y_path[k + 1]).norm());
    }
    return max_gap;
}

VectorFieldSet slow_block_as_rde(const SlowFastCoeffs& coeffs,
                                 const std::vector<Vec>& fast_path) {
    VectorFieldSet vfs;
    vfs.state_dim = coeffs.slow_dim;
    vfs.noise_dim = coeffs.slow_noise_dim;
    vfs.sigma = coeffs.sigma;
    vfs.sigma_deriv = coeffs.sigma_deriv;
    const auto f0 = coeffs.f;
    vfs.drift = [f0](const Vec& x, const Vec& psi) { return f0(x, psi); };
    vfs.psi = fast_path;
    vfs.lip_f = coeffs.meta.lip_f;
    vfs.f_inf = coeffs.meta.f_inf;
    vfs.sigma_c3b = coeffs.meta.sigma_c3b;
    vfs.flag_c3b = true;
    vfs.flag_f_bounded_lipschitz = true;
    return vfs;
}

}  // namespace rf
