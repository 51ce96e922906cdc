#include "rf/rde.hpp"

#include <cmath>

namespace rf {

namespace {
const Vec kEmptyVec = Vec();

void check_state(const Vec& y, int index, const char* where) {
    if (!y.allFinite() || y.lpNorm<Eigen::Infinity>() > kBlowupThreshold)
        throw ExplosionError(std::string(where) + ": state blow-up", index);
}
}  // namespace

const Vec& VectorFieldSet::psi_at(int k) const {
    if (psi.empty()) return kEmptyVec;
    return psi[static_cast<std::size_t>(k)];
}

Vec rough_euler_step(const Vec& y, const VectorFieldSet& vfs, const Vec& x1,
                     const Mat& x2, double dt, const Vec& psi) {
    const Mat sig = vfs.sigma(y);
    // Term order matches solve_slow_fast's slow block so the extraction
    // identity holds bit-exactly.
    Vec out = y;
    if (vfs.drift) out += vfs.drift(y, psi) * dt;
    out += sig * x1;
    // (grad sigma . sigma)(y)<x2> = sum_a [D_{sigma(y) e_a} sigma(y)] x2(a,:)^T
    for (int a = 0; a < vfs.noise_dim; ++a)
        out += vfs.sigma_deriv(y, sig.col(a)) * x2.row(a).transpose();
    if (!out.allFinite())
        throw std::runtime_error("rough_euler_step: non-finite evaluator output");
    return out;
}

GridControlledPath solve_rde(const VectorFieldSet& vfs, RoughPathPtr rp, const Vec& xi) {
    if (rp->dim() != vfs.noise_dim || xi.size() != vfs.state_dim)
        throw std::invalid_argument("solve_rde: dimension mismatch");
    if (!vfs.psi.empty() &&
        static_cast<int>(vfs.psi.size()) != rp->grid().n_points())
        throw std::invalid_argument("solve_rde: psi sample count must match grid");
    const int n = rp->grid().n_steps();
    const double dt = rp->grid().step();
    std::vector<Vec> values(n + 1);
    std::vector<Mat> gub(n + 1);
    values[0] = xi;
    gub[0] = vfs.sigma(xi);
    for (int k = 0; k < n; ++k) {
        values[k + 1] = rough_euler_step(values[k], vfs, rp->increment(k, k + 1),
                                         rp->level2_cell(k), dt, vfs.psi_at(k));
        check_state(values[k + 1], k + 1, "solve_rde");
        gub[k + 1] = vfs.sigma(values[k + 1]);
    }
    return GridControlledPath(std::move(rp), std::move(values), std::move(gub));
}

GridControlledPath solve_rde_picard(const VectorFieldSet& vfs, RoughPathPtr rp,
                                    const Vec& xi, double beta, double tol,
                                    int max_iter,
                                    std::vector<std::vector<double>>* iteration_gaps) {
    if (!vfs.flag_c3b || !vfs.flag_f_bounded_lipschitz)
        throw std::invalid_argument(
            "solve_rde_picard: coefficients must be flagged C^3_b and bounded/Lipschitz");
    const double alpha = rp->alpha();
    if (!(beta < alpha))
        throw std::invalid_argument("solve_rde_picard: need beta < alpha of the driver");

    const double norm_x = homogeneous_norm(*rp, alpha);
    const double big_k = vfs.bound_constant();
    const double lambda = std::pow(
        8.0 * kappa(beta) * std::pow(big_k + 1.0, 3) * std::pow(norm_x + 1.0, 3),
        -1.0 / (alpha - beta));

    const int n = rp->grid().n_steps();
    const double h = rp->grid().step();
    const int window_cells = std::max(1, static_cast<int>(std::floor(lambda / h)));

    std::vector<GridControlledPath> pieces;
    Vec xi_w = xi;
    for (int i0 = 0; i0 < n; i0 += window_cells) {
        const int i1 = std::min(i0 + window_cells, n);
        auto sub = std::make_shared<GridRoughPath>(rp->restrict(i0, i1));
        const int np = sub->grid().n_points();

        // Seed: t -> (xi + sigma(xi) X^1_{0,t}, sigma(xi)).
        const Mat sig_xi = vfs.sigma(xi_w);
        std::vector<Vec> values(np);
        std::vector<Mat> gub(np);
        for (int k = 0; k < np; ++k) {
            values[k] = xi_w + sig_xi * sub->level1(k);
            gub[k] = sig_xi;
        }
        GridControlledPath cur(sub, std::move(values), std::move(gub));

        std::vector<double> gaps;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            RoughIntegrand integrand =
                controlled_sigma_integrand(cur, vfs.sigma, vfs.sigma_deriv);
            GridControlledPath integral = rough_integral(integrand, 0, np - 1).as_cp;

            std::vector<Vec> new_values(np);
            std::vector<Mat> new_gub(np);
            Vec drift_acc = Vec::Zero(vfs.state_dim);
            for (int k = 0; k < np; ++k) {
                new_values[k] = xi_w + drift_acc + integral.value(k);
                new_gub[k] = vfs.sigma(cur.value(k));
                if (vfs.drift && k < np - 1)
                    drift_acc += vfs.drift(cur.value(k), vfs.psi_at(i0 + k)) * h;
            }
            double gap = 0.0;
            for (int k = 0; k < np; ++k)
                gap = std::max(gap, (new_values[k] - cur.value(k)).norm());
            gaps.push_back(gap);
            cur = GridControlledPath(sub, std::move(new_values), std::move(new_gub));
            if (gap < tol) {
                converged = true;
                break;
            }
        }
        if (iteration_gaps) iteration_gaps->push_back(gaps);
        if (!converged)
            throw std::runtime_error(
                "solve_rde_picard: no convergence within max_iter on window starting at " +
                std::to_string(i0) + " (norms likely exceed the hypothesis range)");

        xi_w = cur.value(sub->grid().n_steps());
        pieces.push_back(std::move(cur));
    }

    GridControlledPath out = pieces.front();
    for (std::size_t p = 1; p < pieces.size(); ++p) {
        // Junctions agree by construction of the restart value; enforce the
        // exact-match precondition of concat_cp.
        const int nl = out.grid().n_steps();
        GridControlledPath& nxt = pieces[p];
        std::vector<Vec> vals(nxt.values());
        std::vector<Mat> gubs(nxt.gubinellis());
        vals[0] = out.value(nl);
        gubs[0] = out.gubinelli(nl);
        nxt = GridControlledPath(nxt.reference_ptr(), std::move(vals), std::move(gubs));
        out = concat_cp(out, nxt);
    }
    return out;
}

double apriori_bracket(const VectorFieldSet& vfs, const GridRoughPath& rp, double beta,
                       long pair_budget) {
    if (!vfs.flag_c3b)
        throw std::invalid_argument("apriori_bracket: sigma norm metadata missing");
    const double nx = vfs.sigma_c3b * homogeneous_norm(rp, rp.alpha(), pair_budget);
    return std::pow(nx, 1.0 / beta) + nx + vfs.f_inf;
}

StabilityGap stability_gap(const VectorFieldSet& vfs_f, const VectorFieldSet& vfs_ftilde,
                           const SmoothMap& g, RoughPathPtr rp, const Vec& xi,
                           double beta, double nu, long pair_budget) {
    GridControlledPath y = solve_rde(vfs_f, rp, xi);
    GridControlledPath yt = solve_rde(vfs_ftilde, rp, xi);

    const int np = rp->grid().n_points();
    const double h = rp->grid().step();

    // Difference integrand sigma(Y) - sigma(Y~), integrated against X.
    RoughIntegrand ia = controlled_sigma_integrand(y, vfs_f.sigma, vfs_f.sigma_deriv);
    RoughIntegrand ib = controlled_sigma_integrand(yt, vfs_f.sigma, vfs_f.sigma_deriv);
    RoughIntegrand diff;
    diff.reference = rp;
    diff.values.resize(np);
    diff.gubinelli.resize(np);
    for (int k = 0; k < np; ++k) {
        diff.values[k] = ia.values[k] - ib.values[k];
        diff.gubinelli[k] = ia.gubinelli[k] - ib.gubinelli[k];
    }
    GridControlledPath sigma_int = rough_integral(diff, 0, np - 1).as_cp;

    StabilityGap out;
    out.m_path.resize(np);
    Vec drift_acc = Vec::Zero(vfs_f.state_dim);
    for (int k = 0; k < np; ++k) {
        out.m_path[k] = (y.value(k) - yt.value(k)) - drift_acc - sigma_int.value(k);
        if (k < np - 1) drift_acc += (g.value(y.value(k)) - g.value(yt.value(k))) * h;
    }

    const Grid& grid = rp->grid();
    out.gap_norm = hoelder_seminorm(
        grid,
        [&](int i, int k) {
            return ((y.value(k) - yt.value(k)) - (y.value(i) - yt.value(i))).norm();
        },
        beta, pair_budget);
    out.m_norm = hoelder_seminorm(
        grid, [&](int i, int k) { return (out.m_path[k] - out.m_path[i]).norm(); },
        std::min(1.0, 2.0 * beta), pair_budget);
    out.exp_bracket = std::exp(std::pow(homogeneous_norm(*rp, rp->alpha(), pair_budget), nu));
    return out;
}

}  // namespace rf
