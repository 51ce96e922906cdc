#include "rf/rough_path.hpp"

#include <algorithm>
#include <cmath>

namespace rf {

GridRoughPath::GridRoughPath(int dim, Grid grid, std::vector<Vec> level1,
                             std::vector<Mat> level2_cells, double alpha)
    : dim_(dim), grid_(grid), level1_(std::move(level1)),
      level2_cells_(std::move(level2_cells)), alpha_(alpha) {
    if (dim_ < 1) throw std::invalid_argument("GridRoughPath: dim must be positive");
    const int n = grid_.n_steps();
    if (static_cast<int>(level1_.size()) != n + 1)
        throw std::invalid_argument("GridRoughPath: level1 must have N+1 entries");
    if (static_cast<int>(level2_cells_.size()) != n)
        throw std::invalid_argument("GridRoughPath: level2_cells must have N entries");
    if (level1_[0].size() != dim_ || level1_[0].lpNorm<Eigen::Infinity>() != 0.0)
        throw std::invalid_argument("GridRoughPath: level1[0] must be the zero vector");
    for (const auto& v : level1_)
        if (v.size() != dim_) throw std::invalid_argument("GridRoughPath: level1 dim mismatch");
    for (const auto& m : level2_cells_)
        if (m.rows() != dim_ || m.cols() != dim_)
            throw std::invalid_argument("GridRoughPath: level2 cell dim mismatch");
}

void GridRoughPath::check_index(int i, int k) const {
    if (i < 0 || k > grid_.n_steps() || i > k)
        throw std::out_of_range("GridRoughPath: index pair out of range");
}

Vec GridRoughPath::increment(int i, int k) const {
    check_index(std::min(i, k), std::max(i, k));
    return level1_[k] - level1_[i];
}

Mat GridRoughPath::chen_block(int i, int k) const {
    check_index(i, k);
    Mat block = Mat::Zero(dim_, dim_);
    for (int j = i; j < k; ++j) {
        block += level2_cells_[j];
        block += (level1_[j] - level1_[i]) * (level1_[j + 1] - level1_[j]).transpose();
    }
    return block;
}

GridRoughPath GridRoughPath::dilate(double delta) const {
    std::vector<Vec> l1(level1_.size());
    std::vector<Mat> l2(level2_cells_.size());
    const double d2 = delta * delta;
    for (std::size_t k = 0; k < level1_.size(); ++k) l1[k] = delta * level1_[k];
    for (std::size_t k = 0; k < level2_cells_.size(); ++k) l2[k] = d2 * level2_cells_[k];
    return GridRoughPath(dim_, grid_, std::move(l1), std::move(l2), alpha_);
}

GridRoughPath GridRoughPath::restrict(int i0, int i1) const {
    check_index(i0, i1);
    if (i0 == i1) throw std::invalid_argument("GridRoughPath::restrict: empty range");
    std::vector<Vec> l1(i1 - i0 + 1);
    std::vector<Mat> l2(i1 - i0);
    for (int k = i0; k <= i1; ++k) l1[k - i0] = level1_[k] - level1_[i0];
    for (int k = i0; k < i1; ++k) l2[k - i0] = level2_cells_[k];
    Grid sub(grid_.step() * (i1 - i0), i1 - i0);
    return GridRoughPath(dim_, sub, std::move(l1), std::move(l2), alpha_);
}

GridRoughPath concat_rp(const GridRoughPath& left, const GridRoughPath& right) {
    if (left.dim() != right.dim())
        throw std::invalid_argument("concat_rp: dimension mismatch");
    if (right.grid().n_steps() == 0) return left;
    if (left.grid().n_steps() == 0) return right;
    if (std::abs(left.grid().step() - right.grid().step()) > 1e-14 * left.grid().step())
        throw std::invalid_argument("concat_rp: grid step mismatch");
    const int nl = left.grid().n_steps(), nr = right.grid().n_steps();
    std::vector<Vec> l1(nl + nr + 1);
    std::vector<Mat> l2(nl + nr);
    for (int k = 0; k <= nl; ++k) l1[k] = left.level1(k);
    const Vec base = left.level1(nl);
    for (int k = 1; k <= nr; ++k) l1[nl + k] = base + right.level1(k);
    for (int k = 0; k < nl; ++k) l2[k] = left.level2_cell(k);
    for (int k = 0; k < nr; ++k) l2[nl + k] = right.level2_cell(k);
    Grid grid(left.grid().horizon() + right.grid().horizon(), nl + nr);
    return GridRoughPath(left.dim(), grid, std::move(l1), std::move(l2),
                         std::min(left.alpha(), right.alpha()));
}

std::vector<std::pair<int, int>> seminorm_pairs(int n_points, long pair_budget) {
    if (n_points < 2) throw std::invalid_argument("seminorm_pairs: empty grid");
    const int n = n_points - 1;  // number of steps
    std::vector<std::pair<int, int>> pairs;
    const long full = static_cast<long>(n_points) * (n_points - 1) / 2;
    if (full <= pair_budget) {
        pairs.reserve(full);
        for (int i = 0; i < n_points; ++i)
            for (int k = i + 1; k < n_points; ++k) pairs.emplace_back(i, k);
        return pairs;
    }
    // Adjacent pairs plus dyadic spans: documented lower-bound estimator.
    for (int i = 0; i < n; ++i) pairs.emplace_back(i, i + 1);
    for (int span = 2; span <= n; span *= 2)
        for (int i = 0; i + span <= n; ++i) pairs.emplace_back(i, i + span);
    if (pairs.empty() || pairs.back() != std::make_pair(0, n)) pairs.emplace_back(0, n);
    return pairs;
}

double hoelder_seminorm(const Grid& grid,
                        const std::function<double(int, int)>& field,
                        double gamma, long pair_budget) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("hoelder_seminorm: gamma must be in (0,1]");
    double best = 0.0;
    for (const auto& [i, k] : seminorm_pairs(grid.n_points(), pair_budget)) {
        const double dt = grid.time(k) - grid.time(i);
        best = std::max(best, field(i, k) / std::pow(dt, gamma));
    }
    return best;
}

double path_hoelder_seminorm(const Grid& grid, const std::vector<Vec>& values,
                             double gamma, long pair_budget) {
    if (static_cast<int>(values.size()) != grid.n_points())
        throw std::invalid_argument("path_hoelder_seminorm: size mismatch");
    return hoelder_seminorm(
        grid, [&](int i, int k) { return (values[k] - values[i]).norm(); }, gamma,
        pair_budget);
}

double homogeneous_norm(const GridRoughPath& rp, double alpha, long pair_budget) {
    const Grid& grid = rp.grid();
    const int n = grid.n_steps();

    // Prefix blocks P_k = X^2_{0, t_k}; then
    // X^2_{i,k} = P_k - P_i - X^1_{0,i} (x) X^1_{i,k}.
    std::vector<Mat> prefix(n + 1);
    prefix[0] = Mat::Zero(rp.dim(), rp.dim());
    for (int j = 0; j < n; ++j)
        prefix[j + 1] = prefix[j] + rp.level2_cell(j) +
                        rp.level1(j) * (rp.level1(j + 1) - rp.level1(j)).transpose();

    double norm1 = 0.0, norm2 = 0.0;
    for (const auto& [i, k] : seminorm_pairs(grid.n_points(), pair_budget)) {
        const double dt = grid.time(k) - grid.time(i);
        const Vec inc = rp.level1(k) - rp.level1(i);
        norm1 = std::max(norm1, inc.norm() / std::pow(dt, alpha));
        const Mat block = prefix[k] - prefix[i] - rp.level1(i) * inc.transpose();
        norm2 = std::max(norm2, block.norm() / std::pow(dt, 2.0 * alpha));
    }
    return norm1 + std::sqrt(norm2);
}

}  // namespace rf
