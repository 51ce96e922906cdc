#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "rf/grid.hpp"

namespace rf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// All pairs are scanned when N(N-1)/2 fits the budget; 4e6 covers N <= 2000.
inline constexpr long kDefaultPairBudget = 4'000'000;

// Level-1 values from the origin plus level-2 tensors over consecutive
// cells. Any (s,t) block is reconstructed through the Chen relation, so
// storage is O(N) and reconstructed blocks are consistent by construction.
class GridRoughPath {
public:
    GridRoughPath(int dim, Grid grid, std::vector<Vec> level1,
                  std::vector<Mat> level2_cells, double alpha);

    int dim() const { return dim_; }
    const Grid& grid() const { return grid_; }
    double alpha() const { return alpha_; }

    const Vec& level1(int k) const { return level1_[k]; }
    const Mat& level2_cell(int k) const { return level2_cells_[k]; }
    const std::vector<Vec>& level1_all() const { return level1_; }
    const std::vector<Mat>& level2_cells_all() const { return level2_cells_; }

    // X^1_{t_i, t_k}
    Vec increment(int i, int k) const;

    // X^2_{t_i, t_k} = sum_j [X^2_{t_j,t_{j+1}} + X^1_{t_i,t_j} (x) X^1_{t_j,t_{j+1}}].
    // For k = i+1 this returns the stored cell bit-exactly.
    Mat chen_block(int i, int k) const;

    // delta X = (delta X^1, delta^2 X^2)
    GridRoughPath dilate(double delta) const;

    // Sub-path on [t_i0, t_i1], re-based so level1 starts at zero.
    GridRoughPath restrict(int i0, int i1) const;

private:
    void check_index(int i, int k) const;

    int dim_;
    Grid grid_;
    std::vector<Vec> level1_;        // N+1 entries, level1_[0] = 0
    std::vector<Mat> level2_cells_;  // N entries, dim x dim
    double alpha_;                   // advisory regularity tag
};

using RoughPathPtr = std::shared_ptr<const GridRoughPath>;

// Concatenation: level-1 of `right` is shifted to continue from the end of
// `left`; cells are appended. Grid steps must match.
GridRoughPath concat_rp(const GridRoughPath& left, const GridRoughPath& right);

// Pairs (i,k), i < k, over which discrete seminorms are evaluated:
// all pairs when the count fits the budget, otherwise adjacent pairs plus
// all dyadic spans (i, i+2^j). The truncated scan is a lower-bound
// estimator of the full one.
std::vector<std::pair<int, int>> seminorm_pairs(int n_points,
                                                long pair_budget = kDefaultPairBudget);

// max |field(i,k)| / (t_k - t_i)^gamma over the scanned pairs, where
// `field` returns the norm of the two-parameter increment.
double hoelder_seminorm(const Grid& grid,
                        const std::function<double(int, int)>& field,
                        double gamma, long pair_budget = kDefaultPairBudget);

// Seminorm of a grid path (one-parameter increments Y_k - Y_i).
double path_hoelder_seminorm(const Grid& grid, const std::vector<Vec>& values,
                             double gamma, long pair_budget = kDefaultPairBudget);

// ||X^1||_alpha + ||X^2||_{2 alpha}^{1/2}, both over the same pair set.
// Level-2 blocks use a prefix decomposition of the Chen relation so each
// pair costs O(d^2).
double homogeneous_norm(const GridRoughPath& rp, double alpha,
                        long pair_budget = kDefaultPairBudget);

}  // namespace rf
