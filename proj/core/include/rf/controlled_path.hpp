#pragma once

#include "rf/rough_path.hpp"

namespace rf {

// Twice-differentiable map with evaluators; the Hessian is optional and
// only needed by remainder diagnostics.
struct SmoothMap {
    int in_dim = 0;
    int out_dim = 0;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;                    // out x in
    std::function<Mat(const Vec&, const Vec&)> hessian_apply;   // dir -> out x in, optional
};

// Path values plus Gubinelli derivative on the reference's grid. The
// remainder Y^sharp_{s,t} = Y_{s,t} - Y†_s X^1_{s,t} is defined by
// subtraction.
class GridControlledPath {
public:
    GridControlledPath(RoughPathPtr reference, std::vector<Vec> values,
                       std::vector<Mat> gubinelli);

    int target_dim() const { return static_cast<int>(values_[0].size()); }
    const GridRoughPath& reference() const { return *reference_; }
    RoughPathPtr reference_ptr() const { return reference_; }
    const Grid& grid() const { return reference_->grid(); }

    const Vec& value(int k) const { return values_[k]; }
    const Mat& gubinelli(int k) const { return gubinelli_[k]; }
    const std::vector<Vec>& values() const { return values_; }
    const std::vector<Mat>& gubinellis() const { return gubinelli_; }

    // Y^sharp_{t_i, t_k}
    Vec remainder(int i, int k) const;

private:
    RoughPathPtr reference_;
    std::vector<Vec> values_;     // N+1
    std::vector<Mat> gubinelli_;  // N+1, target_dim x reference dim
};

// g(Y) with Gubinelli derivative grad g(Y) Y†.
GridControlledPath compose_smooth(const SmoothMap& g, const GridControlledPath& cp);

// Concatenation; endpoint values and Gubinelli derivatives must match
// exactly at the junction. The result references concat_rp of the two
// reference paths.
GridControlledPath concat_cp(const GridControlledPath& left,
                             const GridControlledPath& right);

}  // namespace rf
