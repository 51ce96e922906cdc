#include "rf/controlled_path.hpp"

#include <cmath>

namespace rf {

GridControlledPath::GridControlledPath(RoughPathPtr reference, std::vector<Vec> values,
                                       std::vector<Mat> gubinelli)
    : reference_(std::move(reference)), values_(std::move(values)),
      gubinelli_(std::move(gubinelli)) {
    if (!reference_) throw std::invalid_argument("GridControlledPath: null reference");
    const int np = reference_->grid().n_points();
    if (static_cast<int>(values_.size()) != np ||
        static_cast<int>(gubinelli_.size()) != np)
        throw std::invalid_argument("GridControlledPath: array length must match grid");
    const auto w = values_[0].size();
    for (const auto& v : values_)
        if (v.size() != w) throw std::invalid_argument("GridControlledPath: value dim mismatch");
    for (const auto& m : gubinelli_)
        if (m.rows() != w || m.cols() != reference_->dim())
            throw std::invalid_argument("GridControlledPath: gubinelli shape mismatch");
    for (const auto& v : values_)
        if (!v.allFinite())
            throw std::invalid_argument("GridControlledPath: non-finite value");
}

Vec GridControlledPath::remainder(int i, int k) const {
    return values_[k] - values_[i] - gubinelli_[i] * reference_->increment(i, k);
}

GridControlledPath compose_smooth(const SmoothMap& g, const GridControlledPath& cp) {
    if (g.in_dim != cp.target_dim())
        throw std::invalid_argument("compose_smooth: dimension mismatch");
    const int np = cp.grid().n_points();
    std::vector<Vec> values(np);
    std::vector<Mat> gub(np);
    for (int k = 0; k < np; ++k) {
        values[k] = g.value(cp.value(k));
        if (!values[k].allFinite())
            throw std::runtime_error("compose_smooth: evaluator produced non-finite value");
        gub[k] = g.jacobian(cp.value(k)) * cp.gubinelli(k);
    }
    return GridControlledPath(cp.reference_ptr(), std::move(values), std::move(gub));
}

GridControlledPath concat_cp(const GridControlledPath& left,
                             const GridControlledPath& right) {
    const int nl = left.grid().n_steps();
    if ((left.value(nl) - right.value(0)).lpNorm<Eigen::Infinity>() != 0.0 ||
        (left.gubinelli(nl) - right.gubinelli(0)).lpNorm<Eigen::Infinity>() != 0.0)
        throw std::invalid_argument("concat_cp: junction mismatch");
    if (right.grid().n_steps() == 0) return left;
    auto ref = std::make_shared<GridRoughPath>(
        concat_rp(left.reference(), right.reference()));
    const int nr = right.grid().n_steps();
    std::vector<Vec> values(nl + nr + 1);
    std::vector<Mat> gub(nl + nr + 1);
    for (int k = 0; k <= nl; ++k) {
        values[k] = left.value(k);
        gub[k] = left.gubinelli(k);
    }
    for (int k = 1; k <= nr; ++k) {
        values[nl + k] = right.value(k);
        gub[nl + k] = right.gubinelli(k);
    }
    return GridControlledPath(ref, std::move(values), std::move(gub));
}

}  // namespace rf
