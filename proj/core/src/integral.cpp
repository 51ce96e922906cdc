#include "rf/integral.hpp"

#include <cmath>

namespace rf {

Vec flatten_tensor(const Mat& t) {
    const int d = static_cast<int>(t.rows());
    Vec out(d * t.cols());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < t.cols(); ++b) out(a * t.cols() + b) = t(a, b);
    return out;
}

void RoughIntegrand::validate() const {
    if (!reference) throw std::invalid_argument("RoughIntegrand: null reference");
    const int np = reference->grid().n_points();
    const int d = reference->dim();
    if (static_cast<int>(values.size()) != np ||
        static_cast<int>(gubinelli.size()) != np)
        throw std::invalid_argument("RoughIntegrand: array length must match grid");
    const auto w = values[0].rows();
    for (const auto& m : values)
        if (m.rows() != w || m.cols() != d)
            throw std::invalid_argument("RoughIntegrand: value shape mismatch");
    for (const auto& m : gubinelli)
        if (m.rows() != w || m.cols() != static_cast<long>(d) * d)
            throw std::invalid_argument("RoughIntegrand: gubinelli shape mismatch");
}

Vec local_summand(const RoughIntegrand& integrand, int i) {
    const GridRoughPath& rp = *integrand.reference;
    if (i < 0 || i >= rp.grid().n_steps())
        throw std::out_of_range("local_summand: cell index out of range");
    return integrand.values[i] * rp.increment(i, i + 1) +
           integrand.gubinelli[i] * flatten_tensor(rp.level2_cell(i));
}

namespace {

// Neumaier compensated accumulation, componentwise.
struct CompensatedSum {
    Vec sum, comp;
    explicit CompensatedSum(long dim) : sum(Vec::Zero(dim)), comp(Vec::Zero(dim)) {}
    void add(const Vec& x) {
        for (long c = 0; c < sum.size(); ++c) {
            const double t = sum(c) + x(c);
            if (std::abs(sum(c)) >= std::abs(x(c)))
                comp(c) += (sum(c) - t) + x(c);
            else
                comp(c) += (x(c) - t) + sum(c);
            sum(c) = t;
        }
    }
    Vec total() const { return sum + comp; }
};

}  // namespace

RoughIntegralResult rough_integral(const RoughIntegrand& integrand, int i, int k) {
    integrand.validate();
    const GridRoughPath& rp = *integrand.reference;
    if (i < 0 || k > rp.grid().n_steps() || i > k)
        throw std::out_of_range("rough_integral: index range invalid");

    const long w = integrand.values[0].rows();
    const int np = rp.grid().n_points();
    std::vector<Mat> gub(np);
    for (int j = 0; j < np; ++j) gub[j] = integrand.values[j];

    // One global prefix pass; interval values are prefix differences, so
    // additivity over subintervals holds bit-exactly.
    std::vector<Vec> prefix(np, Vec::Zero(w));
    CompensatedSum acc(w);
    for (int j = 0; j < np - 1; ++j) {
        acc.add(local_summand(integrand, j));
        prefix[j + 1] = acc.total();
    }
    std::vector<Vec> path(np);
    for (int j = 0; j < np; ++j) path[j] = prefix[j] - prefix[i];
    Vec value = path[k];
    if (!value.allFinite())
        throw std::runtime_error("rough_integral: non-finite accumulation");
    return RoughIntegralResult{std::move(value),
                               GridControlledPath(integrand.reference, std::move(path),
                                                  std::move(gub))};
}

Vec rough_integral_value(const RoughIntegrand& integrand, int i, int k) {
    const GridRoughPath& rp = *integrand.reference;
    if (i < 0 || k > rp.grid().n_steps() || i > k)
        throw std::out_of_range("rough_integral_value: index range invalid");
    CompensatedSum acc(integrand.values[0].rows());
    for (int j = i; j < k; ++j) acc.add(local_summand(integrand, j));
    Vec v = acc.total();
    if (!v.allFinite())
        throw std::runtime_error("rough_integral_value: non-finite accumulation");
    return v;
}

double riemann_zeta(double s) {
    if (!(s > 1.0)) throw std::invalid_argument("riemann_zeta: need s > 1");
    // Euler-Maclaurin with n = 64 terms and three correction terms; the
    // remainder is far below 1e-10 for s >= 1.001.
    const int n = 64;
    double sum = 0.0;
    for (int k = 1; k < n; ++k) sum += std::pow(static_cast<double>(k), -s);
    const double ns = std::pow(static_cast<double>(n), -s);
    sum += ns / 2.0;
    sum += static_cast<double>(n) * ns / (s - 1.0);
    sum += s * ns / (12.0 * n);
    sum -= s * (s + 1.0) * (s + 2.0) * ns / (720.0 * n * n * n);
    sum += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ns /
           (30240.0 * std::pow(static_cast<double>(n), 5));
    return sum;
}

double kappa(double alpha) {
    if (!(3.0 * alpha > 1.0)) throw std::invalid_argument("kappa: need alpha > 1/3");
    return std::pow(2.0, 3.0 * alpha) * riemann_zeta(3.0 * alpha);
}

double integral_error_bound(double y_sharp_2a, double y_dagger_a, double x1_a,
                            double x2_2a, double alpha, double s, double t) {
    if (y_sharp_2a < 0 || y_dagger_a < 0 || x1_a < 0 || x2_2a < 0)
        throw std::invalid_argument("integral_error_bound: negative norm");
    if (t == s) return 0.0;
    return kappa(alpha) * std::pow(t - s, 3.0 * alpha) *
           (y_sharp_2a * x1_a + y_dagger_a * x2_2a);
}

RoughIntegrand controlled_sigma_integrand(
    const GridControlledPath& cp,
    const std::function<Mat(const Vec&)>& sigma,
    const std::function<Mat(const Vec&, const Vec&)>& sigma_deriv) {
    const int np = cp.grid().n_points();
    const int d = cp.reference().dim();
    RoughIntegrand out;
    out.reference = cp.reference_ptr();
    out.values.resize(np);
    out.gubinelli.resize(np);
    for (int k = 0; k < np; ++k) {
        const Vec& y = cp.value(k);
        out.values[k] = sigma(y);
        const long w = out.values[k].rows();
        Mat g(w, static_cast<long>(d) * d);
        for (int a = 0; a < d; ++a) {
            const Mat da = sigma_deriv(y, cp.gubinelli(k).col(a));
            for (int b = 0; b < d; ++b) g.col(a * d + b) = da.col(b);
        }
        out.gubinelli[k] = std::move(g);
    }
    return out;
}

}  // namespace rf
