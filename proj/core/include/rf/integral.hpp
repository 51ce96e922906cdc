#pragma once

#include "rf/controlled_path.hpp"

namespace rf {

// Row-major flattening of a d x d tensor: e_a (x) e_b -> index a*d + b.
Vec flatten_tensor(const Mat& t);

// Matrix-valued controlled integrand: values are linear maps V -> W
// (w x d matrices), Gubinelli derivatives are bilinear maps V (x) V -> W
// stored as w x d^2 matrices in the flattening above.
struct RoughIntegrand {
    RoughPathPtr reference;
    std::vector<Mat> values;     // N+1 entries, w x d
    std::vector<Mat> gubinelli;  // N+1 entries, w x d^2

    int target_dim() const { return static_cast<int>(values[0].rows()); }
    void validate() const;
};

// J_{t_i, t_{i+1}} = Y_{t_i} X^1 + Y†_{t_i} <X^2> over one cell.
Vec local_summand(const RoughIntegrand& integrand, int i);

struct RoughIntegralResult {
    Vec value;                 // integral over [t_i, t_k]
    GridControlledPath as_cp;  // cumulative integral from t_i, Gubinelli = integrand values
};

// Finest-grid compensated Riemann sum; the grid itself is the partition.
// Accumulation uses Neumaier summation so telescoping identities hold to
// 1e-12 even for long grids.
RoughIntegralResult rough_integral(const RoughIntegrand& integrand, int i, int k);
Vec rough_integral_value(const RoughIntegrand& integrand, int i, int k);

// Riemann zeta on (1, inf) by Euler-Maclaurin, absolute error < 1e-10.
double riemann_zeta(double s);

// kappa_alpha = 2^{3 alpha} zeta(3 alpha), requires 3 alpha > 1.
double kappa(double alpha);

// kappa_alpha (t-s)^{3 alpha} (||Y#||_{2a} ||X^1||_a + ||Y†||_a ||X^2||_{2a})
double integral_error_bound(double y_sharp_2a, double y_dagger_a, double x1_a,
                            double x2_2a, double alpha, double s, double t);

// Integrand sigma(Y) for an RDE-type controlled path: values sigma(Y_k),
// Gubinelli <v (x) v'> = [D sigma(Y_k) in direction Y†_k v] v'.
RoughIntegrand controlled_sigma_integrand(
    const GridControlledPath& cp,
    const std::function<Mat(const Vec&)>& sigma,
    const std::function<Mat(const Vec&, const Vec&)>& sigma_deriv);

}  // namespace rf
