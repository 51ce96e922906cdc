#include "rf/models.hpp"

#include <cmath>

namespace rf {

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

Mat scalar_mat(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

ModelBundle make_ou_sine(const std::map<std::string, double>& params) {
    const double c0 = param(params, "c0", 1.0);
    const double h0 = param(params, "h0", 1.0);
    const double amp = param(params, "sigma_cos", 0.5);
    const double f_amp = param(params, "f_amp", 1.0);

    ModelBundle m;
    m.name = "ou_sine";
    SlowFastCoeffs& c = m.coeffs;
    c.slow_dim = c.fast_dim = c.slow_noise_dim = c.fast_noise_dim = 1;
    c.f = [f_amp](const Vec&, const Vec& y) {
        return Vec::Constant(1, f_amp * std::sin(y(0)));
    };
    c.g = [c0](const Vec& x, const Vec& y) {
        return Vec::Constant(1, -(y(0) - c0 * x(0)));
    };
    c.h = [h0](const Vec&, const Vec&) { return scalar_mat(h0); };
    c.sigma = [amp](const Vec& x) { return scalar_mat(1.0 + amp * std::cos(x(0))); };
    c.sigma_deriv = [amp](const Vec& x, const Vec& dir) {
        return scalar_mat(-amp * std::sin(x(0)) * dir(0));
    };
    c.h_deriv_x = [](const Vec&, const Vec&, const Vec&) { return scalar_mat(0.0); };
    c.h_deriv_y = [](const Vec&, const Vec&, const Vec&) { return scalar_mat(0.0); };

    // 2 y g = -2 y^2 + 2 c0 x y <= -y^2 + c0^2 x^2, so gamma1 = 1, eta3 = 2.
    // Monotonicity: 2 (y1-y2)(g1-g2) = -2 |y1-y2|^2 with h constant.
    c.meta.gamma1 = 1.0;
    c.meta.gamma2 = 2.0;
    c.meta.eta1 = 1.0;
    c.meta.eta2 = 1.0;
    c.meta.eta3 = 2.0;
    c.meta.q = 4.0;
    c.meta.r = 1.0;
    c.meta.lip_f = std::abs(f_amp);
    c.meta.f_inf = std::abs(f_amp);
    c.meta.sigma_c3b = 1.0 + amp;
    c.meta.lip_g = std::max(1.0, std::abs(c0));
    c.meta.lip_h = 0.0;

    FrozenClosedForm cf;
    cf.fbar = [c0, h0, f_amp](const Vec& x) {
        return Vec::Constant(1, f_amp * std::exp(-h0 * h0 / 4.0) * std::sin(c0 * x(0)));
    };
    cf.invariant_mean = [c0](const Vec& x) { return Vec::Constant(1, c0 * x(0)); };
    cf.invariant_cov = [h0](const Vec&) { return scalar_mat(h0 * h0 / 2.0); };
    m.frozen = frozen_model(c, cf);

    m.x0 = Vec::Constant(1, 1.0);
    m.y0 = Vec::Zero(1);
    return m;
}

ModelBundle make_cubic(const std::map<std::string, double>& params) {
    const double h0 = param(params, "h0", 1.0);
    const double amp = param(params, "sigma_cos", 0.5);

    ModelBundle m;
    m.name = "cubic";
    SlowFastCoeffs& c = m.coeffs;
    c.slow_dim = c.fast_dim = c.slow_noise_dim = c.fast_noise_dim = 1;
    c.f = [](const Vec&, const Vec& y) { return Vec::Constant(1, std::sin(y(0))); };
    // lambda(x) >= 3/4 > 0 and phi(x) >= 1/2 =: kappa > 0.
    c.g = [](const Vec& x, const Vec& y) {
        const double lam = 1.0 + 0.25 * std::sin(x(0));
        const double phi = 1.0 + 0.5 * std::cos(x(0));
        return Vec::Constant(1, -lam * y(0) * y(0) * y(0) - phi * y(0));
    };
    c.h = [h0](const Vec&, const Vec&) { return scalar_mat(h0); };
    c.sigma = [amp](const Vec& x) { return scalar_mat(1.0 + amp * std::cos(x(0))); };
    c.sigma_deriv = [amp](const Vec& x, const Vec& dir) {
        return scalar_mat(-amp * std::sin(x(0)) * dir(0));
    };
    c.h_deriv_x = [](const Vec&, const Vec&, const Vec&) { return scalar_mat(0.0); };
    c.h_deriv_y = [](const Vec&, const Vec&, const Vec&) { return scalar_mat(0.0); };

    // 2 (y1-y2)(g1-g2) <= -2 phi |y1-y2|^2 <= -|y1-y2|^2 (cubic part monotone).
    c.meta.gamma1 = 1.0;
    c.meta.gamma2 = 1.0;
    c.meta.eta1 = 1.0;
    c.meta.eta2 = 1.0;
    c.meta.eta3 = 0.0;
    c.meta.q = 8.0;
    c.meta.r = 3.0;
    c.meta.lip_f = 1.0;
    c.meta.f_inf = 1.0;
    c.meta.sigma_c3b = 1.0 + amp;
    c.meta.lip_g = 0.0;  // only locally Lipschitz
    c.meta.lip_h = 0.0;

    m.frozen = frozen_model(c);
    m.x0 = Vec::Constant(1, 1.0);
    m.y0 = Vec::Zero(1);
    return m;
}

}  // namespace

ModelBundle make_model(const std::string& name,
                       const std::map<std::string, double>& params) {
    if (name == "ou_sine") return make_ou_sine(params);
    if (name == "cubic") return make_cubic(params);
    throw std::invalid_argument("make_model: unknown model '" + name + "'");
}

std::vector<std::string> model_names() { return {"ou_sine", "cubic"}; }

}  // namespace rf
