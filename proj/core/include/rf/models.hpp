#pragma once

#include <map>
#include <string>

#include "rf/frozen.hpp"

namespace rf {

// One registered benchmark: the coupled coefficients, the frozen fast
// equation (with closed forms when available), and default initial data.
struct ModelBundle {
    std::string name;
    SlowFastCoeffs coeffs;
    FrozenModel frozen;
    Vec x0;
    Vec y0;
};

// Registry:
//   "ou_sine": g = -(y - c0 x), h = h0 constant, f = sin y,
//              sigma(x) = 1 + sigma_cos * cos x; invariant law N(c0 x, h0^2/2),
//              fbar(x) = exp(-h0^2/4) sin(c0 x).
//   "cubic":   g = -lambda(x) y |y|^2 - phi(x) y with phi >= kappa > 0,
//              same f, h, sigma; no closed forms.
// Recognized params (defaults): c0 = 1, h0 = 1, sigma_cos = 0.5, f_amp = 1
// (slow-drift amplitude, "ou_sine" only).
ModelBundle make_model(const std::string& name,
                       const std::map<std::string, double>& params = {});

std::vector<std::string> model_names();

}  // namespace rf
