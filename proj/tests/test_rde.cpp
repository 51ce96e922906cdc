#include <doctest.h>

#include <cmath>

#include "rf/lifts.hpp"
#include "rf/rde.hpp"

using namespace rf;

namespace {

// t -> t on [0, T] with the geometric second level (t-s)^2/2.
RoughPathPtr linear_rp(double horizon, int n) {
    const Grid grid(horizon, n);
    std::vector<Vec> l1(n + 1);
    std::vector<Mat> l2(n, Mat::Constant(1, 1, grid.step() * grid.step() / 2.0));
    for (int k = 0; k <= n; ++k) l1[k] = Vec::Constant(1, grid.time(k));
    return std::make_shared<GridRoughPath>(1, grid, std::move(l1), std::move(l2), 0.5);
}

RoughPathPtr zero_rp(double horizon, int n) {
    std::vector<Vec> l1(n + 1, Vec::Zero(1));
    std::vector<Mat> l2(n, Mat::Zero(1, 1));
    return std::make_shared<GridRoughPath>(1, Grid(horizon, n), std::move(l1),
                                           std::move(l2), 0.5);
}

RoughPathPtr brownian_rp(int dim, int n, std::uint64_t stream, double scale = 1.0) {
    NoiseSpec spec;
    spec.kind = NoiseKind::brownian_strat;
    spec.dim = dim;
    spec.seed = 404;
    spec.stream_id = stream;
    GridRoughPath rp = make_lift(spec, Grid(1.0, n)).rp;
    return std::make_shared<GridRoughPath>(rp.dilate(scale));
}

VectorFieldSet linear_vfs() {
    VectorFieldSet vfs;
    vfs.state_dim = 1;
    vfs.noise_dim = 1;
    vfs.sigma = [](const Vec& y) { return Mat::Constant(1, 1, y(0)); };
    vfs.sigma_deriv = [](const Vec&, const Vec& dir) {
        return Mat::Constant(1, 1, dir(0));
    };
    vfs.drift = [](const Vec&, const Vec&) { return Vec::Zero(1); };
    return vfs;
}

VectorFieldSet sine_vfs() {
    VectorFieldSet vfs;
    vfs.state_dim = 1;
    vfs.noise_dim = 1;
    vfs.sigma = [](const Vec& y) { return Mat::Constant(1, 1, std::sin(y(0))); };
    vfs.sigma_deriv = [](const Vec& y, const Vec& dir) {
        return Mat::Constant(1, 1, std::cos(y(0)) * dir(0));
    };
    vfs.drift = [](const Vec&, const Vec&) { return Vec::Zero(1); };
    vfs.sigma_c3b = 1.0;
    vfs.flag_c3b = true;
    vfs.flag_f_bounded_lipschitz = true;
    vfs.lip_f = 0.0;
    vfs.f_inf = 0.0;
    return vfs;
}

VectorFieldSet ode_vfs(std::function<Vec(const Vec&)> f) {
    VectorFieldSet vfs;
    vfs.state_dim = 1;
    vfs.noise_dim = 1;
    vfs.sigma = [](const Vec&) { return Mat::Zero(1, 1); };
    vfs.sigma_deriv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    vfs.drift = [f](const Vec& y, const Vec&) { return f(y); };
    return vfs;
}

}  // namespace

TEST_CASE("rough_euler_step hand cases") {
    const VectorFieldSet vfs = linear_vfs();
    const Vec y = Vec::Constant(1, 1.0);
    // 1 + 1*0.1 + 1*0.005 = 1.105.
    Vec out = rough_euler_step(y, vfs, Vec::Constant(1, 0.1),
                               Mat::Constant(1, 1, 0.005), 0.25, Vec());
    CHECK(out(0) == doctest::Approx(1.105).epsilon(1e-14));

    // Zero input leaves the state unchanged.
    out = rough_euler_step(y, vfs, Vec::Zero(1), Mat::Zero(1, 1), 0.25, Vec());
    CHECK(out(0) == 1.0);

    // sigma = 0 reduces to the Euler ODE step.
    const VectorFieldSet ode = ode_vfs([](const Vec& v) { return Vec(-v); });
    out = rough_euler_step(y, ode, Vec::Constant(1, 0.3), Mat::Constant(1, 1, 0.1),
                           0.25, Vec());
    CHECK(out(0) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("solve_rde ODE oracle exp(-t)") {
    const VectorFieldSet ode = ode_vfs([](const Vec& v) { return Vec(-v); });
    double prev_err = 1e9;
    for (int n : {128, 512, 2048}) {
        const GridControlledPath y = solve_rde(ode, zero_rp(1.0, n), Vec::Constant(1, 1.0));
        const double err = std::abs(y.value(n)(0) - std::exp(-1.0));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-3);
}

TEST_CASE("solve_rde linear equation oracle") {
    const VectorFieldSet vfs = linear_vfs();
    // dY = Y dX with x_t = t: Y_T = xi e^{T}.
    double prev_err = 1e9;
    for (int n : {256, 512, 1024, 2048, 4096}) {
        const GridControlledPath y = solve_rde(vfs, linear_rp(1.0, n), Vec::Constant(1, 2.0));
        const double err = std::abs(y.value(n)(0) - 2.0 * std::exp(1.0));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-3);

    // Gubinelli derivative is sigma(Y) along the path.
    const GridControlledPath y = solve_rde(vfs, linear_rp(1.0, 64), Vec::Constant(1, 2.0));
    for (int k : {0, 17, 64})
        CHECK(y.gubinelli(k)(0, 0) == y.value(k)(0));
}

TEST_CASE("solve_rde constant path for zero fields") {
    VectorFieldSet vfs = ode_vfs([](const Vec&) { return Vec(Vec::Zero(1)); });
    const GridControlledPath y =
        solve_rde(vfs, brownian_rp(1, 64, 3), Vec::Constant(1, 0.7));
    for (int k = 0; k <= 64; ++k) CHECK(y.value(k)(0) == 0.7);
}

TEST_CASE("flow property holds to rounding accuracy") {
    const VectorFieldSet vfs = sine_vfs();
    RoughPathPtr rp = brownian_rp(1, 64, 4);
    const Vec xi = Vec::Constant(1, 0.5);
    const GridControlledPath whole = solve_rde(vfs, rp, xi);

    // restrict() re-bases level 1, so increments match up to one rounding.
    auto tail = std::make_shared<GridRoughPath>(rp->restrict(32, 64));
    const GridControlledPath second = solve_rde(vfs, tail, whole.value(32));
    for (int k = 0; k <= 32; ++k)
        CHECK((second.value(k) - whole.value(32 + k)).norm() < 1e-12);
}

TEST_CASE("picard solver trivial and contraction behavior") {
    const VectorFieldSet vfs = sine_vfs();

    // Zero driver and zero drift: fixed point is the constant path.
    const GridControlledPath triv =
        solve_rde_picard(vfs, zero_rp(1.0, 32), Vec::Constant(1, 1.2), 0.45, 1e-12, 50);
    for (int k = 0; k <= 32; ++k) CHECK(triv.value(k)(0) == doctest::Approx(1.2));

    // Iteration gaps contract at rate <= 3/4 on every window.
    RoughPathPtr rp = brownian_rp(1, 128, 5, 0.8);
    std::vector<std::vector<double>> gaps;
    const GridControlledPath y =
        solve_rde_picard(vfs, rp, Vec::Constant(1, 0.3), 0.45, 1e-12, 60, &gaps);
    CHECK(!gaps.empty());
    for (const auto& window : gaps) {
        for (std::size_t i = 0; i + 1 < window.size(); ++i) {
            if (window[i] > 1e-9)
                CHECK(window[i + 1] <= 0.75 * window[i] + 1e-14);
        }
    }

    // Agreement with the one-step scheme on the same grid.
    const GridControlledPath e = solve_rde(vfs, rp, Vec::Constant(1, 0.3));
    double max_gap = 0.0;
    for (int k = 0; k <= 128; ++k)
        max_gap = std::max(max_gap, (y.value(k) - e.value(k)).norm());
    CHECK(max_gap < 0.05);
}

TEST_CASE("apriori bracket closed forms and envelope") {
    VectorFieldSet vfs = sine_vfs();

    // Zero driver and zero f_inf give a zero bracket.
    CHECK(apriori_bracket(vfs, *zero_rp(1.0, 16), 0.5) == 0.0);

    // Formula consistency against the homogeneous norm.
    RoughPathPtr rp = brownian_rp(1, 64, 6);
    const double nn = homogeneous_norm(*rp, 0.5);
    vfs.f_inf = 0.3;
    const double expect = std::pow(1.0 * nn, 2.0) + 1.0 * nn + 0.3;
    CHECK(apriori_bracket(vfs, *rp, 0.5) == doctest::Approx(expect).epsilon(1e-10));

    // Unit inputs: bracket = 1 + 1 = 2 at beta = 1/2 (checked via scaling).
    vfs.f_inf = 0.0;
    const double scale = 1.0 / nn;
    const GridRoughPath unit = rp->dilate(scale);
    CHECK(apriori_bracket(vfs, unit, 0.5) == doctest::Approx(2.0).epsilon(1e-10));

    // Envelope: solution norm / bracket stays bounded across fresh drivers.
    double c_hat = 0.0;
    std::vector<double> ratios;
    for (int s = 0; s < 20; ++s) {
        RoughPathPtr drv = brownian_rp(1, 64, 100 + s);
        const GridControlledPath y = solve_rde(vfs, drv, Vec::Constant(1, 0.2));
        std::vector<Vec> vals(65);
        for (int k = 0; k <= 64; ++k) vals[k] = y.value(k);
        const double ynorm = path_hoelder_seminorm(drv->grid(), vals, 0.45);
        const double bracket = apriori_bracket(vfs, *drv, 0.45);
        ratios.push_back(ynorm / std::max(bracket, 1e-12));
        if (s < 10) c_hat = std::max(c_hat, ratios.back());
    }
    for (int s = 10; s < 20; ++s) CHECK(ratios[s] <= 2.0 * c_hat + 1e-9);
}

TEST_CASE("stability gap vanishes for equal drifts and grows with perturbation") {
    const VectorFieldSet base = [] {
        VectorFieldSet v = sine_vfs();
        v.drift = [](const Vec& y, const Vec&) { return Vec(-y); };
        v.lip_f = 1.0;
        return v;
    }();
    SmoothMap g{1, 1, [](const Vec& y) { return Vec(-y); },
                [](const Vec&) { return Mat::Constant(1, 1, -1.0); }, {}};
    RoughPathPtr rp = brownian_rp(1, 128, 7, 0.6);
    const Vec xi = Vec::Constant(1, 0.4);

    const StabilityGap same = stability_gap(base, base, g, rp, xi, 0.45);
    CHECK(same.gap_norm == 0.0);
    CHECK(same.m_norm == 0.0);
    CHECK(same.exp_bracket >= 1.0);

    auto perturbed = [&](double a) {
        VectorFieldSet v = base;
        v.drift = [a](const Vec& y, const Vec&) { return Vec(-y + Vec::Constant(1, a)); };
        return v;
    };
    const StabilityGap big = stability_gap(base, perturbed(0.2), g, rp, xi, 0.45);
    const StabilityGap small = stability_gap(base, perturbed(0.1), g, rp, xi, 0.45);
    CHECK(big.gap_norm > small.gap_norm);
    CHECK(small.gap_norm > 0.0);
    CHECK(big.m_norm > 0.0);
}

TEST_CASE("explosion raises a numerical error") {
    const VectorFieldSet cubic = ode_vfs([](const Vec& y) { return Vec(y.array().pow(3)); });
    CHECK_THROWS_AS(solve_rde(cubic, zero_rp(4.0, 4), Vec::Constant(1, 10.0)),
                    ExplosionError);
}
