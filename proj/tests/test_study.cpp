#include <doctest.h>

#include <cmath>

#include "rf/study.hpp"

using namespace rf;

namespace {

Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

MicroPath sample_w(const Grid& grid, std::uint64_t seed, int substeps = 4) {
    NoiseSpec ws;
    ws.kind = NoiseKind::brownian_ito;
    ws.dim = 1;
    ws.seed = seed;
    ws.stream_id = 7;
    ws.substeps = substeps;
    return sample_brownian_micro(ws, grid);
}

}  // namespace

TEST_CASE("floor_to_block basics") {
    CHECK(floor_to_block(0.0, 0.1) == 0.0);
    CHECK(floor_to_block(0.1, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(floor_to_block(0.37, 0.1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(floor_to_block(5.0, 2.0) == 4.0);
    CHECK_THROWS(floor_to_block(1.0, 0.0));
}

TEST_CASE("delta schedule closed forms and clamping") {
    // epsilon = 1/e, beta = 1/2: e^{-1/2} * 1 = 0.60653...
    CHECK(delta_schedule(std::exp(-1.0), 0.5, DeltaMode::theory) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    // epsilon = 0.01, beta = 0.45: 0.01^{1/1.8} log(100) = 0.35656...
    CHECK(delta_schedule(0.01, 0.45, DeltaMode::theory) ==
          doctest::Approx(std::pow(0.01, 1.0 / 1.8) * std::log(100.0)).epsilon(1e-12));
    CHECK(delta_schedule(0.01, 0.45, DeltaMode::theory) ==
          doctest::Approx(0.35656).epsilon(1e-4));

    // Fixed mode passes through; theory mode rejects epsilon >= 1.
    CHECK(delta_schedule(0.5, 0.4, DeltaMode::fixed, 0.123) == 0.123);
    CHECK_THROWS(delta_schedule(1.0, 0.4, DeltaMode::theory));
    CHECK_THROWS(delta_schedule(0.0, 0.4, DeltaMode::theory));

    // Upper clamp to horizon/2 and lower clamp just above the grid step.
    bool clamped = false;
    CHECK(delta_schedule(std::exp(-1.0), 0.5, DeltaMode::theory, 0.0, 0.0, 1.0,
                         &clamped) == 0.5);
    CHECK(clamped);
    const double lo = delta_schedule(1e-4, 0.4, DeltaMode::theory, 0.0, 0.05, 1.0,
                                     &clamped);
    CHECK(clamped);
    CHECK(lo > 0.05);
    CHECK(lo < 0.05 + 1e-12);
}

TEST_CASE("fit_loglog recovers synthetic power laws") {
    std::vector<double> xs = {0.5, 0.1, 0.02, 0.004};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.7 * std::pow(x, 1.3));
    const auto [slope, intercept] = fit_loglog(xs, ys);
    CHECK(slope == doctest::Approx(1.3).epsilon(1e-10));
    CHECK(std::exp(intercept) == doctest::Approx(3.7).epsilon(1e-10));
    CHECK_THROWS(fit_loglog({1.0}, {1.0}));
    CHECK_THROWS(fit_loglog({1.0, -1.0}, {1.0, 1.0}));
}

TEST_CASE("khasminskii auxiliary process oracle") {
    const ModelBundle m = make_model("ou_sine");
    const Grid grid(1.0, 20);
    const MicroPath w = sample_w(grid, 12345);
    const double epsilon = 0.5;

    // A synthetic slow path on the macro nodes.
    std::vector<Vec> x_path(21);
    for (int k = 0; k <= 20; ++k) x_path[k] = Vec::Constant(1, 1.0 + 0.1 * k);

    // delta >= T freezes the slow argument at x_path[0]; replicate the
    // Euler-Maruyama recursion directly.
    const std::vector<Vec> aux =
        khasminskii_aux(m.coeffs, x_path, w, epsilon, 2.0, Vec::Zero(1));
    Vec y = Vec::Zero(1);
    const double dt = w.micro_step();
    const double inv_eps = 1.0 / epsilon;
    const double inv_sqrt_eps = 1.0 / std::sqrt(epsilon);
    for (int k = 0; k < 20; ++k) {
        for (int j = 4 * k; j < 4 * (k + 1); ++j)
            y += m.coeffs.g(x_path[0], y) * (dt * inv_eps) +
                 inv_sqrt_eps * (m.coeffs.h(x_path[0], y) * w.increment(j));
        CHECK((aux[k + 1] - y).norm() == 0.0);
    }

    // x-independent coefficients: the output does not depend on delta.
    SlowFastCoeffs indep = m.coeffs;
    indep.g = [](const Vec&, const Vec& yv) { return Vec(-yv); };
    const std::vector<Vec> a =
        khasminskii_aux(indep, x_path, w, epsilon, 0.05, Vec::Zero(1));
    const std::vector<Vec> b =
        khasminskii_aux(indep, x_path, w, epsilon, 0.7, Vec::Zero(1));
    for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);

    CHECK_THROWS(khasminskii_aux(m.coeffs, x_path, w, epsilon, 0.0, Vec::Zero(1)));
    std::vector<Vec> short_path(x_path.begin(), x_path.end() - 1);
    CHECK_THROWS(khasminskii_aux(m.coeffs, short_path, w, epsilon, 0.1, Vec::Zero(1)));
}

TEST_CASE("aux gap sweep for x-independent and coupled systems") {
    ModelBundle m = make_model("ou_sine");
    SlowFastCoeffs indep = m.coeffs;
    indep.g = [](const Vec&, const Vec& yv) { return Vec(-yv); };

    // x-independent fast coefficients: the frozen argument is irrelevant, so
    // the gap is a pure scheme residual, identical for every delta. With one
    // micro substep the two integrators coincide and the sweep degenerates.
    const AuxGapSlope res =
        aux_gap_slope(indep, m.x0, m.y0, Grid(1.0, 128), 1, 0.2,
                      {0.05, 0.1, 0.2}, 4, 99);
    CHECK(res.degenerate);
    for (double g : res.gaps) CHECK(g < 1e-14);

    const AuxGapSlope flat =
        aux_gap_slope(indep, m.x0, m.y0, Grid(1.0, 128), 4, 0.2,
                      {0.05, 0.1, 0.2}, 4, 99);
    CHECK(flat.gaps[0] == flat.gaps[1]);
    CHECK(flat.gaps[1] == flat.gaps[2]);

    // The coupled model produces positive gaps that grow with delta.
    const AuxGapSlope full =
        aux_gap_slope(m.coeffs, m.x0, m.y0, Grid(1.0, 128), 4, 0.2,
                      {0.05, 0.1, 0.2}, 16, 99);
    CHECK_FALSE(full.degenerate);
    CHECK(full.gaps.front() < full.gaps.back());
    CHECK(full.slope > 0.0);
}

TEST_CASE("drift-difference decomposition") {
    ModelBundle m = make_model("ou_sine");
    // Give the slow drift genuine x-dependence so term 1 is active.
    m.coeffs.f = [](const Vec& x, const Vec& y) {
        return Vec::Constant(1, std::sin(y(0)) + 0.3 * x(0));
    };
    const Grid grid(1.0, 16);
    std::vector<Vec> x_path(17), y_path(17), yhat(17);
    CounterRng rng(55, 0);
    for (int k = 0; k <= 16; ++k) {
        x_path[k] = Vec::Constant(1, rng.gaussian(3 * k));
        y_path[k] = Vec::Constant(1, rng.gaussian(3 * k + 1));
        yhat[k] = Vec::Constant(1, rng.gaussian(3 * k + 2));
    }
    const auto fbar = [](const Vec& x) {
        return Vec::Constant(1, std::exp(-0.25) * std::sin(x(0)));
    };

    // Constant drift: every term path vanishes identically.
    SlowFastCoeffs flat = m.coeffs;
    flat.f = [](const Vec&, const Vec&) { return Vec::Constant(1, 0.4); };
    const auto flat_bar = [](const Vec&) { return Vec::Constant(1, 0.4); };
    const MDecomposition z =
        decompose_M(flat, grid, x_path, y_path, yhat, flat_bar, 0.25, 0.5);
    for (int k = 0; k <= 16; ++k) {
        CHECK(z.term1[k].norm() == 0.0);
        CHECK(z.term2[k].norm() == 0.0);
        CHECK(z.term3[k].norm() == 0.0);
        CHECK(z.term4[k].norm() == 0.0);
    }

    // yhat = y kills term 2 only.
    const MDecomposition d =
        decompose_M(m.coeffs, grid, x_path, y_path, y_path, fbar, 0.25, 0.5);
    for (int k = 0; k <= 16; ++k) CHECK(d.term2[k].norm() == 0.0);
    CHECK(d.lip2 == 0.0);
    CHECK(d.lip1 > 0.0);
    CHECK(d.lip4 > 0.0);
    CHECK(d.hoelder3 > 0.0);

    // The four terms telescope pointwise (the frozen-argument and yhat
    // insertions cancel), so their sum is the plain left-point quadrature of
    // f(X, Y) - fbar(X) for any delta and yhat.
    const MDecomposition full =
        decompose_M(m.coeffs, grid, x_path, y_path, yhat, fbar, 0.25, 0.5);
    Vec direct = Vec::Zero(1);
    const double h = grid.step();
    for (int k = 1; k <= 16; ++k) {
        direct += (m.coeffs.f(x_path[k - 1], y_path[k - 1]) - fbar(x_path[k - 1])) * h;
        const Vec sum = full.term1[k] + full.term2[k] + full.term3[k] + full.term4[k];
        CHECK((sum - direct).norm() < 1e-12);
    }
}

TEST_CASE("study spec validation") {
    StudySpec spec;
    spec.epsilons = {0.5, 0.1};
    spec.m_mc = 2;
    spec.macro_steps = 32;
    CHECK_NOTHROW(spec.validate());

    StudySpec bad = spec;
    bad.epsilons = {0.1, 0.5};  // must be descending
    CHECK_THROWS(bad.validate());
    bad = spec;
    bad.epsilons = {1.5, 0.1};
    CHECK_THROWS(bad.validate());
    bad = spec;
    bad.p = 0.5;
    CHECK_THROWS(bad.validate());
    bad = spec;
    bad.m_mc = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("convergence study determinism and trivial decoupled model") {
    StudySpec spec;
    spec.model = "ou_sine";
    spec.epsilons = {0.5, 0.2};
    spec.m_mc = 3;
    spec.macro_steps = 64;
    spec.horizon = 1.0;
    spec.substeps = 2;
    spec.seed = 424242;

    const StudyResult a = convergence_study(spec);
    const StudyResult b = convergence_study(spec);
    CHECK(a.to_csv() == b.to_csv());
    REQUIRE(a.lift_hashes.size() == 3);
    for (std::size_t i = 0; i < a.lift_hashes.size(); ++i)
        CHECK(a.lift_hashes[i] == b.lift_hashes[i]);
    CHECK(a.n_samples == std::vector<int>{3, 3});
    for (double s : a.stderrs) CHECK(s > 0.0);
    for (double mean : a.means) CHECK(mean > 0.0);

    // f_amp = 0 with c0 = 0 decouples the slow block entirely: the epsilon
    // run and the averaged run integrate the same equation on the same grid,
    // so every estimate is exactly zero.
    StudySpec triv = spec;
    triv.model_params = {{"f_amp", 0.0}, {"c0", 0.0}};
    triv.epsilons = {0.5};
    triv.macro_steps = 32;  // step 1/32 <= c_micro * 0.5
    triv.m_mc = 2;
    const StudyResult t = convergence_study(triv);
    for (double mean : t.means) CHECK(mean == 0.0);
    CHECK(t.slope == 0.0);
}

TEST_CASE("study csv format") {
    StudySpec spec;
    spec.epsilons = {0.5};
    spec.m_mc = 2;
    spec.macro_steps = 32;
    spec.substeps = 2;
    spec.seed = 7;
    const StudyResult r = convergence_study(spec);
    const std::string csv = r.to_csv();
    CHECK(csv.rfind("epsilon,mean,stderr,n\n", 0) == 0);
    CHECK(csv.find("0.5,") != std::string::npos);
    CHECK(csv.back() == '\n');
}
