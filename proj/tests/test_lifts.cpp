#include <doctest.h>

#include <cmath>

#include "rf/lifts.hpp"

using namespace rf;

namespace {

NoiseSpec spec_of(NoiseKind kind, int dim, std::uint64_t seed, std::uint64_t stream,
                  double hurst = 0.4, int substeps = 8) {
    NoiseSpec s;
    s.kind = kind;
    s.dim = dim;
    s.hurst = hurst;
    s.substeps = substeps;
    s.seed = seed;
    s.stream_id = stream;
    return s;
}

}  // namespace

TEST_CASE("noise spec validation") {
    CHECK_THROWS(spec_of(NoiseKind::fbm, 1, 0, 0, 0.2).validate());
    CHECK_THROWS(spec_of(NoiseKind::fbm, 1, 0, 0, 0.7).validate());
    CHECK_NOTHROW(spec_of(NoiseKind::fbm, 1, 0, 0, 0.5).validate());
    NoiseSpec bad = spec_of(NoiseKind::brownian_ito, 0, 0, 0);
    CHECK_THROWS(bad.validate());
}

TEST_CASE("lift determinism") {
    const Grid grid(1.0, 32);
    for (NoiseKind kind : {NoiseKind::brownian_ito, NoiseKind::brownian_strat,
                           NoiseKind::fbm, NoiseKind::deterministic_smooth}) {
        const NoiseSpec s = spec_of(kind, 2, 123, 9);
        const MicroLift a = make_lift(s, grid);
        const MicroLift b = make_lift(s, grid);
        for (int k = 0; k <= 32; ++k)
            CHECK((a.rp.level1(k) - b.rp.level1(k)).norm() == 0.0);
        for (int k = 0; k < 32; ++k)
            CHECK((a.rp.level2_cell(k) - b.rp.level2_cell(k)).norm() == 0.0);
    }
}

TEST_CASE("brownian lift in-law statistics") {
    const Grid grid(1.0, 4);
    const int n_seeds = 4000;
    double mean_w = 0.0, mean_ito_cell = 0.0, mean_strat_cell = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        const NoiseSpec spec = spec_of(NoiseKind::brownian_ito, 1, 7, 1000 + s);
        const MicroLift lift = make_lift(spec, grid);
        mean_w += lift.rp.level1(4)(0);
        mean_ito_cell += lift.rp.level2_cell(1)(0, 0);
        mean_strat_cell += stratonovich_from_ito(lift.rp, 0.5).level2_cell(1)(0, 0);
    }
    mean_w /= n_seeds;
    mean_ito_cell /= n_seeds;
    mean_strat_cell /= n_seeds;
    // sd(W_1) = 1 -> 3 sd of the mean ~ 0.047.
    CHECK(std::abs(mean_w) < 0.05);
    // Ito cells are centered; Stratonovich cells have mean h/2 = 0.125.
    CHECK(std::abs(mean_ito_cell) < 0.02);
    CHECK(std::abs(mean_strat_cell - 0.125) < 0.02);
}

TEST_CASE("stratonovich shift algebra") {
    const MicroLift lift = make_lift(spec_of(NoiseKind::brownian_ito, 3, 11, 2),
                                     Grid(1.0, 16));
    const GridRoughPath same = stratonovich_from_ito(lift.rp, 0.0);
    CHECK((same.level2_cell(3) - lift.rp.level2_cell(3)).norm() == 0.0);

    const GridRoughPath strat = stratonovich_from_ito(lift.rp, 0.5);
    // Trace of the cell difference is lambda * e * h exactly.
    const double h = lift.rp.grid().step();
    for (int k = 0; k < 16; ++k) {
        const Mat diff = strat.level2_cell(k) - lift.rp.level2_cell(k);
        CHECK(diff.trace() == doctest::Approx(0.5 * 3 * h).epsilon(1e-14));
        CHECK((strat.level1(k) - lift.rp.level1(k)).norm() == 0.0);
    }
    // Involution up to one rounding ulp.
    const GridRoughPath back = stratonovich_from_ito(strat, -0.5);
    for (int k = 0; k < 16; ++k)
        CHECK((back.level2_cell(k) - lift.rp.level2_cell(k)).norm() < 1e-15);
}

TEST_CASE("scalar brownian cell closed form") {
    const Grid grid(1.0, 8);
    const NoiseSpec spec = spec_of(NoiseKind::brownian_ito, 1, 21, 3);
    const MicroLift lift = make_lift(spec, grid);
    for (int k = 0; k < 8; ++k) {
        const double dw = lift.rp.increment(k, k + 1)(0);
        CHECK(lift.rp.level2_cell(k)(0, 0) ==
              doctest::Approx(0.5 * (dw * dw - grid.step())).epsilon(1e-14));
    }
}

TEST_CASE("fbm variance and geometric symmetry") {
    const Grid grid(1.0, 8);
    const double hurst = 0.4;
    const int n_seeds = 3000;
    double var_half = 0.0, var_full = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        const MicroLift lift =
            make_lift(spec_of(NoiseKind::fbm, 1, 31, 5000 + s, hurst), grid);
        var_half += std::pow(lift.rp.increment(0, 4)(0), 2);
        var_full += std::pow(lift.rp.increment(0, 8)(0), 2);
    }
    var_half /= n_seeds;
    var_full /= n_seeds;
    // Var over span t is t^{2H}; sd of the variance estimate ~ sqrt(2/n) var.
    CHECK(var_half == doctest::Approx(std::pow(0.5, 2 * hurst)).epsilon(0.1));
    CHECK(var_full == doctest::Approx(1.0).epsilon(0.1));

    // Symmetric part of every cell equals (1/2) B1 (x) B1 exactly.
    const MicroLift lift = make_lift(spec_of(NoiseKind::fbm, 2, 31, 17, 0.35), grid);
    for (int k = 0; k < 8; ++k) {
        const Mat cell = lift.rp.level2_cell(k);
        const Vec inc = lift.rp.increment(k, k + 1);
        const Mat sym = 0.5 * (cell + cell.transpose());
        CHECK((sym - 0.5 * inc * inc.transpose()).norm() < 1e-14);
    }
}

TEST_CASE("fbm H=1/2 matches stratonovich brownian statistics") {
    const Grid grid(1.0, 4);
    const int n_seeds = 2000;
    double fbm_cell = 0.0, strat_cell = 0.0, fbm_var = 0.0, bm_var = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        const MicroLift f =
            make_lift(spec_of(NoiseKind::fbm, 1, 41, 9000 + s, 0.5), grid);
        const MicroLift b =
            make_lift(spec_of(NoiseKind::brownian_strat, 1, 43, 9000 + s), grid);
        fbm_cell += f.rp.level2_cell(2)(0, 0);
        strat_cell += b.rp.level2_cell(2)(0, 0);
        fbm_var += std::pow(f.rp.level1(4)(0), 2);
        bm_var += std::pow(b.rp.level1(4)(0), 2);
    }
    CHECK(fbm_cell / n_seeds == doctest::Approx(strat_cell / n_seeds).epsilon(0.25));
    CHECK(fbm_var / n_seeds == doctest::Approx(1.0).epsilon(0.1));
    CHECK(bm_var / n_seeds == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("mixed lift block structure") {
    const Grid grid(1.0, 16);
    const MicroLift b = make_lift(spec_of(NoiseKind::brownian_strat, 2, 51, 1), grid);
    const MicroLift w = make_lift(spec_of(NoiseKind::brownian_ito, 3, 51, 2), grid);
    const MixedLift xi = mixed_lift(b, w);

    // Same stream id is rejected.
    CHECK_THROWS(mixed_lift(b, b));

    // Block extraction is bit-exact.
    const GridRoughPath be = xi.extract_b();
    const GridRoughPath we = xi.extract_w();
    for (int k = 0; k < 16; ++k) {
        CHECK((be.level2_cell(k) - b.rp.level2_cell(k)).norm() == 0.0);
        CHECK((we.level2_cell(k) - w.rp.level2_cell(k)).norm() == 0.0);
        CHECK((be.level1(k) - b.rp.level1(k)).norm() == 0.0);
    }

    // transpose(I[B,W]) + I[W,B] = W1 (x) B1 per cell (one rounding step).
    for (int k = 0; k < 16; ++k) {
        const Mat lhs = xi.ibw_cell(k).transpose() + xi.iwb_cell(k);
        const Mat rhs = xi.w1_cell(k) * xi.b1_cell(k).transpose();
        CHECK((lhs - rhs).norm() < 1e-15);
    }

    // Chen scan of the assembled 5-dim lift.
    CounterRng rng(5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const int i = static_cast<int>(rng.uniform(trial, 0) * 14);
        const int j = i + 1 + static_cast<int>(rng.uniform(trial, 1) * (15 - i));
        const int k = j + 1 + static_cast<int>(rng.uniform(trial, 2) * (16 - j));
        const Mat lhs = xi.rp().chen_block(i, k);
        const Mat rhs = xi.rp().chen_block(i, j) + xi.rp().chen_block(j, k) +
                        xi.rp().increment(i, j) * xi.rp().increment(j, k).transpose();
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("with_macro coarsening is chen-consistent for left-point lifts") {
    const Grid fine(1.0, 32);
    const NoiseSpec spec = spec_of(NoiseKind::brownian_ito, 2, 61, 4, 0.4, 4);
    const MicroPath micro = sample_brownian_micro(spec, fine);
    const GridRoughPath fine_rp = ito_lift_from_micro(micro, 0.5, false);
    const GridRoughPath coarse_rp = ito_lift_from_micro(micro.with_macro(8), 0.5, false);
    for (int k = 0; k < 8; ++k) {
        CHECK((coarse_rp.level2_cell(k) - fine_rp.chen_block(4 * k, 4 * k + 4)).norm() <
              1e-13);
        CHECK((coarse_rp.level1(k) - fine_rp.level1(4 * k)).norm() == 0.0);
    }
    // Geometric lifts aggregate the same way.
    const GridRoughPath gf = geometric_lift_from_micro(micro, 0.5);
    const GridRoughPath gc = geometric_lift_from_micro(micro.with_macro(8), 0.5);
    for (int k = 0; k < 8; ++k)
        CHECK((gc.level2_cell(k) - gf.chen_block(4 * k, 4 * k + 4)).norm() < 1e-13);
    CHECK_THROWS(micro.with_macro(7));
}

TEST_CASE("moment stability of the homogeneous norm across seeds") {
    const Grid grid(1.0, 32);
    std::vector<double> norms;
    for (int s = 0; s < 50; ++s) {
        const MicroLift lift =
            make_lift(spec_of(NoiseKind::brownian_strat, 2, 71, 100 + s), grid);
        norms.push_back(homogeneous_norm(lift.rp, 0.45));
    }
    double m1 = 0, m2 = 0, m4 = 0;
    for (double v : norms) {
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    CHECK(std::isfinite(m4 / norms.size()));
    CHECK(m1 / norms.size() > 0.0);
    CHECK(m2 / norms.size() < 1e3);
}
