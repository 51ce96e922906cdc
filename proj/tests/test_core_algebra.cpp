#include <doctest.h>

#include <cmath>

#include "rf/controlled_path.hpp"
#include "rf/lifts.hpp"

using namespace rf;

namespace {

// d = 1 path with level-1 values (0, 1, 3) and cells (0.5, 2.0) on [0, 1].
GridRoughPath three_point_rp() {
    std::vector<Vec> l1 = {Vec::Constant(1, 0.0), Vec::Constant(1, 1.0),
                           Vec::Constant(1, 3.0)};
    std::vector<Mat> l2 = {Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 2.0)};
    return GridRoughPath(1, Grid(1.0, 2), std::move(l1), std::move(l2), 0.5);
}

// t -> t on [0, 1] with the geometric second level (t-s)^2/2.
GridRoughPath linear_rp(int n) {
    const Grid grid(1.0, n);
    std::vector<Vec> l1(n + 1);
    std::vector<Mat> l2(n, Mat::Constant(1, 1, grid.step() * grid.step() / 2.0));
    for (int k = 0; k <= n; ++k) l1[k] = Vec::Constant(1, grid.time(k));
    return GridRoughPath(1, grid, std::move(l1), std::move(l2), 0.5);
}

GridRoughPath random_lift(int dim, int n, std::uint64_t stream) {
    NoiseSpec spec;
    spec.kind = NoiseKind::brownian_ito;
    spec.dim = dim;
    spec.seed = 99;
    spec.stream_id = stream;
    return make_lift(spec, Grid(1.0, n)).rp;
}

}  // namespace

TEST_CASE("chen_block diagonal and identity cases") {
    const GridRoughPath rp = random_lift(2, 32, 1);
    CHECK(rp.chen_block(5, 5).norm() == 0.0);
    // k = i+1 returns the stored cell bit-exactly.
    CHECK((rp.chen_block(7, 8) - rp.level2_cell(7)).norm() == 0.0);
}

TEST_CASE("chen_block hand example") {
    const GridRoughPath rp = three_point_rp();
    // 0.5 + 2.0 + 1 * 2 = 4.5, and splitting at the middle point agrees.
    CHECK(rp.chen_block(0, 2)(0, 0) == doctest::Approx(4.5).epsilon(1e-14));
    const Mat split = rp.chen_block(0, 1) + rp.chen_block(1, 2) +
                      rp.increment(0, 1) * rp.increment(1, 2).transpose();
    CHECK((rp.chen_block(0, 2) - split).norm() < 1e-14);
}

TEST_CASE("chen associativity on random lifts") {
    const GridRoughPath rp = random_lift(3, 64, 2);
    CounterRng rng(5, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const int i = static_cast<int>(rng.uniform(trial, 0) * 62);
        const int j = i + 1 + static_cast<int>(rng.uniform(trial, 1) * (63 - i));
        const int k = j + 1 + static_cast<int>(rng.uniform(trial, 2) * (64 - j));
        const Mat lhs = rp.chen_block(i, k);
        const Mat rhs = rp.chen_block(i, j) + rp.chen_block(j, k) +
                        rp.increment(i, j) * rp.increment(j, k).transpose();
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("hoelder seminorm closed forms") {
    const Grid grid(1.0, 16);
    std::vector<Vec> linear(17), constant(17, Vec::Constant(1, 3.0)), twice(17);
    for (int k = 0; k <= 16; ++k) {
        linear[k] = Vec::Constant(1, grid.time(k));
        twice[k] = Vec::Constant(1, 2.0 * grid.time(k));
    }
    CHECK(path_hoelder_seminorm(grid, linear, 0.5) == doctest::Approx(1.0));
    CHECK(path_hoelder_seminorm(grid, constant, 0.5) == 0.0);
    CHECK(path_hoelder_seminorm(grid, twice, 0.4) == doctest::Approx(2.0));
}

TEST_CASE("hoelder seminorm monotone in gamma for span <= 1") {
    const GridRoughPath rp = random_lift(1, 64, 3);
    auto field = [&rp](int i, int k) { return rp.increment(i, k).norm(); };
    double prev = hoelder_seminorm(rp.grid(), field, 0.35);
    for (double g : {0.4, 0.45, 0.5}) {
        const double cur = hoelder_seminorm(rp.grid(), field, g);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("homogeneous norm closed form and dilation") {
    const GridRoughPath lin = linear_rp(32);
    CHECK(homogeneous_norm(lin, 0.5) ==
          doctest::Approx(1.0 + std::sqrt(0.5)).epsilon(1e-12));

    const GridRoughPath rp = random_lift(2, 48, 4);
    const double base = homogeneous_norm(rp, 0.5);
    CHECK(homogeneous_norm(rp.dilate(-3.0), 0.5) ==
          doctest::Approx(3.0 * base).epsilon(1e-12));
    CHECK(homogeneous_norm(rp.dilate(0.0), 0.5) == 0.0);
}

TEST_CASE("dilate hand example") {
    const GridRoughPath rp = three_point_rp();
    const GridRoughPath d = rp.dilate(-2.0);
    CHECK(d.level1(1)(0) == doctest::Approx(-2.0));
    CHECK(d.level1(2)(0) == doctest::Approx(-6.0));
    CHECK(d.level2_cell(0)(0, 0) == doctest::Approx(2.0));
    CHECK(d.level2_cell(1)(0, 0) == doctest::Approx(8.0));
    // Chen blocks scale by delta^2.
    CHECK(d.chen_block(0, 2)(0, 0) == doctest::Approx(4.0 * rp.chen_block(0, 2)(0, 0)));
    // delta = 1 is the identity.
    CHECK((rp.dilate(1.0).level1(2) - rp.level1(2)).norm() == 0.0);
}

namespace {

GridControlledPath linear_cp(std::shared_ptr<GridRoughPath> rp) {
    const int np = rp->grid().n_points();
    std::vector<Vec> vals(np);
    std::vector<Mat> gub(np, Mat::Identity(1, 1));
    for (int k = 0; k < np; ++k) vals[k] = Vec::Constant(1, rp->grid().time(k));
    return GridControlledPath(std::move(rp), std::move(vals), std::move(gub));
}

}  // namespace

TEST_CASE("compose_smooth identity, constant, and square") {
    auto rp = std::make_shared<GridRoughPath>(linear_rp(32));
    const GridControlledPath cp = linear_cp(rp);

    SmoothMap ident{1, 1, [](const Vec& y) { return y; },
                    [](const Vec&) { return Mat::Identity(1, 1); }, {}};
    const GridControlledPath same = compose_smooth(ident, cp);
    CHECK((same.value(20) - cp.value(20)).norm() == 0.0);

    SmoothMap constant{1, 1, [](const Vec&) { return Vec::Constant(1, 7.0); },
                       [](const Vec&) { return Mat::Zero(1, 1); }, {}};
    const GridControlledPath c = compose_smooth(constant, cp);
    CHECK(c.value(5)(0) == 7.0);
    CHECK(c.gubinelli(5).norm() == 0.0);

    SmoothMap square{1, 1,
                     [](const Vec& y) { return Vec::Constant(1, y(0) * y(0)); },
                     [](const Vec& y) { return Mat::Constant(1, 1, 2.0 * y(0)); },
                     {}};
    const GridControlledPath sq = compose_smooth(square, cp);
    const double t = rp->grid().time(12);
    CHECK(sq.value(12)(0) == doctest::Approx(t * t));
    CHECK(sq.gubinelli(12)(0, 0) == doctest::Approx(2.0 * t));
    // Remainder of y^2 along t: (t^2 - s^2) - 2s(t-s) = (t-s)^2.
    for (int i : {0, 8, 20}) {
        const int k = i + 6;
        const double span = rp->grid().time(k) - rp->grid().time(i);
        CHECK(sq.remainder(i, k)(0) == doctest::Approx(span * span).epsilon(1e-10));
    }
}

TEST_CASE("concat_cp neutral element and junction remainder") {
    auto left_rp = std::make_shared<GridRoughPath>(random_lift(1, 8, 6));
    CounterRng rng(17, 1);
    const int np = 9;
    std::vector<Vec> lv(np), rv(np);
    std::vector<Mat> lg(np), rg(np);
    for (int k = 0; k < np; ++k) {
        lv[k] = Vec::Constant(1, rng.gaussian(k));
        lg[k] = Mat::Constant(1, 1, rng.gaussian(100 + k));
        rv[k] = Vec::Constant(1, rng.gaussian(200 + k));
        rg[k] = Mat::Constant(1, 1, rng.gaussian(300 + k));
    }
    const GridControlledPath left(left_rp, lv, lg);

    // Empty right: a single shared point leaves the left path unchanged.
    auto point_rp = std::make_shared<GridRoughPath>(
        1, Grid(0.0, 0), std::vector<Vec>{Vec::Zero(1)}, std::vector<Mat>{}, 0.5);
    const GridControlledPath point(point_rp, {lv.back()}, {lg.back()});
    const GridControlledPath still = concat_cp(left, point);
    CHECK(still.grid().n_steps() == 8);
    CHECK((still.value(8) - left.value(8)).norm() == 0.0);

    // Junction remainder identity across the seam.
    auto right_rp = std::make_shared<GridRoughPath>(random_lift(1, 8, 7));
    rv[0] = lv.back();
    rg[0] = lg.back();
    const GridControlledPath right(right_rp, rv, rg);
    const GridControlledPath cat = concat_cp(left, right);
    for (int s : {0, 3, 6}) {
        for (int t : {2, 5, 8}) {
            const int tg = 8 + t;  // global index of right-node t
            const Vec lhs = cat.remainder(s, tg);
            const Vec rhs = left.remainder(s, 8) + right.remainder(0, t) +
                            (left.gubinelli(8) - left.gubinelli(s)) *
                                right.reference().increment(0, t);
            CHECK((lhs - rhs).norm() < 1e-12);
        }
    }
}

TEST_CASE("restrict re-bases and preserves cells") {
    const GridRoughPath rp = random_lift(2, 32, 8);
    const GridRoughPath sub = rp.restrict(8, 20);
    CHECK(sub.grid().n_steps() == 12);
    CHECK(sub.level1(0).norm() == 0.0);
    CHECK((sub.level1(5) - rp.increment(8, 13)).norm() == 0.0);
    CHECK((sub.level2_cell(3) - rp.level2_cell(11)).norm() == 0.0);
    CHECK((sub.chen_block(0, 12) - rp.chen_block(8, 20)).norm() < 1e-13);
}

TEST_CASE("invalid constructions are rejected") {
    CHECK_THROWS(Grid(-1.0, 4));
    CHECK_THROWS(Grid(1.0, 0));
    CHECK_THROWS(HoelderExponent(0.3));
    CHECK_THROWS(HoelderExponent(0.6));
    CHECK_THROWS(HoelderTriple(0.45, 0.4, 0.5));
    // level1 must start at zero.
    std::vector<Vec> l1 = {Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
    std::vector<Mat> l2 = {Mat::Zero(1, 1)};
    CHECK_THROWS(GridRoughPath(1, Grid(1.0, 1), std::move(l1), std::move(l2), 0.5));
}
