#include "rf/lifts.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <complex>

namespace rf {

void NoiseSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("NoiseSpec: dim must be positive");
    if (substeps < 1) throw std::invalid_argument("NoiseSpec: substeps must be >= 1");
    if (kind == NoiseKind::fbm && !(hurst > 1.0 / 3.0 && hurst <= 0.5))
        throw std::invalid_argument("NoiseSpec: hurst must be in (1/3, 1/2]");
}

MicroPath MicroPath::with_macro(int n_steps) const {
    if (n_steps < 1 || n_micro() % n_steps != 0)
        throw std::invalid_argument("MicroPath::with_macro: steps must divide micro count");
    MicroPath out = *this;
    out.macro = Grid(macro.horizon(), n_steps);
    out.substeps = n_micro() / n_steps;
    return out;
}

MicroPath sample_brownian_micro(const NoiseSpec& spec, const Grid& grid) {
    spec.validate();
    const int n = grid.n_steps() * spec.substeps;
    const double dt = grid.step() / spec.substeps;
    const double sd = std::sqrt(dt);
    CounterRng rng(spec.seed, spec.stream_id);
    MicroPath mp{grid, spec.substeps, spec.dim, spec.stream_id, {}};
    mp.values.resize(n + 1);
    mp.values[0] = Vec::Zero(spec.dim);
    for (int j = 0; j < n; ++j) {
        Vec inc(spec.dim);
        for (int c = 0; c < spec.dim; ++c)
            inc(c) = sd * rng.gaussian(static_cast<std::uint64_t>(j) * spec.dim + c);
        mp.values[j + 1] = mp.values[j] + inc;
    }
    return mp;
}

namespace {

// fGn autocovariance at lag k for unit step.
double fgn_cov(int k, double hurst) {
    const double a = std::pow(std::abs(k + 1), 2.0 * hurst);
    const double b = std::pow(std::abs(k - 1), 2.0 * hurst);
    const double c = std::pow(std::abs(k), 2.0 * hurst);
    return 0.5 * (a + b - 2.0 * c);
}

// One fGn sequence of length n via circulant embedding. Returns false if
// the embedding has a significantly negative eigenvalue.
bool fgn_davies_harte(int n, double hurst, const CounterRng& rng,
                      std::uint64_t draw_offset, std::vector<double>& out) {
    const int m = 2 * n;
    std::vector<std::complex<double>> buf(m);
    for (int k = 0; k <= n; ++k) buf[k] = fgn_cov(k, hurst);
    for (int k = n + 1; k < m; ++k) buf[k] = fgn_cov(m - k, hurst);

    fftw_plan plan = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(buf.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::vector<double> lambda(m);
    double max_l = 0.0, min_l = 0.0;
    for (int k = 0; k < m; ++k) {
        lambda[k] = buf[k].real();
        max_l = std::max(max_l, lambda[k]);
        min_l = std::min(min_l, lambda[k]);
    }
    if (min_l < -1e-9 * max_l) return false;

    std::uint64_t idx = draw_offset;
    auto z = [&]() { return rng.gaussian(idx++); };
    buf[0] = std::sqrt(std::max(lambda[0], 0.0) / m) * z();
    buf[n] = std::sqrt(std::max(lambda[n], 0.0) / m) * z();
    for (int k = 1; k < n; ++k) {
        const double s = std::sqrt(std::max(lambda[k], 0.0) / (2.0 * m));
        buf[k] = std::complex<double>(s * z(), s * z());
        buf[m - k] = std::conj(buf[k]);
    }
    plan = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    out.resize(n);
    for (int k = 0; k < n; ++k) out[k] = buf[k].real();
    return true;
}

void fgn_dense_fallback(int n, double hurst, const CounterRng& rng,
                        std::uint64_t draw_offset, std::vector<double>& out) {
    Mat cov(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cov(i, j) = fgn_cov(i - j, hurst);
    Eigen::LLT<Mat> llt(cov + 1e-12 * Mat::Identity(n, n));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("fbm fallback: covariance factorization failed");
    Vec z(n);
    for (int k = 0; k < n; ++k) z(k) = rng.gaussian(draw_offset + k);
    Vec x = llt.matrixL() * z;
    out.assign(x.data(), x.data() + n);
}

}  // namespace

MicroPath sample_fbm_micro(const NoiseSpec& spec, const Grid& grid,
                           bool* used_fallback) {
    spec.validate();
    if (spec.kind != NoiseKind::fbm)
        throw std::invalid_argument("sample_fbm_micro: kind must be fbm");
    const int n = grid.n_steps() * spec.substeps;
    const double dt = grid.step() / spec.substeps;
    const double scale = std::pow(dt, spec.hurst);  // self-similar rescaling
    CounterRng rng(spec.seed, spec.stream_id);
    if (used_fallback) *used_fallback = false;

    MicroPath mp{grid, spec.substeps, spec.dim, spec.stream_id, {}};
    mp.values.assign(n + 1, Vec::Zero(spec.dim));
    std::vector<double> fgn;
    for (int c = 0; c < spec.dim; ++c) {
        // Disjoint draw ranges per component.
        const std::uint64_t offset = static_cast<std::uint64_t>(c) << 40;
        if (!fgn_davies_harte(n, spec.hurst, rng, offset, fgn)) {
            if (used_fallback) *used_fallback = true;
            fgn_dense_fallback(n, spec.hurst, rng, offset, fgn);
        }
        for (int j = 0; j < n; ++j)
            mp.values[j + 1](c) = mp.values[j](c) + scale * fgn[j];
    }
    return mp;
}

MicroPath sample_smooth_micro(const NoiseSpec& spec, const Grid& grid) {
    spec.validate();
    const int n = grid.n_steps() * spec.substeps;
    const double dt = grid.step() / spec.substeps;
    MicroPath mp{grid, spec.substeps, spec.dim, spec.stream_id, {}};
    mp.values.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        Vec v(spec.dim);
        for (int c = 0; c < spec.dim; ++c)
            v(c) = std::sin(2.0 * M_PI * (c + 1) * dt * j);
        mp.values[j] = v;
    }
    return mp;
}

GridRoughPath ito_lift_from_micro(const MicroPath& micro, double alpha,
                                  bool scalar_closed_form) {
    const int n = micro.macro.n_steps();
    const int m = micro.substeps;
    const int d = micro.dim;
    std::vector<Vec> level1(n + 1);
    std::vector<Mat> cells(n);
    for (int k = 0; k <= n; ++k) level1[k] = micro.values[k * m];
    for (int k = 0; k < n; ++k) {
        if (d == 1 && scalar_closed_form) {
            const double dw = (micro.values[(k + 1) * m] - micro.values[k * m])(0);
            cells[k] = Mat::Constant(1, 1, 0.5 * (dw * dw - micro.macro.step()));
            continue;
        }
        Mat cell = Mat::Zero(d, d);
        const Vec& base = micro.values[k * m];
        for (int j = k * m; j < (k + 1) * m; ++j)
            cell += (micro.values[j] - base) * micro.increment(j).transpose();
        cells[k] = cell;
    }
    return GridRoughPath(d, micro.macro, std::move(level1), std::move(cells), alpha);
}

GridRoughPath geometric_lift_from_micro(const MicroPath& micro, double alpha) {
    const int n = micro.macro.n_steps();
    const int m = micro.substeps;
    const int d = micro.dim;
    std::vector<Vec> level1(n + 1);
    std::vector<Mat> cells(n);
    for (int k = 0; k <= n; ++k) level1[k] = micro.values[k * m];
    for (int k = 0; k < n; ++k) {
        Mat cell = Mat::Zero(d, d);
        const Vec& base = micro.values[k * m];
        for (int j = k * m; j < (k + 1) * m; ++j) {
            const Vec inc = micro.increment(j);
            cell += (micro.values[j] - base) * inc.transpose();
            cell += 0.5 * inc * inc.transpose();
        }
        cells[k] = cell;
    }
    return GridRoughPath(d, micro.macro, std::move(level1), std::move(cells), alpha);
}

MicroLift brownian_ito_lift(const NoiseSpec& spec, const Grid& grid) {
    MicroPath micro = sample_brownian_micro(spec, grid);
    GridRoughPath rp = ito_lift_from_micro(micro, 0.5, true);
    return MicroLift{std::move(rp), std::move(micro)};
}

MicroLift fbm_lift(const NoiseSpec& spec, const Grid& grid) {
    MicroPath micro = sample_fbm_micro(spec, grid);
    GridRoughPath rp = geometric_lift_from_micro(micro, spec.hurst);
    return MicroLift{std::move(rp), std::move(micro)};
}

MicroLift deterministic_smooth_lift(const NoiseSpec& spec, const Grid& grid) {
    MicroPath micro = sample_smooth_micro(spec, grid);
    GridRoughPath rp = geometric_lift_from_micro(micro, 0.5);
    return MicroLift{std::move(rp), std::move(micro)};
}

MicroLift make_lift(const NoiseSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case NoiseKind::brownian_ito:
            return brownian_ito_lift(spec, grid);
        case NoiseKind::brownian_strat: {
            MicroLift l = brownian_ito_lift(spec, grid);
            return MicroLift{stratonovich_from_ito(l.rp, 0.5), std::move(l.micro)};
        }
        case NoiseKind::fbm:
            return fbm_lift(spec, grid);
        case NoiseKind::deterministic_smooth:
            return deterministic_smooth_lift(spec, grid);
    }
    throw std::invalid_argument("make_lift: unknown kind");
}

GridRoughPath stratonovich_from_ito(const GridRoughPath& rp, double lambda) {
    const int n = rp.grid().n_steps();
    const double h = rp.grid().step();
    std::vector<Vec> level1(rp.level1_all());
    std::vector<Mat> cells(n);
    const Mat shift = lambda * h * Mat::Identity(rp.dim(), rp.dim());
    for (int k = 0; k < n; ++k) cells[k] = rp.level2_cell(k) + shift;
    return GridRoughPath(rp.dim(), rp.grid(), std::move(level1), std::move(cells),
                         rp.alpha());
}

MixedLift::MixedLift(GridRoughPath rp, int slow_noise_dim, int fast_noise_dim,
                     MicroPath b_micro, MicroPath w_micro)
    : rp_(std::move(rp)), d_(slow_noise_dim), e_(fast_noise_dim),
      b_micro_(std::move(b_micro)), w_micro_(std::move(w_micro)) {
    rp_ptr_ = std::make_shared<GridRoughPath>(rp_);
}

Vec MixedLift::b1_cell(int k) const { return rp_.increment(k, k + 1).head(d_); }
Vec MixedLift::w1_cell(int k) const { return rp_.increment(k, k + 1).tail(e_); }
Mat MixedLift::b2_cell(int k) const { return rp_.level2_cell(k).topLeftCorner(d_, d_); }
Mat MixedLift::w2_cell(int k) const { return rp_.level2_cell(k).bottomRightCorner(e_, e_); }
Mat MixedLift::ibw_cell(int k) const { return rp_.level2_cell(k).topRightCorner(d_, e_); }
Mat MixedLift::iwb_cell(int k) const { return rp_.level2_cell(k).bottomLeftCorner(e_, d_); }

GridRoughPath MixedLift::extract_b() const {
    const int n = rp_.grid().n_steps();
    std::vector<Vec> l1(n + 1);
    std::vector<Mat> l2(n);
    for (int k = 0; k <= n; ++k) l1[k] = rp_.level1(k).head(d_);
    for (int k = 0; k < n; ++k) l2[k] = b2_cell(k);
    return GridRoughPath(d_, rp_.grid(), std::move(l1), std::move(l2), rp_.alpha());
}

GridRoughPath MixedLift::extract_w() const {
    const int n = rp_.grid().n_steps();
    std::vector<Vec> l1(n + 1);
    std::vector<Mat> l2(n);
    for (int k = 0; k <= n; ++k) l1[k] = rp_.level1(k).tail(e_);
    for (int k = 0; k < n; ++k) l2[k] = w2_cell(k);
    return GridRoughPath(e_, rp_.grid(), std::move(l1), std::move(l2), rp_.alpha());
}

MixedLift mixed_lift(const MicroLift& b, const MicroLift& w) {
    if (b.micro.stream_id == w.micro.stream_id)
        throw std::invalid_argument("mixed_lift: B and w must use distinct stream ids");
    if (!(b.micro.macro == w.micro.macro) || b.micro.substeps != w.micro.substeps)
        throw std::invalid_argument("mixed_lift: micro grids misaligned");

    const int d = b.rp.dim(), e = w.rp.dim();
    const int n = b.rp.grid().n_steps();
    const int m = b.micro.substeps;
    std::vector<Vec> level1(n + 1);
    std::vector<Mat> cells(n);
    for (int k = 0; k <= n; ++k) {
        Vec v(d + e);
        v.head(d) = b.rp.level1(k);
        v.tail(e) = w.rp.level1(k);
        level1[k] = v;
    }
    for (int k = 0; k < n; ++k) {
        Mat cell = Mat::Zero(d + e, d + e);
        cell.topLeftCorner(d, d) = b.rp.level2_cell(k);
        cell.bottomRightCorner(e, e) = w.rp.level2_cell(k);
        // Left-point Ito cross sum over the shared micro grid.
        Mat ibw = Mat::Zero(d, e);
        const Vec& b_base = b.micro.values[k * m];
        for (int j = k * m; j < (k + 1) * m; ++j)
            ibw += (b.micro.values[j] - b_base) * w.micro.increment(j).transpose();
        const Vec b1 = b.rp.level1(k + 1) - b.rp.level1(k);
        const Vec w1 = w.rp.level1(k + 1) - w.rp.level1(k);
        cell.topRightCorner(d, e) = ibw;
        cell.bottomLeftCorner(e, d) = w1 * b1.transpose() - ibw.transpose();
        cells[k] = cell;
    }
    GridRoughPath rp(d + e, b.rp.grid(), std::move(level1), std::move(cells),
                     std::min(b.rp.alpha(), w.rp.alpha()));
    return MixedLift(std::move(rp), d, e, b.micro, w.micro);
}

}  // namespace rf
