#pragma once

#include <cstdint>
#include <optional>

#include "rf/rough_path.hpp"
#include "rf/rng.hpp"

namespace rf {

enum class NoiseKind { brownian_ito, brownian_strat, fbm, deterministic_smooth };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::brownian_ito;
    int dim = 1;
    double hurst = 0.5;    // fbm only, in (1/3, 1/2]
    int substeps = 8;      // micro factor M for second-level construction
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    void validate() const;
};

// Path sampled on the micro grid (N*M + 1 nodes, value 0 at the origin).
// Macro lifts aggregate it; the raw increments are retained for coupled
// constructions (mixed lift, Euler-Maruyama re-integration, Khasminskii).
struct MicroPath {
    Grid macro;
    int substeps = 1;
    int dim = 1;
    std::uint64_t stream_id = 0;
    std::vector<Vec> values;

    int n_micro() const { return macro.n_steps() * substeps; }
    double micro_step() const { return macro.step() / substeps; }
    Vec increment(int j) const { return values[j + 1] - values[j]; }
    double micro_time(int j) const { return micro_step() * j; }

    // Same micro samples viewed against a coarser macro grid; the new step
    // count must divide the micro resolution.
    MicroPath with_macro(int n_steps) const;
};

MicroPath sample_brownian_micro(const NoiseSpec& spec, const Grid& grid);
// Exact-in-law fGn by circulant embedding (Davies-Harte); falls back to a
// dense covariance factorization when the embedding is not nonnegative.
MicroPath sample_fbm_micro(const NoiseSpec& spec, const Grid& grid,
                           bool* used_fallback = nullptr);
// Component c follows t -> sin(2 pi (c+1) t).
MicroPath sample_smooth_micro(const NoiseSpec& spec, const Grid& grid);

// Left-point (Ito) second level over each macro cell; a scalar Brownian
// cell uses the closed form ((dw)^2 - h)/2.
GridRoughPath ito_lift_from_micro(const MicroPath& micro, double alpha,
                                  bool scalar_closed_form);
// Piecewise-linear (geometric) second level.
GridRoughPath geometric_lift_from_micro(const MicroPath& micro, double alpha);

struct MicroLift {
    GridRoughPath rp;
    MicroPath micro;
};

MicroLift brownian_ito_lift(const NoiseSpec& spec, const Grid& grid);
MicroLift fbm_lift(const NoiseSpec& spec, const Grid& grid);
MicroLift deterministic_smooth_lift(const NoiseSpec& spec, const Grid& grid);
MicroLift make_lift(const NoiseSpec& spec, const Grid& grid);

// W~^2 = W^2 + lambda Id (t-s); level 1 unchanged. lambda = 1/2 converts
// the Ito lift to the Stratonovich one.
GridRoughPath stratonovich_from_ito(const GridRoughPath& rp, double lambda);

// Mixed lift over R^{d+e}: block level 1 (B^1, W^1); level-2 cells with
// diagonal blocks B^2, W^2 and cross blocks
//   I[B,W] = sum_j B^1_{t_k, s_j} (x) dw_j      (left-point Ito sum)
//   I[W,B] = W^1 (x) B^1 - transpose(that sum).
class MixedLift {
public:
    MixedLift(GridRoughPath rp, int slow_noise_dim, int fast_noise_dim,
              MicroPath b_micro, MicroPath w_micro);

    const GridRoughPath& rp() const { return rp_; }
    RoughPathPtr rp_ptr() const { return rp_ptr_; }
    int slow_noise_dim() const { return d_; }
    int fast_noise_dim() const { return e_; }
    const MicroPath& b_micro() const { return b_micro_; }
    const MicroPath& w_micro() const { return w_micro_; }

    // Block views of cell k.
    Vec b1_cell(int k) const;
    Vec w1_cell(int k) const;
    Mat b2_cell(int k) const;
    Mat w2_cell(int k) const;
    Mat ibw_cell(int k) const;  // d x e
    Mat iwb_cell(int k) const;  // e x d

    // Extracts the diagonal-block rough paths bit-exactly.
    GridRoughPath extract_b() const;
    GridRoughPath extract_w() const;

private:
    GridRoughPath rp_;
    RoughPathPtr rp_ptr_;
    int d_, e_;
    MicroPath b_micro_, w_micro_;
};

MixedLift mixed_lift(const MicroLift& b, const MicroLift& w);

}  // namespace rf
