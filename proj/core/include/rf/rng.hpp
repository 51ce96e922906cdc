#pragma once

#include <cstdint>

namespace rf {

// Counter-based splittable RNG. Every draw is a pure function of
// (seed, stream_id, index), so parallel workers can sample disjoint
// streams without shared state and results are reproducible bit-for-bit.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream_id);

    // Uniform in (0, 1), open at both ends.
    double uniform(std::uint64_t index, std::uint64_t lane = 0) const;

    // Standard normal via Box-Muller on two uniform lanes.
    double gaussian(std::uint64_t index) const;

    std::uint64_t raw(std::uint64_t index, std::uint64_t lane) const;

private:
    std::uint64_t key0_;
    std::uint64_t key1_;
};

// Derives a child stream id; used to split one master seed into
// independent streams for B, w, and per-path sampling.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t salt);

}  // namespace rf
