#include "rf/rng.hpp"

#include <cmath>

namespace rf {
namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream_id)
    : key0_(mix64(seed ^ 0x9e3779b97f4a7c15ULL)),
      key1_(mix64(stream_id + 0xbf58476d1ce4e5b9ULL)) {
    // A second mixing round decorrelates nearby (seed, stream) pairs.
    key0_ = mix64(key0_ + key1_);
}

std::uint64_t CounterRng::raw(std::uint64_t index, std::uint64_t lane) const {
    std::uint64_t z = index * 0x9e3779b97f4a7c15ULL + key0_;
    z = mix64(z + lane * 0x94d049bb133111ebULL);
    return mix64(z ^ key1_);
}

double CounterRng::uniform(std::uint64_t index, std::uint64_t lane) const {
    // 53 mantissa bits, shifted into (0,1).
    const std::uint64_t bits = raw(index, lane) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t index) const {
    const double u1 = uniform(index, 0);
    const double u2 = uniform(index, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t salt) {
    return mix64(parent ^ mix64(salt + 0xd6e8feb86659fd93ULL));
}

}  // namespace rf
