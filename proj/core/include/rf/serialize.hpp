#pragma once

#include <cstdint>
#include <string>

#include "rf/lifts.hpp"

namespace rf {

// Binary container (magic "RFRP1\n", little-endian doubles verbatim);
// round-trips bit-exactly.
void save_rough_path(const GridRoughPath& rp, const std::string& path);
GridRoughPath load_rough_path(const std::string& path);

// Text form: one header row (dim, n_steps, horizon, alpha), then level-1
// rows and level-2 cells (row-major) at %.17g, which round-trips doubles
// exactly through strtod.
void save_rough_path_csv(const GridRoughPath& rp, const std::string& path);
GridRoughPath load_rough_path_csv(const std::string& path);

// FNV-1a over raw bytes; used for lift identity checks in run manifests.
std::uint64_t content_hash_bytes(const void* data, std::size_t n,
                                 std::uint64_t h = 14695981039346656037ull);
std::uint64_t content_hash(const GridRoughPath& rp);
std::uint64_t content_hash(const MicroPath& mp);

// %.17g formatting shared by every CSV writer (shortest exact decimal).
std::string format_double(double v);

}  // namespace rf
