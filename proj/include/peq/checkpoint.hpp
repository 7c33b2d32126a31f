#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "peq/state.hpp"

namespace peq {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, little-endian throughout:
///   "PEQ1" | u32 version | u32 nx, ny, nz | f64 re1 re2 rt1 rt2 alpha h lx ly f0 | f64 time
///   | v1, v2, T interiors (z fastest, then y, then x) | u64 FNV-1a of everything before it.
void write_checkpoint(const State& s, const Parameters& p, const std::filesystem::path& path);

struct Checkpoint {
  State state;        // w and surface pressure re-diagnosed; no step history
  Parameters params;  // physical parameters; the heat source is not stored
};

/// `p` supplies the heat source; the stored physical parameters take precedence for the rest.
Checkpoint read_checkpoint(const std::filesystem::path& path, const Parameters& p = {});

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n);

}  // namespace peq
