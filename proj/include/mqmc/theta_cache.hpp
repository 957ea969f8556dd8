#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mqmc/space.hpp"

namespace mqmc {

/// On-disk cache of theta rows, one pair of files per (density, psi, N, tolerance):
///
///   <key>.bin   magic "MQMCTHT\0", u32 format version, u32 reserved, u64 N,
///               then N little-endian IEEE doubles theta(n/N), n = 0..N-1
///   <key>.json  sidecar with the same key fields in readable form
///
/// <key> is a 64-bit FNV-1a hash of the key string, in hex.
inline constexpr std::uint32_t kThetaCacheVersion = 1;

/// Directory named by MQMC_CACHE_DIR, or nullopt when unset or empty.
std::optional<std::filesystem::path> theta_cache_directory();

std::optional<std::vector<double>> load_theta_row(const std::filesystem::path& dir, const Density& density,
                                                  const WeightFunction& psi, std::uint64_t n_points,
                                                  const QuadratureSpec& spec);

/// Writes atomically (temporary file then rename). Failures to write are ignored.
void store_theta_row(const std::filesystem::path& dir, const Density& density, const WeightFunction& psi,
                     std::uint64_t n_points, const QuadratureSpec& spec, const std::vector<double>& row);

} // namespace mqmc
