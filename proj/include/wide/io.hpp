#pragma once

#include <string>

#include "wide/field.hpp"
#include "wide/functional.hpp"

namespace wide {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "WNSF" snapshot: u32 version, u32 dim, u32 n, f64 domain_length, then the
/// component arrays as little-endian f64.
void write_snapshot(const VelocityField& u, const std::string& path);
VelocityField read_snapshot(const std::string& path);

/// "WNST" checkpoint: u32 version, u32 dim, u32 n, u32 N, f64 tau,
/// f64 eps, sigma, nu, T, u32 flags (bit 0 convection, bit 1 interval
/// quadrature), f64 domain_length, f64 dealias, then N+1 slice payloads.
void write_checkpoint(const Trajectory& traj, const WideParams& params, const std::string& path);

struct Checkpoint {
  Trajectory trajectory;
  WideParams params;
};
Checkpoint read_checkpoint(const std::string& path);

}  // namespace wide
