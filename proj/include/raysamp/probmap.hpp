#pragma once

#include <cstdint>
#include <stdexcept>

#include "raysamp/image.hpp"

namespace raysamp {

/// Raised when a map has no positive value and cannot be normalized. Callers fall back to
/// uniform sampling.
class DegenerateMapError : public std::runtime_error {
 public:
  DegenerateMapError() : std::runtime_error("degenerate map") {}
};

/// Three-argument clamp: `lo` if x < lo, `hi` if x > hi, else x. Throws if lo > hi.
double clamp(double lo, double hi, double x);

/// Local standard deviation of colour over an n x n window (n odd, >= 3), per channel and
/// averaged across the three channels. Replicate padding at the borders. Computed in the
/// one-pass form sqrt(max(E[c^2] - E[c]^2, 0)).
RawStdMap pixel_std_map(const Image& image, int n = 3);

/// Same stencil on a single-channel depth map.
RawStdMap depth_std_map(const DepthMap& depth, int n = 3);

/// s = s_coefficient * mean(raw); out = clamp(s, max, raw) / max.
/// Throws DegenerateMapError when no value is positive.
ProbMap normalize_map(const RawStdMap& raw, MapSource source, double s_coefficient = 0.01);

/// Linear ramp of the fusion weight from 0 to beta_max over a run.
struct BetaSchedule {
  std::int64_t total_iterations = 1;
  double beta_max = 0.5;
};

/// beta_max * min(iteration / total, 1). Throws for total_iterations <= 0 or iteration < 0.
double beta(std::int64_t iteration, const BetaSchedule& schedule);

/// out = beta * pc + (1 - beta) * pd. Throws on shape mismatch or beta outside [0, 0.5].
ProbMap fuse(const ProbMap& pc, const ProbMap& pd, double beta);

}  // namespace raysamp
