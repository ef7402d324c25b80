#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "raysamp/sampler.hpp"
#include "raysamp/vec.hpp"

namespace raysamp {

struct MseResult {
  double loss = 0.0;
  /// dL/dpred per ray: 2 (pred - gt) / N.
  std::vector<Vec3> grad;
};

/// (1/N) sum ||pred_i - gt_i||^2. Throws on length mismatch or empty input.
MseResult mse_loss(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Stand-in for a perceptual term. This is NOT a learned perceptual metric: rays are grouped
/// into patches by (image, 8x8 region) and the loss is the mean over patches of the L1
/// distance between the patch-mean predicted and patch-mean ground-truth colours.
struct PatchLossResult {
  double loss = 0.0;
  std::vector<Vec3> grad;
  std::size_t patches = 0;
};
PatchLossResult patch_mean_l1_loss(std::span<const PixelSample> batch, std::span<const Vec3> pred,
                                   std::span<const Vec3> gt, int width, int height);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t size, AdamOptions options = {});

  /// One update. Throws std::domain_error naming the index of the first non-finite gradient;
  /// parameters are untouched in that case.
  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::int64_t steps() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamOptions opt_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

/// Step schedule: lr0 before `cut`, lr0 / 2 from `cut` on.
double learning_rate(std::int64_t iteration, double lr0, std::int64_t cut);

}  // namespace raysamp
