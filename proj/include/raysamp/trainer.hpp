#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "raysamp/grid.hpp"
#include "raysamp/scene.hpp"

namespace raysamp {

enum class Strategy { Uniform, Pixel, Depth, Fused, Adaptive, FusedAdaptive };

std::string_view to_string(Strategy s);
/// Accepts uniform, pixel, depth, fused, adaptive, fused+adaptive. Throws
/// std::invalid_argument listing the valid names otherwise.
Strategy parse_strategy(std::string_view name);
const std::vector<std::string>& strategy_names();

/// Raised when the training loss becomes NaN or infinite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::int64_t iterations = 2000;
  /// Rays per iteration, split evenly across training views.
  std::int64_t batch = 1024;
  double learning_rate = 5e-4;
  /// Fraction of the run after which the learning rate is halved.
  double lr_cut_fraction = 0.3;
  int samples = 32;
  int eval_samples = 64;
  Strategy strategy = Strategy::Uniform;
  double beta_max = 0.5;
  int window = 3;
  double s_coefficient = 0.01;
  /// Perceptual weight; inert unless `perceptual` is set.
  double lambda_perc = 0.01;
  bool perceptual = false;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::int64_t eval_every = 100;
  /// Iterations between re-renders of the training-view depth maps.
  std::int64_t depth_refresh = 500;
  std::array<int, 3> grid_resolution{32, 32, 32};
  double init_density_raw = -2.0;
  double init_color_raw = 0.0;
  bool jitter = true;
  int threads = 1;

  /// Throws std::invalid_argument when a count is < 1 or the learning rate is not positive.
  void validate() const;
  std::int64_t lr_cut() const;
};

struct CurvePoint {
  std::int64_t iteration = 0;
  double wall_ms = 0.0;
  double loss = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

using TrainCurve = std::vector<CurvePoint>;

struct TrainStats {
  /// Guided probability maps built or sampled. Stays 0 for the uniform strategy.
  std::int64_t guided_map_uses = 0;
  /// Per-image draws that fell back to uniform because a map was degenerate.
  std::int64_t uniform_fallbacks = 0;
  std::int64_t depth_refreshes = 0;
  std::int64_t rays = 0;
};

struct TrainResult {
  RadianceGrid grid;
  TrainCurve curve;
  TrainStats stats;
};

/// Initial grid for a scene under `config`.
RadianceGrid initial_grid(const SceneSpec& scene, const TrainConfig& config);

/// Optimizes a voxel grid against analytic renders of the training views; evaluates the
/// held-out views every `eval_every` iterations and after the final iteration.
TrainResult train(const SceneSpec& scene, const CameraRig& rig, const TrainConfig& config);

struct EvalResult {
  double psnr = 0.0;
  double ssim = 0.0;
};

/// Mean PSNR and SSIM of `grid` over `views` against analytic ground truth.
EvalResult evaluate(const RadianceGrid& grid, const SceneSpec& scene, const std::vector<Camera>& views,
                    int samples, int threads);

struct ComparisonRow {
  std::string strategy;
  /// First checkpoint iteration with PSNR >= threshold; -1 if never reached.
  std::int64_t iters_to_thresh = -1;
  double final_psnr = 0.0;
  double final_ssim = 0.0;
  double wall_ms = 0.0;
};

struct Comparison {
  /// 95% of the uniform strategy's final PSNR.
  double threshold_psnr = 0.0;
  std::vector<ComparisonRow> rows;
  std::vector<TrainCurve> curves;
};

/// Trains every strategy with identical config and seed. Uniform is trained as the reference
/// even when it is not listed (it then contributes no row).
Comparison compare_strategies(const SceneSpec& scene, const CameraRig& rig, const TrainConfig& config,
                              const std::vector<Strategy>& strategies);

/// Settings used by the convergence experiments on the default scene.
TrainConfig experiment_config();

std::string curve_csv(const TrainCurve& curve);
std::string comparison_csv(const Comparison& cmp);

}  // namespace raysamp
