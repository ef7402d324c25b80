#include "raysamp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>

#include "raysamp/metrics.hpp"
#include "raysamp/optim.hpp"
#include "raysamp/parallel.hpp"
#include "raysamp/probmap.hpp"
#include "raysamp/renderer.hpp"
#include "raysamp/sampler.hpp"

namespace raysamp {

namespace {

struct StrategyName {
  Strategy strategy;
  const char* name;
};

constexpr StrategyName kStrategies[] = {
    {Strategy::Uniform, "uniform"},   {Strategy::Pixel, "pixel"},
    {Strategy::Depth, "depth"},       {Strategy::Fused, "fused"},
    {Strategy::Adaptive, "adaptive"}, {Strategy::FusedAdaptive, "fused+adaptive"},
};

constexpr int kDeterministicChunks = 4;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool uses_pixel_map(Strategy s) { return s == Strategy::Pixel || s == Strategy::Fused || s == Strategy::FusedAdaptive; }
bool uses_depth_map(Strategy s) { return s == Strategy::Depth || s == Strategy::Fused || s == Strategy::FusedAdaptive; }
bool is_adaptive(Strategy s) { return s == Strategy::Adaptive || s == Strategy::FusedAdaptive; }

std::optional<ProbMap> try_normalize(const RawStdMap& raw, MapSource source, double s_coefficient) {
  try {
    return normalize_map(raw, source, s_coefficient);
  } catch (const DegenerateMapError&) {
    return std::nullopt;
  }
}

// Everything a view contributes to a training iteration.
struct TrainView {
  const Camera* camera = nullptr;
  Image target;
  std::optional<ProbMap> pixel_map;
  std::optional<DiscreteSampler> pixel_sampler;
  std::optional<ProbMap> depth_map;
};

class Trainer {
 public:
  Trainer(const SceneSpec& scene, const CameraRig& rig, const TrainConfig& config)
      : scene_(scene), config_(config), grid_(initial_grid(scene, config)), adam_(grid_.params().size()),
        grad_(grid_.params().size()), rng_(config.seed) {
    render_.samples = config.samples;
    render_.background = scene.background;
    for (int idx : rig.train) {
      TrainView tv;
      tv.camera = &rig.cameras.at(idx);
      tv.target = render_ground_truth(scene, *tv.camera).image;
      if (uses_pixel_map(config.strategy)) {
        tv.pixel_map = try_normalize(pixel_std_map(tv.target, config.window), MapSource::Pixel,
                                     config.s_coefficient);
        if (tv.pixel_map) {
          tv.pixel_sampler.emplace(*tv.pixel_map);
          ++result_.stats.guided_map_uses;
        } else {
          std::fprintf(stderr, "warning: pixel map of training view %d is degenerate; using uniform\n", idx);
        }
      }
      views_.push_back(std::move(tv));
    }
    for (int idx : rig.eval) {
      eval_cameras_.push_back(rig.cameras.at(idx));
      eval_targets_.push_back(render_ground_truth(scene, eval_cameras_.back()).image);
    }
    chunks_ = config.deterministic ? kDeterministicChunks : std::max(config.threads, 1);
    for (int c = 1; c < chunks_; ++c) chunk_grads_.emplace_back(grad_.size());
  }

  TrainResult run() {
    const auto start = std::chrono::steady_clock::now();
    for (std::int64_t it = 0; it < config_.iterations; ++it) {
      const double loss = step(it);
      const std::int64_t done = it + 1;
      if (done % config_.eval_every == 0 || done == config_.iterations) {
        const EvalResult e = eval();
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result_.curve.push_back({done, ms, loss, e.psnr, e.ssim});
      }
    }
    result_.grid = grid_;
    return std::move(result_);
  }

 private:
  void refresh_depth_maps() {
    ++result_.stats.depth_refreshes;
    RenderSettings settings = render_;
    for (std::size_t i = 0; i < views_.size(); ++i) {
      const RenderedView r = render_image(grid_, *views_[i].camera, settings, config_.threads);
      views_[i].depth_map = try_normalize(depth_std_map(r.depth, config_.window), MapSource::Depth,
                                          config_.s_coefficient);
      if (views_[i].depth_map) ++result_.stats.guided_map_uses;
    }
  }

  // Stage-one draw for view i: the strategy's guided map, or uniform.
  SampleBatch draw_guided(std::size_t i, std::int64_t it, std::size_t count) {
    TrainView& v = views_[i];
    const int image = static_cast<int>(i);
    const int w = v.camera->width;
    const int h = v.camera->height;
    auto fallback = [&] {
      ++result_.stats.uniform_fallbacks;
      return uniform_draw(w, h, rng_, count, image);
    };
    switch (config_.strategy) {
      case Strategy::Uniform:
      case Strategy::Adaptive:
        return uniform_draw(w, h, rng_, count, image);
      case Strategy::Pixel:
        if (!v.pixel_sampler) return fallback();
        ++result_.stats.guided_map_uses;
        return v.pixel_sampler->draw(rng_, count, image);
      case Strategy::Depth:
        if (!v.depth_map) return fallback();
        ++result_.stats.guided_map_uses;
        return build_sampler(*v.depth_map).draw(rng_, count, image);
      case Strategy::Fused:
      case Strategy::FusedAdaptive: {
        if (!v.pixel_map || !v.depth_map) return fallback();
        ++result_.stats.guided_map_uses;
        const double b = beta(it, {config_.iterations, config_.beta_max});
        return build_sampler(fuse(*v.pixel_map, *v.depth_map, b)).draw(rng_, count, image);
      }
    }
    return fallback();
  }

  void forward(const SampleBatch& batch, std::size_t first, std::int64_t it) {
    tapes_.resize(batch.size());
    parallel_chunks(batch.size() - first, chunks_, config_.threads, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t n = first + b; n < first + e; ++n) {
        const PixelSample& s = batch[n];
        const Camera& cam = *views_[s.image].camera;
        const Ray ray = generate_ray(cam, s.u, s.v, scene_.bounds);
        if (config_.jitter) {
          Rng jitter(mix(mix(config_.seed, static_cast<std::uint64_t>(it)), n));
          tapes_[n] = forward_ray(grid_, ray, render_, &jitter);
        } else {
          tapes_[n] = forward_ray(grid_, ray, render_);
        }
      }
    });
  }

  double step(std::int64_t it) {
    if (uses_depth_map(config_.strategy) && it % config_.depth_refresh == 0) refresh_depth_maps();

    const auto n_views = static_cast<std::int64_t>(views_.size());
    std::vector<std::size_t> per_view(views_.size());
    for (std::int64_t i = 0; i < n_views; ++i)
      per_view[i] = static_cast<std::size_t>(config_.batch / n_views + (i < config_.batch % n_views ? 1 : 0));

    SampleBatch batch;
    std::vector<std::size_t> stage_one(views_.size());
    for (std::size_t i = 0; i < views_.size(); ++i) {
      stage_one[i] = is_adaptive(config_.strategy) ? (per_view[i] + 1) / 2 : per_view[i];
      const SampleBatch b = draw_guided(i, it, stage_one[i]);
      batch.insert(batch.end(), b.begin(), b.end());
    }
    forward(batch, 0, it);

    if (is_adaptive(config_.strategy)) {
      // Stage two: per-region mean loss of the stage-one rays drives a resampling of the
      // remaining budget. Per-pixel loss is the squared colour error (e^g); the e^p term of
      // the two-component loss is not modelled.
      std::size_t offset = 0;
      const std::size_t first_stage_two = batch.size();
      for (std::size_t i = 0; i < views_.size(); ++i) {
        const auto rays = std::span(batch).subspan(offset, stage_one[i]);
        std::vector<double> losses(rays.size());
        for (std::size_t n = 0; n < rays.size(); ++n) {
          const Vec3 d = tapes_[offset + n].out.color - views_[i].target.at(rays[n].u, rays[n].v);
          losses[n] = dot(d, d);
        }
        offset += stage_one[i];
        const int w = views_[i].camera->width;
        const int h = views_[i].camera->height;
        const auto f = adaptive_distribution(region_loss_stats(rays, losses, w, h));
        const SampleBatch b = adaptive_resample(f, per_view[i] - stage_one[i], w, h, rng_, static_cast<int>(i));
        batch.insert(batch.end(), b.begin(), b.end());
      }
      forward(batch, first_stage_two, it);
    }
    result_.stats.rays += static_cast<std::int64_t>(batch.size());

    std::vector<Vec3> pred(batch.size());
    std::vector<Vec3> gt(batch.size());
    for (std::size_t n = 0; n < batch.size(); ++n) {
      pred[n] = tapes_[n].out.color;
      gt[n] = views_[batch[n].image].target.at(batch[n].u, batch[n].v);
    }
    MseResult loss = mse_loss(pred, gt);
    if (config_.perceptual) {
      const Camera& cam = *views_.front().camera;
      const PatchLossResult perc = patch_mean_l1_loss(batch, pred, gt, cam.width, cam.height);
      loss.loss += config_.lambda_perc * perc.loss;
      for (std::size_t n = 0; n < batch.size(); ++n) loss.grad[n] += perc.grad[n] * config_.lambda_perc;
    }
    if (!std::isfinite(loss.loss))
      throw NumericalError("training loss became non-finite at iteration " + std::to_string(it));

    std::fill(grad_.begin(), grad_.end(), 0.0);
    for (auto& g : chunk_grads_) std::fill(g.begin(), g.end(), 0.0);
    parallel_chunks(batch.size(), chunks_, config_.threads, [&](std::size_t b, std::size_t e, int chunk) {
      std::span<double> dst = chunk == 0 ? std::span<double>(grad_) : std::span<double>(chunk_grads_[chunk - 1]);
      for (std::size_t n = b; n < e; ++n) backprop_ray(tapes_[n], loss.grad[n], dst);
    });
    for (const auto& g : chunk_grads_)
      for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += g[i];

    try {
      adam_.step(grid_.params(), grad_, learning_rate(it, config_.learning_rate, config_.lr_cut()));
    } catch (const std::domain_error& e) {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(it));
    }
    return loss.loss;
  }

  EvalResult eval() {
    EvalResult sum;
    RenderSettings settings = render_;
    settings.samples = config_.eval_samples;
    for (std::size_t i = 0; i < eval_cameras_.size(); ++i) {
      const Image img = render_image(grid_, eval_cameras_[i], settings, config_.threads).image;
      sum.psnr += psnr(img, eval_targets_[i]);
      sum.ssim += ssim(img, eval_targets_[i]);
    }
    const auto n = static_cast<double>(eval_cameras_.size());
    return {sum.psnr / n, sum.ssim / n};
  }

  const SceneSpec& scene_;
  const TrainConfig& config_;
  RadianceGrid grid_;
  Adam adam_;
  std::vector<double> grad_;
  std::vector<std::vector<double>> chunk_grads_;
  int chunks_ = 1;
  Rng rng_;
  RenderSettings render_;
  std::vector<TrainView> views_;
  std::vector<Camera> eval_cameras_;
  std::vector<Image> eval_targets_;
  std::vector<RayTape> tapes_;
  TrainResult result_;
};

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& e : kStrategies)
    if (e.strategy == s) return e.name;
  return "unknown";
}

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kStrategies) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

Strategy parse_strategy(std::string_view name) {
  for (const auto& e : kStrategies)
    if (name == e.name) return e.strategy;
  std::string valid;
  for (const auto& n : strategy_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'; valid strategies: " + valid);
}

void TrainConfig::validate() const {
  auto positive = [](std::int64_t v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
  };
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  positive(batch, "batch");
  positive(samples, "samples");
  positive(eval_samples, "eval_samples");
  positive(eval_every, "eval_every");
  positive(depth_refresh, "depth_refresh");
  positive(threads, "threads");
  if (samples < 2 || eval_samples < 2) throw std::invalid_argument("samples per ray must be >= 2");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_cut_fraction >= 0 && lr_cut_fraction <= 1)) throw std::invalid_argument("lr cut fraction must lie in [0,1]");
  if (!(beta_max >= 0 && beta_max <= 0.5)) throw std::invalid_argument("beta_max must lie in [0,0.5]");
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("window must be odd and >= 3");
}

std::int64_t TrainConfig::lr_cut() const {
  return static_cast<std::int64_t>(std::floor(lr_cut_fraction * static_cast<double>(iterations)));
}

RadianceGrid initial_grid(const SceneSpec& scene, const TrainConfig& config) {
  return RadianceGrid(config.grid_resolution, scene.bounds, config.init_density_raw, config.init_color_raw);
}

TrainResult train(const SceneSpec& scene, const CameraRig& rig, const TrainConfig& config) {
  config.validate();
  scene.validate();
  if (rig.train.empty()) throw std::invalid_argument("train: need at least one training view");
  if (rig.eval.empty()) throw std::invalid_argument("train: need at least one held-out view");
  if (config.iterations == 0) return {initial_grid(scene, config), {}, {}};
  return Trainer(scene, rig, config).run();
}

EvalResult evaluate(const RadianceGrid& grid, const SceneSpec& scene, const std::vector<Camera>& views,
                    int samples, int threads) {
  if (views.empty()) throw std::invalid_argument("evaluate: no views");
  RenderSettings settings{samples, scene.background};
  EvalResult sum;
  for (const auto& cam : views) {
    const Image target = render_ground_truth(scene, cam).image;
    const Image img = render_image(grid, cam, settings, threads).image;
    sum.psnr += psnr(img, target);
    sum.ssim += ssim(img, target);
  }
  return {sum.psnr / views.size(), sum.ssim / views.size()};
}

Comparison compare_strategies(const SceneSpec& scene, const CameraRig& rig, const TrainConfig& config,
                              const std::vector<Strategy>& strategies) {
  Comparison cmp;
  std::vector<TrainResult> runs;
  std::optional<TrainCurve> uniform_curve;
  auto run = [&](Strategy s) {
    TrainConfig c = config;
    c.strategy = s;
    return train(scene, rig, c);
  };
  for (Strategy s : strategies) {
    runs.push_back(run(s));
    if (s == Strategy::Uniform && !uniform_curve) uniform_curve = runs.back().curve;
  }
  if (!uniform_curve) uniform_curve = run(Strategy::Uniform).curve;
  cmp.threshold_psnr = uniform_curve->empty() ? 0.0 : 0.95 * uniform_curve->back().psnr;

  for (std::size_t i = 0; i < strategies.size(); ++i) {
    ComparisonRow row;
    row.strategy = std::string(to_string(strategies[i]));
    const TrainCurve& curve = runs[i].curve;
    for (const auto& p : curve)
      if (p.psnr >= cmp.threshold_psnr) {
        row.iters_to_thresh = p.iteration;
        break;
      }
    if (!curve.empty()) {
      row.final_psnr = curve.back().psnr;
      row.final_ssim = curve.back().ssim;
      row.wall_ms = curve.back().wall_ms;
    }
    cmp.rows.push_back(row);
    cmp.curves.push_back(curve);
  }
  return cmp;
}

TrainConfig experiment_config() {
  TrainConfig c;
  // A grid trained from scratch needs a far larger step than a fine-tuned network.
  c.learning_rate = 0.05;
  c.iterations = 1000;
  c.eval_every = 50;
  c.depth_refresh = 100;
  return c;
}

std::string curve_csv(const TrainCurve& curve) {
  std::ostringstream out;
  out << "iter,wall_ms,loss,psnr,ssim\n";
  for (const auto& p : curve) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", p.wall_ms);
    out << p.iteration << ',' << ms << ',' << format_double(p.loss) << ',' << format_double(p.psnr) << ','
        << format_double(p.ssim) << '\n';
  }
  return out.str();
}

std::string comparison_csv(const Comparison& cmp) {
  std::ostringstream out;
  out << "strategy,iters_to_thresh,final_psnr,final_ssim,wall_ms\n";
  for (const auto& r : cmp.rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", r.wall_ms);
    out << r.strategy << ',' << r.iters_to_thresh << ',' << format_double(r.final_psnr) << ','
        << format_double(r.final_ssim) << ',' << ms << '\n';
  }
  return out.str();
}

}  // namespace raysamp
