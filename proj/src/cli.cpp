#include "raysamp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "raysamp/io.hpp"
#include "raysamp/metrics.hpp"
#include "raysamp/parallel.hpp"
#include "raysamp/probmap.hpp"
#include "raysamp/renderer.hpp"
#include "raysamp/scene.hpp"
#include "raysamp/trainer.hpp"

namespace raysamp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Input or usage problem detected after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path.string() + "'");
}

// Shortest text that parses back to the same double.
std::string format_value(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// One subcommand: its CLI11 app, a record of every bound option for the config echo, and the
// inputs and outputs that go into the run manifest.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& description)
      : app_(parent.add_subcommand(name, description)), name_(name) {
    app_->add_option("--config", config_, "key = value file; flags given on the command line win")
        ->check(CLI::ExistingFile);
    echo_.emplace_back("config", [this] { return config_; });
    app_->add_option("--threads", threads_, "Worker threads (default: RAYSAMP_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    echo_.emplace_back("threads", [this] { return std::to_string(threads()); });
  }

  CLI::App* app() const { return app_; }
  const std::string& name() const { return name_; }

  template <class T>
  CLI::Option* option(const std::string& flag, T& var, const std::string& description) {
    auto* opt = app_->add_option("--" + flag, var, description);
    echo_.emplace_back(flag, [&var] {
      if constexpr (std::is_floating_point_v<T>)
        return format_value(var);
      else if constexpr (std::is_arithmetic_v<T>)
        return std::to_string(var);
      else
        return std::string(var);
    });
    return opt;
  }

  CLI::Option* flag(const std::string& flag, bool& var, const std::string& description) {
    auto* opt = app_->add_flag("--" + flag, var, description);
    echo_.emplace_back(flag, [&var] { return std::string(var ? "true" : "false"); });
    return opt;
  }

  int threads() const { return threads_ > 0 ? threads_ : default_threads(); }

  void input(const std::string& role, const std::string& path) {
    inputs_[role] = {{"path", path}, {"sha1", git_blob_sha1(read_bytes(path))}};
  }
  void output(const fs::path& path) { outputs_.push_back(path.string()); }

  // Resolved configuration in the same key = value form the --config file accepts.
  std::string resolved_config() const {
    std::string s;
    for (const auto& e : echo_) s += e.key + " = " + e.value() + "\n";
    return s;
  }

  void finish(std::ostream& out, const fs::path& manifest_path) {
    out << "# resolved configuration (" << name_ << ")\n" << resolved_config();
    json cfg = json::object();
    for (const auto& e : echo_) cfg[e.key] = e.value();
    json manifest = {{"tool", "raysamp"},   {"version", kVersion}, {"command", name_},
                     {"config", cfg},       {"inputs", inputs_},   {"outputs", outputs_}};
    if (!manifest_path.empty()) write_text(manifest_path, manifest.dump(2) + "\n");
  }

 private:
  struct Echo {
    std::string key;
    std::function<std::string()> value;
    Echo(std::string k, std::function<std::string()> v) : key(std::move(k)), value(std::move(v)) {}
  };

  CLI::App* app_;
  std::string name_;
  std::string config_;
  int threads_ = 0;
  std::vector<Echo> echo_;
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
};

SceneFile load_scene_input(Command& cmd, const std::string& path) {
  cmd.input("scene", path);
  return load_scene(path);
}

std::vector<int> parse_views(const std::string& list, std::size_t camera_count) {
  std::vector<int> views;
  for (const auto& item : split_list(list)) {
    int v = -1;
    try {
      std::size_t used = 0;
      v = std::stoi(item, &used);
      if (used != item.size()) v = -1;
    } catch (const std::exception&) {
    }
    if (v < 0 || static_cast<std::size_t>(v) >= camera_count)
      throw UsageError("view '" + item + "' is not a camera index in [0, " + std::to_string(camera_count) + ")");
    views.push_back(v);
  }
  if (views.empty()) throw UsageError("empty view list");
  return views;
}

// Reads a `key = value` file (# comments) into the equivalent flags.
std::vector<std::string> config_flags(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::vector<std::string> args;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string t) {
      t.erase(0, t.find_first_not_of(" \t\r"));
      t.erase(t.find_last_not_of(" \t\r") + 1);
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
      return t;
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(lineno) + ": bad key");
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// Splices the contents of any --config file in front of the explicit flags so that the
// explicit ones, parsed later, take precedence.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  std::vector<std::string> from_file;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      from_file = config_flags(args[i + 1]);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      from_file = config_flags(args[i].substr(9));
      break;
    }
  }
  args.insert(args.begin() + 2, from_file.begin(), from_file.end());
  return args;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw UsageError("cannot create output directory '" + dir + "'");
  return p;
}

}  // namespace

std::string git_blob_sha1(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guided ray sampling for voxel radiance fields", "raysamp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // probmap
  Command probmap(app, "probmap", "Pixel, depth and fused sampling maps for an image");
  std::string pm_image, pm_depth, pm_prefix;
  int pm_n = 3;
  double pm_beta = -1.0, pm_s = 0.01;
  probmap.option("image", pm_image, "RGB PNG")->required()->check(CLI::ExistingFile);
  probmap.option("depth", pm_depth, "Depth map (PFM)")->check(CLI::ExistingFile);
  probmap.option("n", pm_n, "Window size (odd, >= 3)")->capture_default_str();
  auto* beta_opt = probmap.option("beta", pm_beta, "Fusion weight in [0, 0.5]; needs --depth");
  probmap.option("s-coeff", pm_s, "Floor as a fraction of the mean raw value")->capture_default_str();
  probmap.option("out-prefix", pm_prefix, "Output path prefix")->required();

  // render-gt
  Command render_gt(app, "render-gt", "Analytic ground-truth images and depth for scene cameras");
  std::string rg_scene, rg_out, rg_views;
  render_gt.option("scene", rg_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  render_gt.option("views", rg_views, "Comma-separated camera indices (default: all)");
  render_gt.option("out", rg_out, "Output directory")->required();

  // train
  Command trainc(app, "train", "Optimize a voxel grid with one ray-sampling strategy");
  TrainConfig tc = experiment_config();
  std::string tr_scene, tr_strategy = "uniform", tr_out;
  trainc.option("scene", tr_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  trainc.option("strategy", tr_strategy, "uniform|pixel|depth|fused|adaptive|fused+adaptive")->capture_default_str();
  trainc.option("iters", tc.iterations, "Iterations")->capture_default_str();
  trainc.option("batch", tc.batch, "Rays per iteration")->capture_default_str();
  trainc.option("seed", tc.seed, "Random seed")->capture_default_str();
  trainc.flag("deterministic", tc.deterministic, "Bitwise-reproducible results for any thread count");
  trainc.option("lr", tc.learning_rate, "Initial learning rate")->capture_default_str();
  trainc.option("lr-cut", tc.lr_cut_fraction, "Fraction of the run after which the rate halves")->capture_default_str();
  trainc.option("samples", tc.samples, "Samples per training ray")->capture_default_str();
  trainc.option("eval-samples", tc.eval_samples, "Samples per evaluation ray")->capture_default_str();
  trainc.option("eval-every", tc.eval_every, "Iterations between evaluations")->capture_default_str();
  trainc.option("depth-refresh", tc.depth_refresh, "Iterations between depth-map refreshes")->capture_default_str();
  trainc.option("beta-max", tc.beta_max, "Final fusion weight")->capture_default_str();
  trainc.option("window", tc.window, "Std window size")->capture_default_str();
  trainc.option("s-coeff", tc.s_coefficient, "Map floor coefficient")->capture_default_str();
  trainc.flag("perceptual", tc.perceptual, "Add the patch L1 term");
  trainc.option("lambda", tc.lambda_perc, "Weight of the patch L1 term")->capture_default_str();
  int grid_res = tc.grid_resolution[0];
  trainc.option("grid", grid_res, "Voxels per axis")->capture_default_str()->check(CLI::Range(2, 1024));
  trainc.option("out", tr_out, "Output directory")->required();

  // eval
  Command evalc(app, "eval", "PSNR and SSIM of a checkpoint on scene cameras");
  std::string ev_ckpt, ev_scene, ev_views, ev_out;
  int ev_samples = 64;
  evalc.option("checkpoint", ev_ckpt, "Grid checkpoint")->required()->check(CLI::ExistingFile);
  evalc.option("scene", ev_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  evalc.option("views", ev_views, "Comma-separated camera indices")->required();
  evalc.option("samples", ev_samples, "Samples per ray")->capture_default_str()->check(CLI::Range(2, 100000));
  evalc.option("out", ev_out, "Optional CSV path");

  // compare
  Command comparec(app, "compare", "Train several strategies with one seed and compare convergence");
  TrainConfig cc = experiment_config();
  std::string cp_scene, cp_strategies, cp_out;
  comparec.option("scene", cp_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  comparec.option("strategies", cp_strategies, "Comma-separated strategy names")->required();
  comparec.option("iters", cc.iterations, "Iterations per strategy")->capture_default_str();
  comparec.option("batch", cc.batch, "Rays per iteration")->capture_default_str();
  comparec.option("seed", cc.seed, "Random seed")->capture_default_str();
  comparec.flag("deterministic", cc.deterministic, "Bitwise-reproducible results");
  comparec.option("lr", cc.learning_rate, "Initial learning rate")->capture_default_str();
  comparec.option("samples", cc.samples, "Samples per training ray")->capture_default_str();
  comparec.option("eval-every", cc.eval_every, "Iterations between evaluations")->capture_default_str();
  comparec.option("depth-refresh", cc.depth_refresh, "Iterations between depth-map refreshes")->capture_default_str();
  comparec.option("out", cp_out, "Output directory")->required();

  try {
    const auto args = expand_config(argc, argv);
    std::vector<const char*> ptrs;
    for (const auto& a : args) ptrs.push_back(a.c_str());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (probmap.app()->parsed()) {
      if (*beta_opt && pm_depth.empty()) throw UsageError("--beta requires --depth");
      if (*beta_opt && !(pm_beta >= 0.0 && pm_beta <= 0.5)) throw UsageError("--beta must lie in [0, 0.5]");
      if (const auto parent = fs::path(pm_prefix).parent_path(); !parent.empty()) prepare_dir(parent.string());
      probmap.input("image", pm_image);
      const Image image = read_png(pm_image);
      const ProbMap pc = normalize_map(pixel_std_map(image, pm_n), MapSource::Pixel, pm_s);
      auto emit = [&](const std::string& tag, const Map2D& map) {
        const fs::path pfm = pm_prefix + "." + tag + ".pfm", png = pm_prefix + "." + tag + ".png";
        write_pfm(pfm.string(), map);
        write_heat_map_png(png.string(), map);
        probmap.output(pfm);
        probmap.output(png);
      };
      emit("pc", pc);
      if (!pm_depth.empty()) {
        probmap.input("depth", pm_depth);
        const Map2D raw = read_pfm(pm_depth);
        DepthMap depth(raw.width(), raw.height());
        std::copy(raw.values().begin(), raw.values().end(), depth.values().begin());
        const ProbMap pd = normalize_map(depth_std_map(depth, pm_n), MapSource::Depth, pm_s);
        emit("pd", pd);
        if (*beta_opt) {
          if (!pc.same_shape(pd)) throw UsageError("image and depth sizes differ");
          emit("fused", fuse(pc, pd, pm_beta));
        }
      }
      probmap.finish(out, fs::path(pm_prefix + ".manifest.json"));
    } else if (render_gt.app()->parsed()) {
      const SceneFile sf = load_scene_input(render_gt, rg_scene);
      std::vector<int> views;
      if (rg_views.empty())
        for (int i = 0; i < static_cast<int>(sf.rig.cameras.size()); ++i) views.push_back(i);
      else
        views = parse_views(rg_views, sf.rig.cameras.size());
      const fs::path dir = prepare_dir(rg_out);
      for (int v : views) {
        const auto gt = render_ground_truth(sf.spec, sf.rig.cameras[v]);
        const fs::path png = dir / ("view_" + std::to_string(v) + ".png");
        const fs::path pfm = dir / ("view_" + std::to_string(v) + ".depth.pfm");
        write_png(png.string(), gt.image);
        write_pfm(pfm.string(), gt.depth);
        render_gt.output(png);
        render_gt.output(pfm);
      }
      render_gt.finish(out, dir / "manifest.json");
    } else if (trainc.app()->parsed()) {
      try {
        tc.strategy = parse_strategy(tr_strategy);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      tc.grid_resolution = {grid_res, grid_res, grid_res};
      tc.threads = trainc.threads();
      tc.validate();
      const SceneFile sf = load_scene_input(trainc, tr_scene);
      const fs::path dir = prepare_dir(tr_out);
      const TrainResult r = train(sf.spec, sf.rig, tc);
      write_text(dir / "curve.csv", curve_csv(r.curve));
      write_checkpoint((dir / "grid.ckpt").string(), r.grid);
      trainc.output(dir / "curve.csv");
      trainc.output(dir / "grid.ckpt");
      trainc.finish(out, dir / "manifest.json");
      if (!r.curve.empty())
        out << "final: iter " << r.curve.back().iteration << " psnr " << r.curve.back().psnr << " ssim "
            << r.curve.back().ssim << "\n";
    } else if (evalc.app()->parsed()) {
      const SceneFile sf = load_scene_input(evalc, ev_scene);
      evalc.input("checkpoint", ev_ckpt);
      const RadianceGrid grid = read_checkpoint(ev_ckpt);
      for (int a = 0; a < 3; ++a)
        if (std::abs(grid.bounds().min[a] - sf.spec.bounds.min[a]) > 1e-5 ||
            std::abs(grid.bounds().max[a] - sf.spec.bounds.max[a]) > 1e-5)
          throw UsageError("checkpoint bounds do not match the scene AABB");
      const auto views = parse_views(ev_views, sf.rig.cameras.size());
      const RenderSettings settings{ev_samples, sf.spec.background};
      std::ostringstream csv;
      csv << "view,psnr,ssim\n";
      double sum_p = 0, sum_s = 0;
      for (int v : views) {
        const auto& cam = sf.rig.cameras[v];
        const Image img = render_image(grid, cam, settings, evalc.threads()).image;
        const Image ref = render_ground_truth(sf.spec, cam).image;
        const double p = psnr(img, ref), s = ssim(img, ref);
        sum_p += p;
        sum_s += s;
        csv << v << ',' << format_value(p) << ',' << format_value(s) << '\n';
      }
      csv << "mean," << format_value(sum_p / views.size()) << ',' << format_value(sum_s / views.size()) << '\n';
      out << csv.str();
      fs::path manifest;
      if (!ev_out.empty()) {
        write_text(ev_out, csv.str());
        evalc.output(ev_out);
        manifest = fs::path(ev_out).replace_extension(".manifest.json");
      }
      evalc.finish(out, manifest);
    } else if (comparec.app()->parsed()) {
      std::vector<Strategy> strategies;
      for (const auto& name : split_list(cp_strategies)) {
        Strategy s;
        try {
          s = parse_strategy(name);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
        if (std::find(strategies.begin(), strategies.end(), s) != strategies.end()) {
          err << "warning: duplicate strategy '" << name << "' ignored\n";
          continue;
        }
        strategies.push_back(s);
      }
      if (strategies.empty()) throw UsageError("empty strategy list");
      cc.threads = comparec.threads();
      cc.validate();
      const SceneFile sf = load_scene_input(comparec, cp_scene);
      const fs::path dir = prepare_dir(cp_out);
      const Comparison cmp = compare_strategies(sf.spec, sf.rig, cc, strategies);
      write_text(dir / "comparison.csv", comparison_csv(cmp));
      comparec.output(dir / "comparison.csv");
      for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        std::string file = "curve_" + cmp.rows[i].strategy + ".csv";
        std::replace(file.begin(), file.end(), '+', '_');
        write_text(dir / file, curve_csv(cmp.curves[i]));
        comparec.output(dir / file);
      }
      comparec.finish(out, dir / "manifest.json");
      out << comparison_csv(cmp);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateMapError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace raysamp
