#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "raysamp/cli.hpp"
#include "raysamp/metrics.hpp"
#include "raysamp/parallel.hpp"
#include "raysamp/probmap.hpp"
#include "raysamp/sampler.hpp"
#include "raysamp/trainer.hpp"

namespace py = pybind11;
using namespace raysamp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument("expected an (H, W, 3) array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data().begin());
  return img;
}

template <typename M>
M to_map(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected an (H, W) array");
  M m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Array from_map(const Map2D& m) {
  Array out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array from_image(const Image& img) {
  Array out({img.height(), img.width(), 3});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

SceneFile scene_or_default(const std::optional<std::string>& path) {
  return path ? load_scene(*path) : SceneFile{default_scene(), default_rig()};
}

TrainConfig make_config(std::int64_t iterations, std::int64_t batch, std::uint64_t seed, bool deterministic,
                        std::optional<int> threads) {
  TrainConfig c = experiment_config();
  c.iterations = iterations;
  c.batch = batch;
  c.seed = seed;
  c.deterministic = deterministic;
  c.threads = threads.value_or(default_threads());
  return c;
}

py::list curve_rows(const TrainCurve& curve) {
  py::list rows;
  for (const auto& p : curve)
    rows.append(py::dict(py::arg("iter") = p.iteration, py::arg("wall_ms") = p.wall_ms, py::arg("loss") = p.loss,
                         py::arg("psnr") = p.psnr, py::arg("ssim") = p.ssim));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Guided ray sampling for voxel radiance fields";

  py::register_exception<DegenerateMapError>(m, "DegenerateMapError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("clamp", &clamp, py::arg("lo"), py::arg("hi"), py::arg("x"));

  m.def(
      "pixel_std_map", [](const Array& image, int n) { return from_map(pixel_std_map(to_image(image), n)); },
      py::arg("image"), py::arg("n") = 3, "Local colour std of an (H, W, 3) image, averaged over channels.");
  m.def(
      "depth_std_map", [](const Array& depth, int n) { return from_map(depth_std_map(to_map<DepthMap>(depth), n)); },
      py::arg("depth"), py::arg("n") = 3);
  m.def(
      "normalize_map",
      [](const Array& raw, double s_coefficient) {
        const ProbMap p = normalize_map(to_map<RawStdMap>(raw), MapSource::Pixel, s_coefficient);
        return py::make_tuple(from_map(p), p.floor_threshold);
      },
      py::arg("raw"), py::arg("s_coefficient") = 0.01, "Returns (map, floor threshold).");
  m.def(
      "fuse",
      [](const Array& pc, const Array& pd, double b) {
        return from_map(fuse(to_map<ProbMap>(pc), to_map<ProbMap>(pd), b));
      },
      py::arg("pc"), py::arg("pd"), py::arg("beta"));
  m.def(
      "beta",
      [](std::int64_t iteration, std::int64_t total, double beta_max) {
        return beta(iteration, BetaSchedule{total, beta_max});
      },
      py::arg("iteration"), py::arg("total"), py::arg("beta_max") = 0.5);

  py::class_<DiscreteSampler>(m, "Sampler")
      .def(py::init([](const Array& w) { return DiscreteSampler(to_map<Map2D>(w)); }), py::arg("weights"))
      .def("probability", &DiscreteSampler::probability, py::arg("u"), py::arg("v"))
      .def(
          "draw",
          [](const DiscreteSampler& s, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            const auto batch = s.draw(rng, count);
            py::array_t<int> out({static_cast<py::ssize_t>(count), py::ssize_t{2}});
            auto r = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < count; ++i) {
              r(i, 0) = batch[i].u;
              r(i, 1) = batch[i].v;
            }
            return out;
          },
          py::arg("count"), py::arg("seed") = 0, "Returns a (count, 2) array of (u, v) pixels.");

  m.def(
      "adaptive_distribution",
      [](const std::vector<double>& h) {
        if (h.size() != kRegionCount) throw std::invalid_argument("expected 64 region losses");
        RegionLossStats s;
        std::copy(h.begin(), h.end(), s.mean_loss.begin());
        const auto f = adaptive_distribution(s);
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("region_losses"));

  m.def(
      "psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); }, py::arg("image"),
      py::arg("reference"));
  m.def(
      "ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); }, py::arg("image"),
      py::arg("reference"));

  m.def(
      "render_ground_truth",
      [](std::optional<std::string> scene, int view) {
        const SceneFile sf = scene_or_default(scene);
        if (view < 0 || view >= static_cast<int>(sf.rig.cameras.size()))
          throw std::invalid_argument("view index out of range");
        const auto gt = render_ground_truth(sf.spec, sf.rig.cameras[view]);
        return py::make_tuple(from_image(gt.image), from_map(gt.depth));
      },
      py::arg("scene") = py::none(), py::arg("view") = 0, "Returns (image, depth) of one camera.");

  m.def("strategy_names", &strategy_names);

  m.def(
      "train",
      [](const std::string& strategy, std::int64_t iterations, std::int64_t batch, std::uint64_t seed,
         bool deterministic, std::optional<std::string> scene, std::optional<int> threads) {
        const SceneFile sf = scene_or_default(scene);
        TrainConfig c = make_config(iterations, batch, seed, deterministic, threads);
        c.strategy = parse_strategy(strategy);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(sf.spec, sf.rig, c);
        }
        return curve_rows(r.curve);
      },
      py::arg("strategy") = "uniform", py::arg("iterations") = 1000, py::arg("batch") = 1024, py::arg("seed") = 0,
      py::arg("deterministic") = false, py::arg("scene") = py::none(), py::arg("threads") = py::none(),
      "Trains a grid and returns its learning curve as a list of dicts.");

  m.def(
      "compare",
      [](const std::vector<std::string>& strategies, std::int64_t iterations, std::int64_t batch, std::uint64_t seed,
         bool deterministic, std::optional<std::string> scene, std::optional<int> threads) {
        const SceneFile sf = scene_or_default(scene);
        std::vector<Strategy> list;
        for (const auto& s : strategies) list.push_back(parse_strategy(s));
        Comparison cmp;
        {
          py::gil_scoped_release release;
          cmp = compare_strategies(sf.spec, sf.rig, make_config(iterations, batch, seed, deterministic, threads), list);
        }
        py::list rows;
        for (const auto& r : cmp.rows)
          rows.append(py::dict(py::arg("strategy") = r.strategy, py::arg("iters_to_thresh") = r.iters_to_thresh,
                               py::arg("final_psnr") = r.final_psnr, py::arg("final_ssim") = r.final_ssim,
                               py::arg("wall_ms") = r.wall_ms));
        return py::make_tuple(cmp.threshold_psnr, rows);
      },
      py::arg("strategies"), py::arg("iterations") = 1000, py::arg("batch") = 1024, py::arg("seed") = 0,
      py::arg("deterministic") = false, py::arg("scene") = py::none(), py::arg("threads") = py::none(),
      "Returns (threshold PSNR, rows).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"raysamp"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
