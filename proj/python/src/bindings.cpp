#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tumorkit/augment.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/imgproc.hpp"
#include "tumorkit/metrics.hpp"
#include "tumorkit/nn/config.hpp"
#include "tumorkit/nn/ops.hpp"
#include "tumorkit/pipeline/commands.hpp"
#include "tumorkit/segment.hpp"

namespace py = pybind11;
namespace tk = tumorkit;
namespace tp = tumorkit::pipeline;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

tk::GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw tk::ShapeError("expected a 2-D array (height, width)");
  const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1));
  return tk::GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const tk::GrayImage& img) {
  Array out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

tk::BinaryMask to_mask(const MaskArray& a) {
  if (a.ndim() != 2) throw tk::ShapeError("expected a 2-D boolean array (height, width)");
  std::vector<std::uint8_t> cells(a.data(), a.data() + a.size());
  return tk::BinaryMask(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)),
                        std::move(cells));
}

MaskArray from_mask(const tk::BinaryMask& m) {
  MaskArray out({m.height(), m.width()});
  bool* p = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = m.at(i);
  return out;
}

std::vector<double> to_points(const Array& a) { return {a.data(), a.data() + a.size()}; }

tp::PipelineConfig config_from(const std::string& toml_text, const std::filesystem::path& base_dir) {
  return tp::parse_config(toml_text, base_dir);
}

// Runs a command with captured streams: (status, stdout, stderr).
template <class F>
py::tuple captured(F&& f) {
  std::ostringstream out, err;
  const int status = f(out, err);
  return py::make_tuple(status, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the tumorkit toolkit";

  static py::exception<tk::Error> base(m, "TumorkitError");
  static py::exception<tk::InvalidArgument> invalid(m, "InvalidArgument", base.ptr());
  static py::exception<tk::ShapeError> shape(m, "ShapeError", base.ptr());
  static py::exception<tk::ParseError> parse(m, "ParseError", base.ptr());
  static py::exception<tk::IoError> io(m, "IoError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const tk::InvalidArgument& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const tk::ShapeError& e) {
      PyErr_SetString(shape.ptr(), e.what());
    } catch (const tk::ParseError& e) {
      PyErr_SetString(parse.ptr(), e.what());
    } catch (const tk::IoError& e) {
      PyErr_SetString(io.ptr(), e.what());
    } catch (const tk::Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def("derive_seed", [](std::uint64_t seed, const std::string& tag) { return tk::derive_seed(seed, tag); },
        py::arg("seed"), py::arg("tag"));

  // imgproc
  m.def("box_smooth", [](const Array& img, std::size_t k) { return from_image(tk::box_smooth(to_image(img), k)); },
        py::arg("image"), py::arg("kernel_size") = 7);
  m.def("gaussian_smooth",
        [](const Array& img, std::size_t k, double sigma) {
          return from_image(tk::gaussian_smooth(to_image(img), k, sigma));
        },
        py::arg("image"), py::arg("kernel_size"), py::arg("sigma"));
  m.def("bilateral_filter",
        [](const Array& img, std::size_t radius, double sigma_space, double sigma_range) {
          tk::BilateralParams p;
          p.radius = radius;
          p.sigma_space = sigma_space;
          p.sigma_range = sigma_range;
          return from_image(tk::bilateral_filter(to_image(img), p));
        },
        py::arg("image"), py::arg("radius") = tk::BilateralParams{}.radius,
        py::arg("sigma_space") = tk::BilateralParams{}.sigma_space,
        py::arg("sigma_range") = tk::BilateralParams{}.sigma_range);
  m.def("resize",
        [](const Array& img, std::size_t w, std::size_t h) { return from_image(tk::resize(to_image(img), w, h)); },
        py::arg("image"), py::arg("width"), py::arg("height"));
  m.def("preprocess",
        [](const Array& img) {
          return from_image(tk::preprocess_pipeline(to_image(img), tk::PreprocessConfig::defaults()));
        },
        py::arg("image"), "Default smooth -> bilateral preprocessing.");

  // segment
  py::class_<tk::ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &tk::ClusterModel::k)
      .def_readonly("centroids", &tk::ClusterModel::centroids)
      .def_readonly("assignments", &tk::ClusterModel::assignments)
      .def_readonly("wcss", &tk::ClusterModel::wcss)
      .def_readonly("wcss_history", &tk::ClusterModel::wcss_history)
      .def_readonly("restart", &tk::ClusterModel::restart);
  m.def("kmeans",
        [](const Array& points, std::size_t k, std::size_t restarts, std::uint64_t seed) {
          tk::KMeansConfig cfg;
          cfg.k = k;
          cfg.restarts = restarts;
          cfg.seed = seed;
          return tk::kmeans(to_points(points), cfg);
        },
        py::arg("points"), py::arg("k") = 3, py::arg("restarts") = 10, py::arg("seed") = 0);
  m.def("elbow_scan",
        [](const Array& points, std::size_t k_max, std::uint64_t seed, bool linear) {
          tk::KMeansConfig cfg;
          cfg.seed = seed;
          const auto r = tk::elbow_scan(to_points(points), k_max, cfg,
                                        linear ? tk::ElbowRule::Linear : tk::ElbowRule::LogSecondDifference);
          return py::make_tuple(r.chosen_k, r.wcss_curve);
        },
        py::arg("points"), py::arg("k_max") = 8, py::arg("seed") = 0, py::arg("linear") = false,
        "Returns (chosen_k, wcss_curve).");
  m.def("choose_elbow",
        [](const std::vector<double>& curve, bool linear) {
          return tk::choose_elbow(curve, linear ? tk::ElbowRule::Linear : tk::ElbowRule::LogSecondDifference);
        },
        py::arg("wcss_curve"), py::arg("linear") = false);
  m.def("segment",
        [](const Array& img, std::size_t k, std::uint64_t seed) {
          tk::KMeansConfig cfg;
          cfg.k = k;
          cfg.seed = seed;
          const tk::GrayImage pre = tk::preprocess_pipeline(to_image(img), tk::PreprocessConfig::defaults());
          return from_mask(tk::extract_tumor_mask(pre, tk::kmeans(pre, cfg)));
        },
        py::arg("image"), py::arg("k") = 3, py::arg("seed") = 0,
        "preprocess -> kmeans -> brightest cluster mask.");

  // metrics
  m.def("iou", [](const MaskArray& a, const MaskArray& b) { return tk::iou(to_mask(a), to_mask(b)); },
        py::arg("predicted"), py::arg("truth"));

  // augment
  m.def("affine_warp",
        [](const Array& img, double shear, double zoom) {
          return from_image(tk::affine_warp(to_image(img), shear, zoom));
        },
        py::arg("image"), py::arg("shear"), py::arg("zoom"));
  m.def("hflip", [](const Array& img) { return from_image(tk::hflip(to_image(img))); }, py::arg("image"));

  // nn
  m.def("bce_loss",
        [](const std::vector<double>& p, const std::vector<double>& y) {
          return tk::nn::bce_loss(tk::nn::Tensor({p.size()}, p), tk::nn::Tensor({y.size()}, y));
        },
        py::arg("probabilities"), py::arg("labels"));
  m.def("resnet_mini_parameter_count",
        [](std::size_t h, std::size_t w, std::size_t c) {
          return tk::nn::count_parameters(tk::nn::resnet_mini({h, w, c})).trainable;
        },
        py::arg("height") = 64, py::arg("width") = 64, py::arg("channels") = 1);

  // pipeline commands; config is TOML text, relative paths resolve against base_dir
  m.def("synth",
        [](const std::filesystem::path& dir, std::size_t count, std::size_t size, std::uint64_t seed) {
          tp::SynthConfig sc;
          sc.count = count;
          sc.size = size;
          sc.seed = seed;
          return captured([&](std::ostream& out, std::ostream&) { return tp::cmd_synth(sc, dir, out); });
        },
        py::arg("directory"), py::arg("count") = 200, py::arg("size") = 64, py::arg("seed") = 0);
  m.def("run_elbow",
        [](const std::string& toml, const std::filesystem::path& base) {
          const auto cfg = config_from(toml, base);
          return captured([&](std::ostream& o, std::ostream& e) { return tp::cmd_elbow(cfg, o, e); });
        },
        py::arg("config_toml"), py::arg("base_dir") = std::filesystem::path{});
  m.def("run_segment",
        [](const std::string& toml, const std::filesystem::path& base) {
          const auto cfg = config_from(toml, base);
          return captured([&](std::ostream& o, std::ostream& e) { return tp::cmd_segment(cfg, o, e); });
        },
        py::arg("config_toml"), py::arg("base_dir") = std::filesystem::path{});
  m.def("run_train",
        [](const std::string& toml, const std::filesystem::path& base) {
          const auto cfg = config_from(toml, base);
          std::ostringstream out, err;
          int status;
          {
            py::gil_scoped_release release;
            status = tp::cmd_train(cfg, out, err);
          }
          return py::make_tuple(status, out.str(), err.str());
        },
        py::arg("config_toml"), py::arg("base_dir") = std::filesystem::path{});
  m.def("run_evaluate",
        [](const std::string& toml, const std::filesystem::path& base, const std::filesystem::path& checkpoint,
           const std::string& split) {
          const auto cfg = config_from(toml, base);
          return captured(
              [&](std::ostream& o, std::ostream& e) { return tp::cmd_evaluate(cfg, checkpoint, split, o, e); });
        },
        py::arg("config_toml"), py::arg("base_dir"), py::arg("checkpoint"), py::arg("split") = "test");
}
