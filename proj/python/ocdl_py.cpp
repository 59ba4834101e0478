#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "ocdl/csc.hpp"
#include "ocdl/dict_space.hpp"
#include "ocdl/ingest.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/persist.hpp"
#include "ocdl/spectral.hpp"
#include "ocdl/trainer.hpp"

namespace py = pybind11;
using namespace ocdl;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

template <typename T, typename A>
Plane<T> to_plane(const A& a, const char* what) {
  if (a.ndim() != 2) throw InvalidArgument(std::string(what) + " must be a 2-D array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  return Plane<T>(h, w, std::vector<T>(a.data(), a.data() + h * w));
}

ImagePlane to_image(const RealArray& a, const char* what = "image") { return to_plane<double>(a, what); }

template <typename T>
py::array_t<T> from_plane(const Plane<T>& p) {
  py::array_t<T> out({p.height(), p.width()});
  std::memcpy(out.mutable_data(), p.data(), p.size() * sizeof(T));
  return out;
}

CoefficientMaps to_stack(const RealArray& a, const char* what) {
  if (a.ndim() != 3) throw InvalidArgument(std::string(what) + " must be a 3-D array (K, H, W)");
  const auto k = static_cast<std::size_t>(a.shape(0));
  const auto h = static_cast<std::size_t>(a.shape(1));
  const auto w = static_cast<std::size_t>(a.shape(2));
  CoefficientMaps out;
  for (std::size_t i = 0; i < k; ++i) {
    const double* src = a.data() + i * h * w;
    out.emplace_back(h, w, std::vector<double>(src, src + h * w));
  }
  return out;
}

py::array_t<double> from_stack(const CoefficientMaps& maps) {
  const std::size_t k = maps.size();
  const std::size_t h = k ? maps[0].height() : 0;
  const std::size_t w = k ? maps[0].width() : 0;
  py::array_t<double> out({k, h, w});
  for (std::size_t i = 0; i < k; ++i) std::memcpy(out.mutable_data() + i * h * w, maps[i].data(), h * w * sizeof(double));
  return out;
}

FilterBank to_bank(const RealArray& a) {
  if (a.ndim() != 3 || a.shape(1) != a.shape(2)) throw InvalidArgument("filters must be a (K, m, m) array");
  const auto k = static_cast<std::size_t>(a.shape(0));
  const auto m = static_cast<std::size_t>(a.shape(1));
  FilterBank bank{m, {}};
  for (std::size_t i = 0; i < k; ++i) {
    const double* src = a.data() + i * m * m;
    bank.filters.emplace_back(m, std::vector<double>(src, src + m * m));
  }
  return bank;
}

py::array_t<double> from_bank(const FilterBank& bank) {
  const std::size_t k = bank.size(), m = bank.side;
  py::array_t<double> out({k, m, m});
  for (std::size_t i = 0; i < k; ++i) {
    std::memcpy(out.mutable_data() + i * m * m, bank.filters[i].values.data(), m * m * sizeof(double));
  }
  return out;
}

AdmmSettings settings(double rho0, int max_iter, double eps) {
  AdmmSettings s;
  s.rho0 = rho0;
  s.max_iter = max_iter;
  s.eps_abs = eps;
  s.eps_rel = eps;
  s.validate();
  return s;
}

py::dict metrics_dict(const MetricsRow& r) {
  py::dict d;
  d["sample_index"] = r.sample_index;
  d["csc_iterations"] = r.csc_iterations;
  d["dict_iterations"] = r.dict_iterations;
  d["csc_objective"] = r.csc_objective;
  d["approx_fit_term"] = r.approx_fit_term;
  d["wall_time_seconds"] = r.wall_time_seconds;
  return d;
}

TrainOptions train_options(const std::string& algorithm, std::size_t filters, std::size_t filter_size,
                           std::uint64_t seed, double lambda_frac, std::optional<double> lambda_abs, double rho0,
                           int max_iter, double eps) {
  TrainOptions o;
  o.algorithm = parse_algorithm(algorithm);
  o.filters = filters;
  o.filter_size = filter_size;
  o.seed = seed;
  o.lambda_frac = lambda_frac;
  o.lambda_abs = lambda_abs;
  o.csc = settings(rho0, max_iter, eps);
  o.dictionary = o.csc;
  return o;
}

}  // namespace

PYBIND11_MODULE(_ocdl, m) {
  m.doc() = "Convolutional sparse coding and online dictionary learning";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);

  m.def("forward_dft", [](const RealArray& a) { return from_plane(forward_dft(to_image(a))); }, py::arg("plane"),
        "Unnormalized 2-D DFT.");
  m.def(
      "inverse_dft_real",
      [](const ComplexArray& a) { return from_plane(inverse_dft_real(to_plane<Complex>(a, "spectrum"))); },
      py::arg("spectrum"), "Inverse DFT (1/P scaling), real part.");

  m.def(
      "init_dictionary",
      [](std::size_t k, std::size_t side, std::uint64_t seed) { return from_bank(init_dictionary(k, side, seed)); },
      py::arg("filters"), py::arg("side"), py::arg("seed") = 0);
  m.def(
      "project_filter",
      [](const RealArray& candidate, std::size_t side) {
        const FilterSupport f = project_filter(to_image(candidate, "candidate"), side);
        return from_plane(ImagePlane(side, side, f.values));
      },
      py::arg("candidate"), py::arg("side"),
      "Keeps the top-left side x side block and scales it into the unit ball.");

  m.def(
      "lambda_max", [](const RealArray& s, const RealArray& d) { return lambda_max(to_image(s), to_bank(d)); },
      py::arg("signal"), py::arg("filters"));
  m.def(
      "csc_objective",
      [](const RealArray& s, const RealArray& d, const RealArray& x, double lam) {
        return csc_objective(to_image(s), to_bank(d), to_stack(x, "maps"), lam);
      },
      py::arg("signal"), py::arg("filters"), py::arg("maps"), py::arg("lmbda"));
  m.def(
      "csc_solve",
      [](const RealArray& s, const RealArray& d, double lam, double rho0, int max_iter, double eps) {
        const ImagePlane sig = to_image(s);
        const FilterBank bank = to_bank(d);
        CscResult r;
        {
          py::gil_scoped_release release;
          r = csc_solve(sig, bank, lam, settings(rho0, max_iter, eps));
        }
        py::dict info;
        info["iterations"] = r.status.iterations;
        info["converged"] = r.status.converged;
        info["primal_residual"] = r.status.primal_residual;
        info["dual_residual"] = r.status.dual_residual;
        return py::make_tuple(from_stack(r.maps), info);
      },
      py::arg("signal"), py::arg("filters"), py::arg("lmbda"), py::arg("rho0") = 10.0, py::arg("max_iter") = 300,
      py::arg("eps") = 1e-4, "Sparse codes (K, H, W) and solver status.");

  m.def(
      "tikhonov_highpass",
      [](const RealArray& s, double reg) {
        const HighpassSplit sp = tikhonov_highpass(to_image(s), reg);
        return py::make_tuple(from_plane(sp.lowpass), from_plane(sp.highpass));
      },
      py::arg("signal"), py::arg("reg") = 5.0, "Returns (lowpass, highpass).");
  m.def(
      "center_crop_resize",
      [](const RealArray& s, std::size_t h, std::size_t w) { return from_plane(center_crop_resize(to_image(s), h, w)); },
      py::arg("image"), py::arg("height"), py::arg("width"));
  m.def(
      "load_grayscale",
      [](const std::filesystem::path& p, bool allow_16bit) {
        LoadOptions o;
        o.allow_16bit = allow_16bit;
        return from_plane(load_grayscale(p, o));
      },
      py::arg("path"), py::arg("allow_16bit") = false);

  m.def("checkpoint_size", &checkpoint_size, py::arg("filters"), py::arg("height"), py::arg("width"), py::arg("side"));
  m.def(
      "export_dictionary_tiles",
      [](const RealArray& d, const std::filesystem::path& path, std::size_t cols) {
        const TileLayout t = export_dictionary_tiles(to_bank(d), path, cols);
        return py::make_tuple(t.height, t.width);
      },
      py::arg("filters"), py::arg("path"), py::arg("cols") = 8, "Writes a PNG; returns its (height, width).");

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](std::size_t height, std::size_t width, const std::string& algorithm, std::size_t filters,
                       std::size_t filter_size, std::uint64_t seed, double lambda_frac,
                       std::optional<double> lambda_abs, double rho0, int max_iter, double eps) {
             return Trainer(
                 train_options(algorithm, filters, filter_size, seed, lambda_frac, lambda_abs, rho0, max_iter, eps),
                 height, width);
           }),
           py::arg("height"), py::arg("width"), py::arg("algorithm") = "alg2", py::arg("filters") = 16,
           py::arg("filter_size") = 8, py::arg("seed") = 0, py::arg("lambda_frac") = 0.1,
           py::arg("lambda_abs") = py::none(), py::arg("rho0") = 10.0, py::arg("max_iter") = 300,
           py::arg("eps") = 1e-4)
      .def_static(
          "load",
          [](const std::filesystem::path& path, int max_iter, double eps) {
            const TrainerState st = load_checkpoint(path);
            TrainOptions o = train_options(algorithm_name(st.algorithm), st.dictionary.size(), st.dictionary.side, 0,
                                           0.1, std::nullopt, st.rho0, max_iter, eps);
            return Trainer(o, st);
          },
          py::arg("path"), py::arg("max_iter") = 300, py::arg("eps") = 1e-4, "Resume from a checkpoint.")
      .def(
          "step",
          [](Trainer& t, const RealArray& s) {
            const ImagePlane sig = to_image(s);
            MetricsRow r;
            {
              py::gil_scoped_release release;
              r = t.step(sig);
            }
            return metrics_dict(r);
          },
          py::arg("signal"), "Codes one sample and updates the dictionary; returns its metrics.")
      .def("save", [](const Trainer& t, const std::filesystem::path& p) { save_checkpoint(t.state(), p); },
           py::arg("path"))
      .def_property_readonly("dictionary", [](const Trainer& t) { return from_bank(t.dictionary()); })
      .def_property_readonly("lmbda", &Trainer::lambda)
      .def_property_readonly("samples_seen", [](const Trainer& t) { return t.state().samples_seen(); })
      .def_property_readonly("algorithm",
                             [](const Trainer& t) { return std::string(algorithm_name(t.state().algorithm)); })
      .def("checkpoint_bytes", [](const Trainer& t) {
        const auto b = encode_checkpoint(t.state());
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      });
}
