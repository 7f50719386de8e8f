#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <memory>
#include <sstream>

#include "geoshap/background.hpp"
#include "geoshap/coalition.hpp"
#include "geoshap/errors.hpp"
#include "geoshap/explainer.hpp"
#include "geoshap/models.hpp"
#include "geoshap/oracle.hpp"
#include "geoshap/postprocess.hpp"
#include "geoshap/result_io.hpp"
#include "geoshap/simulation.hpp"

namespace py = pybind11;
using namespace geoshap;

namespace {

BackgroundData to_background(const py::object& background, const Matrix& x,
                             std::uint64_t seed) {
  if (py::isinstance<py::str>(background)) {
    BackgroundSpec spec = BackgroundSpec::parse(background.cast<std::string>());
    const std::string text = background.cast<std::string>();
    if ((spec.mode == BackgroundSpec::Mode::kSample ||
         spec.mode == BackgroundSpec::Mode::kKMeans) &&
        std::count(text.begin(), text.end(), ':') == 1) {
      spec.seed = seed;
    }
    return select_background(x, spec);
  }
  return BackgroundData::uniform(background.cast<Matrix>(), "custom");
}

// Python callables are wrapped as a serialized predictor that takes the GIL
// for each call.
std::unique_ptr<Predictor> wrap_callable(py::function fn, int arity) {
  auto holder = std::make_shared<py::function>(std::move(fn));
  auto call = [holder](const Matrix& x) -> Vector {
    py::gil_scoped_acquire gil;
    return (*holder)(x).cast<Vector>();
  };
  return std::make_unique<FunctionPredictor>(call, arity, "python:callable", false);
}

GeoShapleyResult explain(const py::object& model, const Matrix& x,
                         const std::vector<int>& geo_indices,
                         std::optional<std::vector<std::string>> feature_names,
                         const py::object& background, int workers,
                         std::uint64_t seed, bool skip_failed) {
  const GeoSpec spec = feature_names ? GeoSpec(*feature_names, geo_indices)
                                     : GeoSpec::unnamed(static_cast<int>(x.cols()),
                                                        geo_indices);
  const BackgroundData bg = to_background(background, x, seed);
  ExplainOptions options;
  options.workers = workers;
  options.seed = seed;
  options.skip_failed = skip_failed;

  std::unique_ptr<Predictor> owned;
  const Predictor* predictor = nullptr;
  if (py::isinstance<Predictor>(model)) {
    predictor = model.cast<const Predictor*>();
  } else if (py::isinstance<py::function>(model)) {
    owned = wrap_callable(model.cast<py::function>(), static_cast<int>(x.cols()));
    predictor = owned.get();
  } else {
    throw ConfigError("model must be a geoshap predictor or a callable");
  }
  GeoShapleyResult result;
  {
    py::gil_scoped_release release;
    result = explain_batch(*predictor, x, spec, bg, options);
  }
  return result;
}

GeoSpec spec_of(const GeoShapleyResult& r) {
  return GeoSpec(r.metadata.feature_names, r.metadata.geo_indices);
}

py::object to_fraction(const oracle::Rational& r) {
  const auto fraction = py::module_::import("fractions").attr("Fraction");
  std::ostringstream num, den;
  num << boost::multiprecision::numerator(r);
  den << boost::multiprecision::denominator(r);
  return fraction(py::int_(py::str(num.str())), py::int_(py::str(den.str())));
}

oracle::Rational from_python(const py::handle& value) {
  const auto fraction = py::module_::import("fractions").attr("Fraction")(value);
  const std::string num = py::str(fraction.attr("numerator"));
  const std::string den = py::str(fraction.attr("denominator"));
  return oracle::Rational(boost::multiprecision::cpp_int(num),
                          boost::multiprecision::cpp_int(den));
}

int players_of(std::size_t size) {
  int q = 0;
  while ((std::size_t{1} << q) < size) ++q;
  if ((std::size_t{1} << q) != size) {
    throw ConfigError("game table length must be a power of two");
  }
  return q;
}

}  // namespace

PYBIND11_MODULE(_geoshap, m) {
  m.doc() = "GeoShapley explanations for spatial prediction models";

  auto base = py::register_exception<Error>(m, "GeoshapError", PyExc_RuntimeError);
  auto config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", config.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  auto predictor_error =
      py::register_exception<PredictorError>(m, "PredictorError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", predictor_error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Predictor>(m, "Predictor")
      .def("predict", &Predictor::predict, py::arg("x"))
      .def_property_readonly("arity", &Predictor::arity)
      .def_property_readonly("descriptor", &Predictor::descriptor);

  py::class_<OlsModel, Predictor>(m, "OlsModel")
      .def(py::init<Vector>(), py::arg("coefficients"))
      .def_static("fit", &OlsModel::fit, py::arg("x"), py::arg("y"))
      .def_property_readonly("coefficients", &OlsModel::coefficients);

  py::class_<TrueModel, Predictor>(m, "TrueModel").def(py::init<>());

  py::class_<GeoShapleyResult>(m, "GeoShapleyResult")
      .def_readonly("base_value", &GeoShapleyResult::base_value)
      .def_readonly("phi_geo", &GeoShapleyResult::phi_geo)
      .def_readonly("phi_main", &GeoShapleyResult::phi_main)
      .def_readonly("phi_geo_interaction", &GeoShapleyResult::phi_geo_interaction)
      .def_readonly("prediction", &GeoShapleyResult::prediction)
      .def_readonly("reconstruction_residual", &GeoShapleyResult::reconstruction_residual)
      .def_readonly("explained", &GeoShapleyResult::explained)
      .def_readonly("failures", &GeoShapleyResult::failures)
      .def_readonly("instances", &GeoShapleyResult::instances)
      .def_property_readonly("feature_names",
                             [](const GeoShapleyResult& r) { return r.metadata.feature_names; })
      .def_property_readonly("geo_indices",
                             [](const GeoShapleyResult& r) { return r.metadata.geo_indices; })
      .def_property_readonly("non_geo_names", [](const GeoShapleyResult& r) {
        return r.metadata.non_geo_names();
      })
      .def("__len__", &GeoShapleyResult::size)
      .def("to_json",
           [](const GeoShapleyResult& r) {
             std::ostringstream s;
             write_result_json(r, s);
             return s.str();
           })
      .def("to_csv",
           [](const GeoShapleyResult& r) {
             std::ostringstream s;
             write_result_csv(r, s);
             return s.str();
           })
      .def_static("from_json", [](const std::string& text) {
        std::istringstream s(text);
        return read_result_json(s);
      });

  m.def("explain", &explain, py::arg("model"), py::arg("x"), py::arg("geo_indices"),
        py::arg("feature_names") = py::none(), py::arg("background") = "full",
        py::arg("workers") = 1, py::arg("seed") = 0, py::arg("skip_failed") = false,
        "Explain every row of x. model is a geoshap predictor or a callable "
        "mapping an (n, p) array to n predictions; background is a spec string "
        "or an (m, p) array with uniform weights.");

  m.def(
      "kernel_weight",
      [](int q, int s) {
        const KernelWeight w = kernel_weight(q, s);
        return w.infinite ? std::numeric_limits<double>::infinity() : w.value;
      },
      py::arg("q"), py::arg("s"));
  m.def(
      "enumerate_coalitions",
      [](int q) {
        std::vector<std::uint32_t> out;
        for (const auto& c : enumerate_coalitions(q)) out.push_back(c.bits);
        return out;
      },
      py::arg("q"));
  m.def(
      "exact_shapley",
      [](const py::sequence& values, int j) {
        std::vector<oracle::Rational> table;
        for (const auto& v : values) table.push_back(from_python(v));
        const oracle::ExactGame game{players_of(table.size()), std::nullopt, table};
        if (j < 0 || j >= game.q) throw ConfigError("player index out of range");
        return to_fraction(oracle::exact_shapley(game, j));
      },
      py::arg("values"), py::arg("j"),
      "Exact Shapley value of player j for a game tabulated by coalition bitmask.");

  m.def(
      "generate_dataset",
      [](std::uint64_t seed, double noise_sd, std::optional<int> n) {
        const auto d = simulation::generate_dataset(seed, noise_sd, n);
        py::dict out;
        out["coords"] = d.coords;
        out["x"] = d.x;
        out["features"] = d.features();
        out["y_signal"] = d.y_signal;
        out["y"] = d.y;
        out["f0"] = d.f0_surface;
        out["beta1"] = d.beta1_surface;
        out["beta2"] = d.beta2_surface;
        out["theoretical_r2"] = d.theoretical_r2();
        return out;
      },
      py::arg("seed") = 42, py::arg("noise_sd") = 1.0, py::arg("n") = py::none());

  m.def(
      "select_background",
      [](const Matrix& x, const std::string& spec) {
        const BackgroundData bg = select_background(x, BackgroundSpec::parse(spec));
        return py::make_tuple(bg.rows, bg.row_weights);
      },
      py::arg("x"), py::arg("spec"));
  m.def(
      "kmeans",
      [](const Matrix& x, int k, std::uint64_t seed) {
        const KMeansResult r = kmeans(x, k, seed);
        py::dict out;
        out["centroids"] = r.centroids;
        out["assignment"] = r.assignment;
        out["cluster_sizes"] = r.cluster_sizes;
        out["inertia"] = r.inertia();
        out["iterations"] = r.iterations;
        return out;
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "svc_recover",
      [](const GeoShapleyResult& result, int j, const Matrix& background, double rel_tol) {
        const SvcSurface s =
            svc_recover(result, result.instances, j, spec_of(result),
                        BackgroundData::uniform(background), rel_tol);
        return py::make_tuple(s.beta_hat, s.defined_mask);
      },
      py::arg("result"), py::arg("j"), py::arg("background"), py::arg("rel_tol") = 0.1,
      "Local coefficients for non-location feature j and the defined-cell mask.");
  m.def("intrinsic_effect", &intrinsic_effect, py::arg("result"));
  m.def(
      "rank_features",
      [](const GeoShapleyResult& result) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& r : rank_features(result)) out.emplace_back(r.label, r.mean_abs_value);
        return out;
      },
      py::arg("result"));
  m.def("log10_to_percent", &log10_to_percent, py::arg("phi"));
}
