#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "morseunc/errors.hpp"
#include "morseunc/mandatory.hpp"
#include "morseunc/persistence.hpp"
#include "morseunc/pipeline.hpp"
#include "morseunc/segmentation.hpp"
#include "morseunc/summary_maps.hpp"

namespace py = pybind11;
using namespace morseunc;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using CountArray = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

ScalarGrid to_grid(const FloatArray& a) {
  if (a.ndim() != 2) throw ArgumentError("field must be a 2-D array");
  const auto h = std::size_t(a.shape(0)), w = std::size_t(a.shape(1));
  return ScalarGrid(w, h, std::vector<float>(a.data(), a.data() + a.size()));
}

py::array_t<float> from_grid(const ScalarGrid& g) {
  py::array_t<float> out({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

Ensemble to_ensemble(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(0) == 0) throw ArgumentError("members must be a non-empty (n, height, width) array");
  const auto n = std::size_t(a.shape(0)), h = std::size_t(a.shape(1)), w = std::size_t(a.shape(2));
  Ensemble e;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = a.data() + i * w * h;
    e.members.emplace_back(w, h, std::vector<float>(p, p + w * h));
  }
  return e;
}

template <typename T>
py::array_t<T> image(const std::vector<T>& values, std::size_t h, std::size_t w) {
  py::array_t<T> out({h, w});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint16_t> counts_array(const ProbabilisticMap& p) {
  py::array_t<std::uint16_t> out({p.height, p.width, std::size_t(p.l)});
  std::copy(p.counts.begin(), p.counts.end(), out.mutable_data());
  return out;
}

ProbabilisticMap to_pmap(const CountArray& counts, std::uint32_t n) {
  if (counts.ndim() != 3) throw ArgumentError("counts must be a (height, width, l) array");
  ProbabilisticMap p;
  p.height = std::size_t(counts.shape(0));
  p.width = std::size_t(counts.shape(1));
  p.l = std::uint32_t(counts.shape(2));
  p.n = n;
  p.counts.assign(counts.data(), counts.data() + counts.size());
  return p;
}

SurvivalMode survival_mode(const std::string& name) {
  if (name == "pre_merge") return SurvivalMode::pre_merge;
  if (name == "post_merge") return SurvivalMode::post_merge;
  throw ArgumentError("unknown survival mode: " + name);
}

py::dict pmap_result(const Ensemble& e, const std::vector<MandatoryMaximum>& mm) {
  const auto p = probabilistic_map(e, mm);
  py::dict d;
  d["counts"] = counts_array(p);
  d["n"] = p.n;
  d["l"] = p.l;
  d["mandatory"] = mandatory_to_json(mm, e.width());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Topological uncertainty summaries for ensembles of 2-D scalar fields";

  static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
  static py::exception<DataError> data_error(m, "DataError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    }
  });

  m.def("generate", [](const std::string& fn, std::size_t width, std::size_t height) {
    return from_grid(generate(GeneratorSpec{fn, width, height}));
  }, py::arg("fn"), py::arg("width") = 256, py::arg("height") = 256);

  m.def("segment", [](const FloatArray& field) {
    const auto g = to_grid(field);
    const auto seg = segment(g, GridTopology(g));
    return image(seg.labels, g.height(), g.width());
  }, py::arg("field"), "Ascending-manifold label (maximum vertex id) per vertex.");

  m.def("persistence_pairs", [](const FloatArray& field) {
    const auto g = to_grid(field);
    py::list out;
    for (const auto& p : superlevel_pairs(g, GridTopology(g)).pairs) {
      py::dict d;
      d["extremum"] = p.extremum;
      d["saddle"] = p.saddle;
      d["absorber"] = p.absorber;
      d["persistence"] = p.persistence;
      out.append(d);
    }
    return out;
  }, py::arg("field"));

  m.def("feature_persistence", [](const FloatArray& field) {
    const auto g = to_grid(field);
    return min_feature_persistence(g, GridTopology(g));
  }, py::arg("field"));

  m.def("perturb", [](const FloatArray& field, const std::string& noise_json, std::size_t n, std::uint64_t seed) {
    const auto e = perturb(to_grid(field), noise_from_json(noise_json), n, seed);
    py::array_t<float> out({n, e.height(), e.width()});
    float* dst = out.mutable_data();
    for (const auto& mem : e.members) dst = std::copy(mem.values().begin(), mem.values().end(), dst);
    return out;
  }, py::arg("field"), py::arg("noise"), py::arg("n"), py::arg("seed") = 0,
     "noise is a JSON noise spec, e.g. '{\"kind\": \"uniform_signed_magnitude\", \"amplitude\": 0.1}'.");

  m.def("mandatory_maxima", [](const FloatArray& members) {
    const auto e = to_ensemble(members);
    const auto [lo, hi] = bound_fields(e);
    return mandatory_to_json(mandatory_maxima(lo, hi, GridTopology(lo)), e.width());
  }, py::arg("members"), "Mandatory maxima of an (n, height, width) ensemble as JSON.");

  m.def("probabilistic_map", [](const FloatArray& members) {
    const auto e = to_ensemble(members);
    const auto [lo, hi] = bound_fields(e);
    return pmap_result(e, mandatory_maxima(lo, hi, GridTopology(lo)));
  }, py::arg("members"), "Returns {'counts': (h, w, l) uint16, 'n', 'l', 'mandatory'}.");

  m.def("survival_map", [](const FloatArray& members, const std::string& normalization, const std::string& mode) {
    const auto e = to_ensemble(members);
    const auto s = survival_map(e, normalization_from_string(normalization), survival_mode(mode));
    return image(s.values, s.height, s.width);
  }, py::arg("members"), py::arg("normalization") = "none", py::arg("mode") = "pre_merge");

  m.def("quantize", [](const std::vector<double>& values, std::uint32_t k) { return quantize(values, k); },
        py::arg("values"), py::arg("k"));

  m.def("agreement_cells", [](const CountArray& counts, std::uint32_t n, double a) {
    const auto p = to_pmap(counts, n);
    return image(agreement_cells(p, a), p.height, p.width);
  }, py::arg("counts"), py::arg("n"), py::arg("a"), "Label per pixel, -1 where no label reaches a.");

  m.def("query", [](const CountArray& counts, std::uint32_t n, std::size_t row, std::size_t col) {
    return query_json(to_pmap(counts, n), row, col);
  }, py::arg("counts"), py::arg("n"), py::arg("row"), py::arg("col"));

  m.def("compute", [](const std::string& config_json) {
    py::gil_scoped_release release;
    return compute(config_from_json(config_json)).json;
  }, py::arg("config"), "Runs the pipeline from a JSON config and returns run_summary.json.");
}
