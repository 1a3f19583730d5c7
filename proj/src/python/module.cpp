#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "habgate/eval.hpp"
#include "habgate/featsel.hpp"
#include "habgate/models/model.hpp"
#include "habgate/pipeline.hpp"
#include "habgate/preprocess.hpp"
#include "habgate/stats.hpp"
#include "habgate/synth.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace habgate;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
    default:
      return py::none();
  }
}

json from_py(const py::handle& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::vector<Status> statuses(const std::vector<bool>& closed) {
  std::vector<Status> out;
  out.reserve(closed.size());
  for (bool c : closed) out.push_back(c ? Status::Closed : Status::Open);
  return out;
}

KeyValues key_values(const std::map<std::string, std::string>& entries) {
  std::string text;
  for (const auto& [k, v] : entries) text += k + "=" + v + "\n";
  std::istringstream in(text);
  return KeyValues::parse(in);
}

py::dict matrix_dict(const DesignMatrix& m) {
  py::dict d;
  d["zone"] = m.zone_id;
  d["features"] = m.feature_names;
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < m.rows(); ++r) rows.emplace_back(m.row(r).begin(), m.row(r).end());
  d["rows"] = rows;
  std::vector<bool> closed;
  for (auto s : m.labels) closed.push_back(s == Status::Closed);
  d["closed"] = closed;
  std::vector<std::string> weeks;
  for (const auto& w : m.weeks) weeks.push_back(format_iso_week(w));
  d["weeks"] = weeks;
  return d;
}

/// Trained model with its feature order, usable from Python.
struct PyModel {
  models::TrainedModel model;
  json selection;

  py::object predict(const std::map<std::string, double>& row) const {
    std::vector<std::string> names;
    std::vector<double> values;
    for (const auto& [k, v] : row) {
      names.push_back(k);
      values.push_back(v);
    }
    return to_py(pipeline::predict_record(model, pipeline::align_row(model.feature_names, names, values)));
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the habgate shellfish-closure toolkit";
  static py::exception<Error> error(m, "HabgateError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.attr("__version__") = std::string(pipeline::kToolVersion);

  m.def(
      "metrics",
      [](const std::vector<bool>& truth, const std::vector<bool>& predicted) {
        const auto cm = eval::confusion(statuses(truth), statuses(predicted));
        py::dict d;
        d["tp"] = cm.tp;
        d["fp"] = cm.fp;
        d["fn"] = cm.fn;
        d["tn"] = cm.tn;
        d["accuracy"] = eval::accuracy(cm);
        const auto s = eval::sensitivity(cm);
        d["sensitivity"] = s ? py::object(py::float_(*s)) : py::none();
        d["kappa"] = eval::kappa(cm);
        return d;
      },
      py::arg("truth"), py::arg("predicted"), "Closure-positive metrics; True means closed.");
  m.def("kfold_split", &eval::kfold_split, py::arg("n"), py::arg("k"), py::arg("seed"));

  m.def(
      "shapiro_wilk", [](const std::vector<double>& x, double alpha) { return to_py(stats::to_json(stats::shapiro_wilk(x, alpha))); },
      py::arg("x"), py::arg("alpha") = 0.05);
  m.def(
      "anderson_darling",
      [](const std::vector<double>& x, double alpha) { return to_py(stats::to_json(stats::anderson_darling(x, alpha))); },
      py::arg("x"), py::arg("alpha") = 0.05);
  m.def(
      "one_way_anova",
      [](const std::map<std::string, std::vector<double>>& groups, double alpha) {
        std::vector<stats::SampleGroup> g;
        for (const auto& [k, v] : groups) g.push_back({k, v});
        return to_py(stats::to_json(stats::one_way_anova(g, alpha)));
      },
      py::arg("groups"), py::arg("alpha") = 0.05);
  m.def(
      "tukey_kramer",
      [](const std::map<std::string, std::vector<double>>& groups, double alpha) {
        std::vector<stats::SampleGroup> g;
        for (const auto& [k, v] : groups) g.push_back({k, v});
        py::list out;
        for (const auto& r : stats::tukey_kramer(g, alpha)) out.append(to_py(stats::to_json(r)));
        return out;
      },
      py::arg("groups"), py::arg("alpha") = 0.05);
  m.def("studentized_range_cdf", &stats::studentized_range_cdf, py::arg("q"), py::arg("k"), py::arg("df"));
  m.def("studentized_range_quantile", &stats::studentized_range_quantile, py::arg("p"), py::arg("k"), py::arg("df"));

  m.def(
      "synthesize",
      [](const std::filesystem::path& out_dir, const std::map<std::string, std::string>& config) {
        const auto cfg = synth::config_from_key_values(key_values(config));
        const auto g = synth::generate(cfg);
        synth::write_dataset(out_dir, g.data);
        return to_py(synth::to_json(synth::bayes_reference(g.latent, cfg.zones)));
      },
      py::arg("out_dir"), py::arg("config") = std::map<std::string, std::string>{},
      "Writes the four input CSVs and returns the reference bound.");

  m.def(
      "zone_matrix",
      [](const std::filesystem::path& data_dir, const std::string& zone, bool drop_nulls) {
        pipeline::RunConfig cfg;
        cfg.data_dir = data_dir;
        pipeline::RunManifest manifest;
        const auto data = pipeline::load_inputs(cfg, manifest);
        auto mat = preprocess::assemble_zone_matrix(data, zone);
        return matrix_dict(drop_nulls ? preprocess::drop_null_rows(mat) : mat);
      },
      py::arg("data_dir"), py::arg("zone"), py::arg("drop_nulls") = true,
      "Design matrix of one zone as a dict of features, rows, closed flags and weeks.");

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("features", [](const PyModel& p) { return p.model.feature_names; })
      .def_property_readonly("spec", [](const PyModel& p) { return to_py(models::spec_to_json(p.model.spec)); })
      .def_property_readonly("selection", [](const PyModel& p) { return to_py(p.selection); })
      .def("predict", &PyModel::predict, py::arg("row"), "Label and rationale for a row given as {feature: value}.")
      .def("save", [](const PyModel& p, const std::filesystem::path& path) { models::save_model(path, p.model); });

  m.def(
      "train",
      [](const std::filesystem::path& matrix_csv, const py::dict& spec, const py::dict& selection, std::uint64_t seed) {
        const auto mat = preprocess::load_matrix(matrix_csv);
        const auto s = models::spec_from_json(from_py(spec));
        const auto sel = featsel::selection_spec_from_json(from_py(selection));
        auto r = pipeline::train(mat, s, sel, seed);
        return PyModel{std::move(r.model), featsel::to_json(r.selection)};
      },
      py::arg("matrix_csv"), py::arg("spec"), py::arg("selection") = py::dict(), py::arg("seed") = 1);
  m.def(
      "load_model", [](const std::filesystem::path& path) { return PyModel{models::load_model(path), json::object()}; },
      py::arg("path"));

  m.def(
      "run",
      [](const std::map<std::string, std::string>& config, const std::optional<std::filesystem::path>& out_dir) {
        const auto cfg = pipeline::run_config_from_key_values(key_values(config));
        const auto result = pipeline::run_pipeline(cfg);
        if (out_dir) pipeline::write_bundle(*out_dir, result.bundle);
        return to_py(json::parse(result.bundle.files.at("manifest.json")));
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt,
      "Runs the pipeline from key=value settings and returns the manifest.");
}
