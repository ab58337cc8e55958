#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "urfc/metrics.hpp"
#include "urfc/pipeline.hpp"
#include "urfc/synth.hpp"

namespace py = pybind11;
using namespace urfc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "urban region function recognition: parsing, features, GBDT, fusion, metrics";

  m.attr("NUM_CATEGORIES") = kNumCategories;
  m.attr("STAT_DIM") = kStatDim;
  m.attr("ACTIVITY_DIM") = kActivityDim;
  m.attr("GRAPH_DIM") = kGraphDim;
  m.attr("MULTI_DIM") = kMultiDim;
  m.attr("IMAGE_DIM") = kImageDim;
  m.attr("TEMPORAL_DIM") = kTemporalDim;

  m.def("category_names", [] {
    std::vector<std::string> names;
    for (int c = 0; c < kNumCategories; ++c) names.emplace_back(category_name(c));
    return names;
  });
  m.def("category_index", &category_index, py::arg("name"));

  py::class_<CalendarWindow>(m, "CalendarWindow")
      .def(py::init([](const std::string& start, int num_days) {
             return CalendarWindow{parse_iso_date(start), num_days};
           }),
           py::arg("start") = "2018-10-01", py::arg("num_days") = 182)
      .def_readonly("num_days", &CalendarWindow::num_days)
      .def("day_offset", [](const CalendarWindow& w, const std::string& iso) {
        return w.day_offset(parse_iso_date(iso));
      });

  m.def(
      "day_offset_to_week_weekday",
      [](int d, const CalendarWindow& w) { return day_offset_to_week_weekday(d, w); },
      py::arg("day_offset"), py::arg("window") = CalendarWindow{});

  py::class_<VisitLog>(m, "VisitLog")
      .def_readonly("region_id", &VisitLog::region_id)
      .def("total_events", &VisitLog::total_events)
      .def("users", [](const VisitLog& log) {
        std::vector<std::string> out;
        for (const auto& [user, events] : log.visits) out.push_back(user);
        return out;
      })
      .def("events", [](const VisitLog& log, const std::string& user) {
        std::vector<std::pair<int, int>> out;
        for (const auto& e : log.visits.at(user)) out.emplace_back(e.day, e.hour);
        return out;
      });

  m.def(
      "parse_visit_text",
      [](const std::string& text, const CalendarWindow& window, const std::string& region_id) {
        std::istringstream in(text);
        return parse_visit_file(in, window, region_id);
      },
      py::arg("text"), py::arg("window") = CalendarWindow{}, py::arg("region_id") = "");
  m.def("serialize_visit_log", &serialize_visit_log, py::arg("log"),
        py::arg("window") = CalendarWindow{});

  m.def("extract_statistical", &extract_statistical, py::arg("log"));
  m.def(
      "extract_temporal_feature",
      [](const VisitLog& log, const CalendarWindow& window) {
        return extract_temporal_feature(build_temporal_tensor(log, window));
      },
      py::arg("log"), py::arg("window") = CalendarWindow{});

  py::class_<GbdtParams>(m, "GbdtParams")
      .def(py::init<>())
      .def_readwrite("n_rounds", &GbdtParams::n_rounds)
      .def_readwrite("learning_rate", &GbdtParams::learning_rate)
      .def_readwrite("max_depth", &GbdtParams::max_depth)
      .def_readwrite("min_samples_leaf", &GbdtParams::min_samples_leaf)
      .def_readwrite("min_gain", &GbdtParams::min_gain)
      .def_readwrite("subsample", &GbdtParams::subsample)
      .def_readwrite("seed", &GbdtParams::seed);

  py::class_<GbdtModel>(m, "GbdtModel")
      .def("predict_proba",
           [](const GbdtModel& model, const std::vector<double>& x) {
             return model.predict_proba(x);
           })
      .def("predict_label",
           [](const GbdtModel& model, const std::vector<double>& x) {
             return model.predict_label(x);
           })
      .def("training_loss", &GbdtModel::training_loss)
      .def("save", [](const GbdtModel& m_, const std::filesystem::path& p) { m_.save(p); })
      .def_static("load", &GbdtModel::load)
      .def_property_readonly("n_classes", &GbdtModel::n_classes)
      .def_property_readonly("n_features", &GbdtModel::n_features);

  m.def("fit_gbdt", &fit_gbdt, py::arg("X"), py::arg("y"), py::arg("n_classes"),
        py::arg("params") = GbdtParams{});

  m.def(
      "evaluate",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred, int n_classes,
         const std::string& scope) {
        const auto result =
            evaluate(y_true, y_pred, n_classes,
                     scope == "all" ? F1Scope::AllClasses : F1Scope::PresentClasses);
        std::vector<std::vector<long>> confusion(n_classes, std::vector<long>(n_classes));
        for (int r = 0; r < n_classes; ++r) {
          for (int c = 0; c < n_classes; ++c) confusion[r][c] = result.confusion.at(r, c);
        }
        return py::make_tuple(result.accuracy, result.kappa, result.macro_f1, confusion);
      },
      py::arg("y_true"), py::arg("y_pred"), py::arg("n_classes") = kNumCategories,
      py::arg("scope") = "present");

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("train_per_category", &SynthConfig::train_per_category)
      .def_readwrite("test_per_category", &SynthConfig::test_per_category)
      .def_readwrite("n_users", &SynthConfig::n_users)
      .def_readwrite("noise", &SynthConfig::noise)
      .def_readwrite("seed", &SynthConfig::seed);
  m.def("generate_dataset", &generate_dataset, py::arg("config"), py::arg("out_root"));

  m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
