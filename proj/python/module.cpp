#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pp/error.hpp"
#include "pp/ltr.hpp"
#include "pp/params.hpp"
#include "pp/service.hpp"

namespace py = pybind11;
using namespace pp;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string as_text(const json& j) { return j.dump(); }

service::Run open_run(const std::filesystem::path& root, const std::string& id) { return service::Run::open(root, id); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  static py::exception<pp::Error> pp_error(m, "PpError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pp::Error& e) {
      py::set_error(pp_error, e.what());
    }
  });

  m.def("remaining_life_years", [](const std::string& expiry, const std::string& eval) {
    corpus::PatentRecord p;
    p.expiry_date = Date::parse(expiry);
    return params::remaining_life(p, Date::parse(eval));
  });
  m.def("cagr", &params::cagr);
  m.def("rejection_score", [](int a, int b, int c) { return params::rejection_score(a, b, c); });
  m.def("inventor_score", [](double h, double c, double l) { return params::inventor_score(h, c, l); });
  m.def("supply_chain_score", [](double a, double b, double c) { return params::supply_chain_score(a, b, c); });
  m.def("demand_snr", [](double s, double n) { return params::demand_snr(s, n); });
  m.def("ma_score", [](double v, double n) { return params::ma_score(v, n); });
  m.def("partnership_score",
        [](const std::map<std::string, double>& counts) { return params::partnership_score(counts); });

  m.def("dcg", &ltr::dcg, py::arg("relevances"), py::arg("k"));
  m.def("ndcg", &ltr::ndcg, py::arg("relevances"), py::arg("k"));

  m.def(
      "train",
      [](const std::vector<std::string>& label_files, const std::string& vectors, const std::string& out,
         std::size_t n_trees, double learning_rate, std::uint64_t seed) {
        ltr::Hyper h;
        h.n_trees = n_trees;
        h.learning_rate = learning_rate;
        h.seed = seed;
        std::vector<std::filesystem::path> files(label_files.begin(), label_files.end());
        const auto model = service::train_from_files(files, service::read_vectors(vectors), h);
        ltr::save_model(model, out);
        return model.ndcg_trace.empty() ? model.initial_ndcg : model.ndcg_trace.back();
      },
      py::arg("label_files"), py::arg("vectors"), py::arg("out"), py::arg("n_trees") = 50,
      py::arg("learning_rate") = 0.1, py::arg("seed") = 7);

  py::class_<service::Run>(m, "_Run")
      .def_property_readonly("id", &service::Run::id)
      .def_property_readonly("dir", [](const service::Run& r) { return r.dir().string(); })
      .def_property_readonly("phase", [](const service::Run& r) { return std::string(to_string(r.phase())); })
      .def("info", [](const service::Run& r) { return as_text(r.info()); })
      .def("advance", [](service::Run& r, bool auto_approve) { return std::string(to_string(r.advance(auto_approve))); },
           py::arg("auto_approve") = false)
      .def("select_categories",
           [](service::Run& r, const std::vector<std::string>& keys) { r.select_categories(keys); })
      .def("categories", [](const service::Run& r, std::optional<std::string> p) { return as_text(r.categories(p)); },
           py::arg("profile") = py::none())
      .def("ranking", [](const service::Run& r, std::optional<std::string> p) { return as_text(r.ranking(p)); },
           py::arg("profile") = py::none())
      .def("matches", [](const service::Run& r) { return as_text(r.matches()); })
      .def("reports", [](const service::Run& r) { return as_text(r.reports()); })
      .def("gate", [](const service::Run& r, const std::string& g) { return as_text(r.gate(gates::gate_from_string(g))); })
      .def("review",
           [](service::Run& r, const std::string& g, const std::string& submission) {
             r.review(gates::gate_from_string(g), gates::submission_from_json(json::parse(submission)));
           })
      .def("reopen", [](service::Run& r, const std::string& g) { r.reopen(gates::gate_from_string(g)); })
      .def("export_labels", [](const service::Run& r) {
        json rows = json::array();
        for (const auto& l : r.export_labels()) rows.push_back(ltr::to_json(l));
        return as_text(rows);
      });

  m.def(
      "create_run",
      [](const std::filesystem::path& runs_root, const std::string& config_json, const std::filesystem::path& base_dir) {
        return service::Run::create(runs_root, service::run_config_from_json(json::parse(config_json), base_dir));
      },
      py::arg("runs_root"), py::arg("config_json"), py::arg("base_dir"));
  m.def("open_run", &open_run, py::arg("runs_root"), py::arg("run_id"));
  m.def("list_runs", [](const std::filesystem::path& root) { return service::list_runs(root); });
}
