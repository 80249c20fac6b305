#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "pp/error.hpp"
#include "pp/http.hpp"
#include "pp/service.hpp"

namespace fs = std::filesystem;
using pp::json;
using pp::service::Phase;
using pp::service::Run;

namespace {

/// Steps the run until it reaches `target` or stops on its own.
Run& advance_to(Run& run, Phase target) {
  while (run.phase() != Phase::Failed && run.phase() < target && run.step()) {
  }
  const Phase p = run.phase();
  if (p == Phase::Failed) {
    const auto f = run.info().at("failure");
    pp::fail(pp::ErrorCode::PhaseError, "run failed at " + f.at("phase").get<std::string>() + ": " +
                                            f.at("code").get<std::string>() + ": " + f.at("message").get<std::string>());
  }
  if (p < target) {
    pp::fail(pp::ErrorCode::PhaseError,
             "run waits at " + std::string(pp::service::to_string(p)) + "; resolve it with pp review");
  }
  return run;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

pp::http::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patent portfolio pruning pipeline"};
  app.require_subcommand(1);
  std::string runs_root = "runs";
  app.add_option("--runs", runs_root, "Run store directory")->capture_default_str();

  std::string run_id;
  auto add_run = [&](CLI::App* sub) { sub->add_option("--run", run_id, "Run id")->required(); };

  auto* ingest = app.add_subcommand("ingest", "Create a run from a run config and ingest its portfolio");
  std::string config_path;
  ingest->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);

  auto* run_cmd = app.add_subcommand("run", "Create a run and advance it until it waits or completes");
  bool auto_approve = false;
  run_cmd->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_flag("--auto-approve", auto_approve, "Approve every gate unchanged");

  auto* status = app.add_subcommand("status", "Show a run's phase and gates");
  add_run(status);

  auto* categorize = app.add_subcommand("categorize", "Compute feature vectors and categories");
  add_run(categorize);
  std::string profile;
  categorize->add_option("--profile", profile, "Score categories under this profile");

  auto* rank = app.add_subcommand("rank", "Select categories, rank and open the PostRanking gate");
  add_run(rank);
  std::vector<std::string> select;
  rank->add_option("--profile", profile, "Weighting profile label");
  rank->add_option("--select-categories", select, "Category keys (default: all)")->delimiter(',');

  auto* match = app.add_subcommand("match", "Match approved seeds against the need graph");
  add_run(match);

  auto* report = app.add_subcommand("report", "Generate cluster reports");
  add_run(report);
  bool text = false;
  report->add_flag("--text", text, "Print the rendered text reports");

  auto* review = app.add_subcommand("review", "Resolve a gate");
  add_run(review);
  std::string gate_name, amend_file, reviewer = "cli";
  bool approve = false, reject = false, reopen = false;
  std::optional<int> expected_version;
  review->add_option("gate", gate_name, "PostRanking, PostMatch or FinalOntology")->required();
  auto* g_approve = review->add_flag("--approve", approve, "Approve unchanged");
  auto* g_amend = review->add_option("--amend", amend_file, "JSON file with verdicts")->check(CLI::ExistingFile);
  auto* g_reject = review->add_flag("--reject", reject, "Reject and stop the run");
  auto* g_reopen = review->add_flag("--reopen", reopen, "Reopen a gate that rejected the run");
  g_approve->excludes(g_amend)->excludes(g_reject)->excludes(g_reopen);
  g_amend->excludes(g_reject)->excludes(g_reopen);
  g_reject->excludes(g_reopen);
  review->add_option("--reviewer", reviewer, "Reviewer name")->capture_default_str();
  review->add_option("--expected-version", expected_version, "Fail with a conflict unless the gate is at this version");

  auto* export_labels = app.add_subcommand("export-labels", "Write feedback labels from the PostRanking gate");
  add_run(export_labels);
  std::string out_path;
  export_labels->add_option("--out", out_path, "Also copy the labels here");

  auto* train = app.add_subcommand("train", "Train a ranking model");
  std::vector<std::string> label_files;
  std::string vectors_path;
  pp::ltr::Hyper hyper;
  train->add_option("--labels", label_files, "Label JSONL files, later files override earlier")->required();
  auto* t_run = train->add_option("--run", run_id, "Take feature vectors from this run");
  auto* t_vec = train->add_option("--vectors", vectors_path, "Feature vector JSONL")->check(CLI::ExistingFile);
  t_run->excludes(t_vec);
  train->add_option("--out", out_path, "Model output path")->required();
  train->add_option("--trees", hyper.n_trees)->capture_default_str();
  train->add_option("--learning-rate", hyper.learning_rate)->capture_default_str();
  train->add_option("--max-leaves", hyper.max_leaves)->capture_default_str();
  train->add_option("--min-samples-leaf", hyper.min_samples_leaf)->capture_default_str();
  train->add_option("--ndcg-k", hyper.ndcg_k)->capture_default_str();
  train->add_option("--seed", hyper.seed)->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  int port = 8080;
  std::string host = "127.0.0.1", base_dir = ".", static_dir;
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--base-dir", base_dir, "Resolve relative input paths against this")->capture_default_str();
  serve->add_option("--static", static_dir, "Console bundle to serve at /")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest || *run_cmd) {
      auto run = Run::create(runs_root, pp::service::load_run_config(config_path));
      if (*run_cmd) run.advance(auto_approve);
      std::cout << run.id() << " " << pp::service::to_string(run.phase()) << "\n";
      return run.phase() == Phase::Failed ? 1 : 0;
    }
    if (*status) {
      print(Run::open(runs_root, run_id).info());
    } else if (*categorize) {
      auto run = Run::open(runs_root, run_id);
      advance_to(run, Phase::Categorized);
      print(run.categories(profile.empty() ? std::nullopt : std::optional(profile)));
    } else if (*rank) {
      auto run = Run::open(runs_root, run_id);
      advance_to(run, Phase::Categorized);
      if (run.phase() == Phase::Categorized) {
        if (select.empty()) {
          const json cats = run.categories();
          for (const auto& c : cats.at("categories")) select.push_back(c.at("key").get<std::string>());
        }
        run.select_categories(select, profile.empty() ? std::nullopt : std::optional(profile));
      } else if (!select.empty() || !profile.empty()) {
        pp::fail(pp::ErrorCode::PhaseError, "run is already ranked; the selection is frozen");
      }
      advance_to(run, Phase::GatePostRanking);
      print(run.ranking());
    } else if (*match) {
      auto run = Run::open(runs_root, run_id);
      advance_to(run, Phase::GatePostMatch);
      print(run.matches());
    } else if (*report) {
      auto run = Run::open(runs_root, run_id);
      advance_to(run, Phase::GateFinal);
      const auto r = run.reports();
      if (text) {
        for (const auto& rep : r.at("reports")) std::cout << rep.at("text").get<std::string>() << "\n";
      } else {
        print(r);
      }
    } else if (*review) {
      auto run = Run::open(runs_root, run_id);
      const auto g = pp::gates::gate_from_string(gate_name);
      if (reopen) {
        run.reopen(g);
      } else {
        pp::gates::Submission s;
        if (!amend_file.empty()) s = pp::gates::submission_from_json(pp::read_json_file(amend_file));
        s.gate_id = gate_name;
        s.reviewer = reviewer;
        if (approve) s.action = pp::gates::Action::Approve;
        if (reject) s.action = pp::gates::Action::Reject;
        if (!amend_file.empty()) s.action = pp::gates::Action::Amend;
        if (!approve && !reject && amend_file.empty()) {
          pp::fail(pp::ErrorCode::InvalidArgument, "pass one of --approve, --amend, --reject, --reopen");
        }
        if (expected_version) s.expected_version = expected_version;
        run.review(g, s);
        run.advance();
      }
      const auto info = run.info();
      std::cout << run.id() << " " << info.at("phase").get<std::string>() << "\n";
      return run.phase() == Phase::Failed ? 1 : 0;
    } else if (*export_labels) {
      const auto run = Run::open(runs_root, run_id);
      const auto labels = run.export_labels();
      if (!out_path.empty()) fs::copy_file(run.dir() / "labels.jsonl", out_path, fs::copy_options::overwrite_existing);
      std::cout << labels.size() << " labels -> " << (out_path.empty() ? (run.dir() / "labels.jsonl").string() : out_path)
                << "\n";
    } else if (*train) {
      if (!*t_run && vectors_path.empty()) pp::fail(pp::ErrorCode::InvalidArgument, "pass --run or --vectors");
      const auto vectors = *t_run ? Run::open(runs_root, run_id).vectors() : pp::service::read_vectors(vectors_path);
      std::vector<fs::path> files(label_files.begin(), label_files.end());
      const auto model = pp::service::train_from_files(files, vectors, hyper);
      pp::ltr::save_model(model, out_path);
      std::cout << "trained " << model.trees.size() << " trees, ndcg@" << hyper.ndcg_k << " "
                << model.initial_ndcg << " -> " << (model.ndcg_trace.empty() ? model.initial_ndcg : model.ndcg_trace.back())
                << "\n";
    } else if (*serve) {
      pp::http::ServerOptions opts;
      opts.runs_root = runs_root;
      opts.base_dir = base_dir;
      if (!static_dir.empty()) opts.static_dir = static_dir;
      pp::http::Server server(opts);
      const int bound = server.bind(host, port);
      if (bound < 0) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_server = &server;
      std::signal(SIGINT, [](int) { g_server->stop(); });
      std::signal(SIGTERM, [](int) { g_server->stop(); });
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.serve();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
