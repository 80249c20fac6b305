#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pp/corpus.hpp"
#include "pp/date.hpp"
#include "pp/gates.hpp"
#include "pp/io.hpp"
#include "pp/ltr.hpp"
#include "pp/nexus.hpp"

namespace pp::service {

enum class Phase {
  Ingested,
  Categorized,
  Ranked,
  GatePostRanking,
  Matched,
  GatePostMatch,
  Reported,
  GateFinal,
  Complete,
  Failed,
};

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

/// Input files a run snapshots into `inputs/`, with their stored names.
/// The first four are required; the model is needed from Ranked on.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 11> kInputFiles = {{
    {"portfolio", "portfolio.jsonl"},
    {"gni", "gni.csv"},
    {"market", "market.json"},
    {"needs_corpus", "needs_corpus.jsonl"},
    {"model", "model.json"},
    {"aliases", "aliases.csv"},
    {"suffixes", "suffixes.txt"},
    {"patterns", "patterns.txt"},
    {"broad_terms", "broad_terms.txt"},
    {"params", "params.toml"},
    {"profiles", "profiles.toml"},
}};

inline constexpr std::size_t kRequiredInputs = 4;

struct NeedsSettings {
  double window_days = 365.0;
  double baseline_mentions = 1.0;
  double merge_jaccard = 0.6;
};

struct RunConfig {
  std::map<std::string, std::filesystem::path> inputs;
  Date evaluation_date;
  std::string profile = "Custom";
  std::optional<std::vector<std::string>> selected_categories;
  bool await_selection = false;
  corpus::IngestMode ingest_mode = corpus::IngestMode::Strict;
  gates::Bounds bounds;
  nexus::NexusConfig nexus;
  NeedsSettings needs;
  std::optional<std::string> run_id;
};

/// Relative input paths resolve against `base_dir`. Throws Error{Config}.
RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Settings only; input files are represented by their digests elsewhere.
json settings_to_json(const RunConfig& c);

class Run {
 public:
  /// Snapshots the inputs, ingests the portfolio and leaves the run at
  /// Ingested (or Failed). Re-creating an existing run id reopens it.
  static Run create(const std::filesystem::path& runs_root, const RunConfig& cfg);
  /// Throws Error{NotFound}.
  static Run open(const std::filesystem::path& runs_root, std::string_view run_id);

  const std::string& id() const { return id_; }
  const std::filesystem::path& dir() const { return dir_; }
  Phase phase() const;
  json info() const;

  /// Performs one phase transition. Returns false when the run waits on a
  /// human (open gate, pending category selection) or is terminal. Module
  /// errors move the run to Failed with the phase and error recorded.
  bool step(bool auto_approve = false);
  Phase advance(bool auto_approve = false);

  /// Only while Categorized. Throws Error{PhaseError}, Error{InvalidArgument}.
  void select_categories(const std::vector<std::string>& keys, std::optional<std::string> profile = {});

  /// Only while the run waits at that gate. Throws Error{PhaseError} and the
  /// gate errors.
  gates::GateVersion review(gates::GateId gate, const gates::Submission& s);
  /// Reopens the gate that rejected the run; the run returns to that gate.
  void reopen(gates::GateId gate);

  json categories(std::optional<std::string> profile = {}) const;
  /// Stored ranking, or a read-only what-if ranking under another profile.
  json ranking(std::optional<std::string> profile = {}) const;
  json matches() const;
  json reports() const;
  json gate(gates::GateId g) const;
  gates::GateTable gate_table() const;

  /// Writes labels.jsonl and returns its rows.
  std::vector<ltr::Label> export_labels() const;

  std::map<std::string, std::string> category_of() const;
  strata::VectorTable vectors() const;

 private:
  Run(std::filesystem::path root, std::string id);

  json read_info() const;
  void write_info(const json& info) const;
  void set_phase(Phase p) const;
  void fail_run(Phase at, const std::string& code, const std::string& message) const;
  std::filesystem::path input(std::string_view key) const;
  bool has_input(std::string_view key) const;
  std::filesystem::path artifact(std::string_view name) const { return dir_ / name; }

  void do_ingest() const;
  void do_categorize() const;
  void do_rank() const;
  void do_open_gate(gates::GateId g) const;
  void do_match() const;
  void do_report() const;
  void do_finalize() const;

  std::filesystem::path root_;
  std::string id_;
  std::filesystem::path dir_;
};

std::vector<std::string> list_runs(const std::filesystem::path& runs_root);

/// Phase at which the run waits on the given gate.
Phase gate_phase(gates::GateId g);

/// Training entry point shared by the CLI and the Python module.
ltr::RankerModel train_from_files(const std::vector<std::filesystem::path>& label_files,
                                  const strata::VectorTable& vectors, const ltr::Hyper& hyper);
strata::VectorTable read_vectors(const std::filesystem::path& path);

}  // namespace pp::service
