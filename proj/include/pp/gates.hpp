#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pp/io.hpp"
#include "pp/ltr.hpp"

namespace pp::gates {

enum class GateId { PostRanking, PostMatch, FinalOntology };
enum class GateState { Open, Approved, Rejected, Amended };
enum class Verdict { Keep, Drop, Regrade };
enum class Action { Approve, Amend, Reject };

inline constexpr std::array<GateId, 3> kGateOrder = {GateId::PostRanking, GateId::PostMatch, GateId::FinalOntology};

std::string_view to_string(GateId g);
std::string_view to_string(GateState s);
std::string_view to_string(Verdict v);
std::string_view to_string(Action a);
/// Throws Error{NotFound}.
GateId gate_from_string(std::string_view s);

struct Decision {
  std::string item_id;
  Verdict verdict = Verdict::Keep;
  std::optional<int> grade;  // Regrade only, 0..4
  std::string note;
};

json to_json(const Decision& d);
Decision decision_from_json(const json& j);

/// Payloads are JSON objects with an `items` array; every item carries a
/// unique string `item_id`.
struct GateVersion {
  int version = 1;
  GateState state = GateState::Open;
  json payload;
  std::string payload_sha256;
  std::string reviewer;
  std::vector<Decision> decisions;
};

struct Gate {
  GateId id = GateId::PostRanking;
  std::vector<GateVersion> versions;  // append-only

  const GateVersion& current() const { return versions.back(); }
  bool resolved_ok() const;
};

json to_json(const Gate& g);
Gate gate_from_json(const json& j);

struct Bounds {
  std::size_t top_n = 30;
  std::size_t min_items = 20;
  std::size_t max_items = 50;
};

struct Submission {
  std::string gate_id;
  std::string reviewer;
  Action action = Action::Approve;
  std::vector<Decision> decisions;
  std::optional<int> expected_version;
};

/// `action` defaults to amend when verdicts are present, approve otherwise.
Submission submission_from_json(const json& j);
json to_json(const Submission& s);

using GateTable = std::map<GateId, Gate>;

/// Throws Error{GateOrderViolation} unless every earlier gate's latest
/// version is Approved or Amended. Opening a gate whose latest version is
/// resolved appends a new version; an already open gate is left as is.
Gate& open_gate(GateTable& gates, GateId id, json payload);

/// Throws Error{GateAlreadyResolved}, Error{GateConflict} (stale expected
/// version), Error{UnknownItem}, Error{PayloadOutOfBounds},
/// Error{InvalidArgument}.
const GateVersion& submit_review(Gate& gate, const Submission& s, const Bounds& bounds = {});

/// Payload with Drop decisions removed and Regrade grades written onto the
/// items. Approved and Amended versions only.
json resolved_payload(const GateVersion& v);

/// Every Regrade and Drop (grade 0) on the PostRanking gate across all
/// versions, later decisions overriding earlier ones. `query_of` maps a
/// patent id to its category key.
std::vector<ltr::Label> export_feedback_labels(const GateTable& gates,
                                               const std::map<std::string, std::string>& query_of);

}  // namespace pp::gates
