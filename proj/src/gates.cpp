#include "pp/gates.hpp"

#include <algorithm>
#include <set>

#include "pp/error.hpp"

namespace pp::gates {

std::string_view to_string(GateId g) {
  switch (g) {
    case GateId::PostRanking: return "PostRanking";
    case GateId::PostMatch: return "PostMatch";
    case GateId::FinalOntology: return "FinalOntology";
  }
  return "PostRanking";
}

std::string_view to_string(GateState s) {
  switch (s) {
    case GateState::Open: return "Open";
    case GateState::Approved: return "Approved";
    case GateState::Rejected: return "Rejected";
    case GateState::Amended: return "Amended";
  }
  return "Open";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Keep: return "keep";
    case Verdict::Drop: return "drop";
    case Verdict::Regrade: return "regrade";
  }
  return "keep";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Approve: return "approve";
    case Action::Amend: return "amend";
    case Action::Reject: return "reject";
  }
  return "approve";
}

GateId gate_from_string(std::string_view s) {
  for (auto g : kGateOrder) {
    if (to_string(g) == s) return g;
  }
  fail(ErrorCode::NotFound, "unknown gate '" + std::string(s) + "'");
}

namespace {

GateState state_from_string(std::string_view s) {
  for (auto st : {GateState::Open, GateState::Approved, GateState::Rejected, GateState::Amended}) {
    if (to_string(st) == s) return st;
  }
  fail(ErrorCode::InvalidArgument, "unknown gate state '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::Keep, Verdict::Drop, Verdict::Regrade}) {
    if (to_string(v) == s) return v;
  }
  fail(ErrorCode::InvalidArgument, "unknown verdict '" + std::string(s) + "'");
}

Action action_from_string(std::string_view s) {
  for (auto a : {Action::Approve, Action::Amend, Action::Reject}) {
    if (to_string(a) == s) return a;
  }
  fail(ErrorCode::InvalidArgument, "unknown action '" + std::string(s) + "'");
}

std::vector<std::string> item_ids(const json& payload) {
  std::vector<std::string> ids;
  for (const auto& it : payload.at("items")) ids.push_back(it.at("item_id").get<std::string>());
  return ids;
}

}  // namespace

json to_json(const Decision& d) {
  json j = {{"item_id", d.item_id}, {"verdict", to_string(d.verdict)}, {"note", d.note}};
  if (d.grade) j["grade"] = *d.grade;
  return j;
}

Decision decision_from_json(const json& j) {
  Decision d;
  try {
    d.item_id = j.at("item_id").get<std::string>();
    d.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    if (j.contains("grade") && !j.at("grade").is_null()) d.grade = j.at("grade").get<int>();
    if (j.contains("note")) d.note = j.at("note").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("verdict: ") + e.what());
  }
  return d;
}

bool Gate::resolved_ok() const {
  if (versions.empty()) return false;
  const auto s = current().state;
  return s == GateState::Approved || s == GateState::Amended;
}

json to_json(const Gate& g) {
  json versions = json::array();
  for (const auto& v : g.versions) {
    json decisions = json::array();
    for (const auto& d : v.decisions) decisions.push_back(to_json(d));
    versions.push_back({{"version", v.version},
                        {"state", to_string(v.state)},
                        {"payload", v.payload},
                        {"payload_sha256", v.payload_sha256},
                        {"reviewer", v.reviewer},
                        {"decisions", decisions}});
  }
  return {{"gate_id", to_string(g.id)}, {"state", to_string(g.current().state)},
          {"version", g.current().version}, {"versions", versions}};
}

Gate gate_from_json(const json& j) {
  Gate g;
  g.id = gate_from_string(j.at("gate_id").get<std::string>());
  for (const auto& v : j.at("versions")) {
    GateVersion gv;
    gv.version = v.at("version").get<int>();
    gv.state = state_from_string(v.at("state").get<std::string>());
    gv.payload = v.at("payload");
    gv.payload_sha256 = v.at("payload_sha256").get<std::string>();
    gv.reviewer = v.at("reviewer").get<std::string>();
    for (const auto& d : v.at("decisions")) gv.decisions.push_back(decision_from_json(d));
    g.versions.push_back(std::move(gv));
  }
  if (g.versions.empty()) fail(ErrorCode::InvalidArgument, "gate file without versions");
  return g;
}

Submission submission_from_json(const json& j) {
  Submission s;
  try {
    if (j.contains("gate_id")) s.gate_id = j.at("gate_id").get<std::string>();
    if (j.contains("reviewer")) s.reviewer = j.at("reviewer").get<std::string>();
    if (j.contains("verdicts")) {
      for (const auto& d : j.at("verdicts")) s.decisions.push_back(decision_from_json(d));
    }
    if (j.contains("action")) {
      s.action = action_from_string(j.at("action").get<std::string>());
    } else {
      s.action = s.decisions.empty() ? Action::Approve : Action::Amend;
    }
    if (j.contains("expected_version") && !j.at("expected_version").is_null()) {
      s.expected_version = j.at("expected_version").get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("review submission: ") + e.what());
  }
  return s;
}

json to_json(const Submission& s) {
  json verdicts = json::array();
  for (const auto& d : s.decisions) verdicts.push_back(to_json(d));
  json j = {{"gate_id", s.gate_id}, {"reviewer", s.reviewer}, {"action", to_string(s.action)}, {"verdicts", verdicts}};
  if (s.expected_version) j["expected_version"] = *s.expected_version;
  return j;
}

Gate& open_gate(GateTable& gates, GateId id, json payload) {
  for (auto prior : kGateOrder) {
    if (prior == id) break;
    const auto it = gates.find(prior);
    if (it == gates.end() || !it->second.resolved_ok()) {
      fail(ErrorCode::GateOrderViolation,
           std::string(to_string(id)) + " cannot open before " + std::string(to_string(prior)) + " is resolved");
    }
  }
  if (!payload.is_object() || !payload.contains("items") || !payload.at("items").is_array()) {
    fail(ErrorCode::InvalidArgument, "gate payload needs an items array");
  }
  const auto ids = item_ids(payload);
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    fail(ErrorCode::InvalidArgument, "gate payload has duplicate item ids");
  }
  auto& gate = gates[id];
  gate.id = id;
  if (!gate.versions.empty() && gate.current().state == GateState::Open) return gate;
  GateVersion v;
  v.version = static_cast<int>(gate.versions.size()) + 1;
  v.payload_sha256 = sha256_hex(dump_json(payload));
  v.payload = std::move(payload);
  gate.versions.push_back(std::move(v));
  return gate;
}

const GateVersion& submit_review(Gate& gate, const Submission& s, const Bounds& bounds) {
  if (gate.versions.empty()) fail(ErrorCode::NotFound, "gate has never been opened");
  auto& v = gate.versions.back();
  if (s.expected_version && *s.expected_version != v.version) {
    fail(ErrorCode::GateConflict, "expected version " + std::to_string(*s.expected_version) + ", gate is at " +
                                      std::to_string(v.version));
  }
  if (v.state != GateState::Open) {
    fail(ErrorCode::GateAlreadyResolved,
         std::string(to_string(gate.id)) + " v" + std::to_string(v.version) + " is " + std::string(to_string(v.state)));
  }
  if (!s.gate_id.empty() && s.gate_id != to_string(gate.id)) {
    fail(ErrorCode::InvalidArgument, "submission targets " + s.gate_id);
  }

  const auto ids = item_ids(v.payload);
  const std::set<std::string> known(ids.begin(), ids.end());
  std::set<std::string> seen;
  for (const auto& d : s.decisions) {
    if (!known.count(d.item_id)) fail(ErrorCode::UnknownItem, "no item '" + d.item_id + "' in the gate payload");
    if (!seen.insert(d.item_id).second) fail(ErrorCode::InvalidArgument, "two verdicts for " + d.item_id);
    if (d.verdict == Verdict::Regrade && (!d.grade || *d.grade < 0 || *d.grade > 4)) {
      fail(ErrorCode::InvalidArgument, "regrade of " + d.item_id + " needs a grade in 0..4");
    }
    if (d.verdict != Verdict::Regrade && d.grade) {
      fail(ErrorCode::InvalidArgument, "only regrade verdicts carry a grade");
    }
  }
  switch (s.action) {
    case Action::Approve:
      if (!s.decisions.empty()) fail(ErrorCode::InvalidArgument, "approve takes no verdicts; use amend");
      break;
    case Action::Amend:
      if (s.decisions.empty()) fail(ErrorCode::InvalidArgument, "amend needs at least one verdict");
      break;
    case Action::Reject:
      break;
  }

  if (gate.id == GateId::PostRanking && s.action != Action::Reject) {
    std::size_t dropped = 0;
    for (const auto& d : s.decisions) dropped += d.verdict == Verdict::Drop;
    const std::size_t kept = ids.size() - dropped;
    const std::size_t lo = std::min(bounds.min_items, ids.size());
    if (kept < lo || kept > bounds.max_items) {
      fail(ErrorCode::PayloadOutOfBounds, "approved ranking would hold " + std::to_string(kept) + " patents; allowed " +
                                              std::to_string(lo) + ".." + std::to_string(bounds.max_items));
    }
  }

  v.reviewer = s.reviewer;
  v.decisions = s.decisions;
  v.state = s.action == Action::Approve ? GateState::Approved
                                        : (s.action == Action::Amend ? GateState::Amended : GateState::Rejected);
  return v;
}

json resolved_payload(const GateVersion& v) {
  if (v.state != GateState::Approved && v.state != GateState::Amended) {
    fail(ErrorCode::PhaseError, "gate version is not approved");
  }
  std::map<std::string, const Decision*> by_item;
  for (const auto& d : v.decisions) by_item[d.item_id] = &d;
  json out = v.payload;
  json items = json::array();
  for (const auto& it : v.payload.at("items")) {
    const auto found = by_item.find(it.at("item_id").get<std::string>());
    if (found == by_item.end()) {
      items.push_back(it);
      continue;
    }
    const auto& d = *found->second;
    if (d.verdict == Verdict::Drop) continue;
    json kept = it;
    if (d.verdict == Verdict::Regrade) kept["grade"] = *d.grade;
    items.push_back(std::move(kept));
  }
  out["items"] = std::move(items);
  return out;
}

std::vector<ltr::Label> export_feedback_labels(const GateTable& gates,
                                               const std::map<std::string, std::string>& query_of) {
  const auto it = gates.find(GateId::PostRanking);
  if (it == gates.end()) return {};
  std::vector<ltr::Label> raw;
  for (const auto& v : it->second.versions) {
    if (v.state != GateState::Amended) continue;
    for (const auto& d : v.decisions) {
      if (d.verdict == Verdict::Keep) continue;
      const auto q = query_of.find(d.item_id);
      if (q == query_of.end()) fail(ErrorCode::UnknownItem, "no category for " + d.item_id);
      raw.push_back({q->second, d.item_id, d.verdict == Verdict::Drop ? 0 : *d.grade});
    }
  }
  return ltr::merge_labels({}, raw);
}

}  // namespace pp::gates
