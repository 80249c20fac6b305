#include <doctest.h>

#include <random>

#include "pp/error.hpp"
#include "pp/gates.hpp"
#include "support/check.hpp"

using namespace pp;
using namespace pp::gates;
using testsupport::code_of;

namespace {

json payload_of(int n, const std::string& prefix = "P") {
  json items = json::array();
  for (int i = 0; i < n; ++i) {
    items.push_back({{"item_id", prefix + std::to_string(i)}, {"rank", i + 1}, {"score", 1.0 / (i + 1)}});
  }
  return {{"items", items}};
}

Submission approve() { return {"", "alice", Action::Approve, {}, {}}; }

const Bounds kSmall{5, 1, 10};

GateTable resolved_through(GateId last) {
  GateTable t;
  for (auto g : kGateOrder) {
    open_gate(t, g, payload_of(3));
    submit_review(t[g], approve(), kSmall);
    if (g == last) break;
  }
  return t;
}

}  // namespace

TEST_CASE("gates open in order") {
  GateTable t;
  CHECK(code_of([&] { open_gate(t, GateId::PostMatch, payload_of(2)); }) == ErrorCode::GateOrderViolation);
  open_gate(t, GateId::PostRanking, payload_of(2));
  CHECK(code_of([&] { open_gate(t, GateId::FinalOntology, payload_of(2)); }) == ErrorCode::GateOrderViolation);
  submit_review(t[GateId::PostRanking], approve(), kSmall);
  open_gate(t, GateId::PostMatch, payload_of(2));
  CHECK(t.at(GateId::PostMatch).current().state == GateState::Open);
}

TEST_CASE("a rejected gate blocks later gates") {
  GateTable t;
  open_gate(t, GateId::PostRanking, payload_of(2));
  submit_review(t[GateId::PostRanking], {"", "bob", Action::Reject, {}, {}}, kSmall);
  CHECK(t.at(GateId::PostRanking).current().state == GateState::Rejected);
  CHECK(code_of([&] { open_gate(t, GateId::PostMatch, payload_of(2)); }) == ErrorCode::GateOrderViolation);
  open_gate(t, GateId::PostRanking, payload_of(2));
  CHECK(t.at(GateId::PostRanking).versions.size() == 2);
  CHECK(t.at(GateId::PostRanking).current().state == GateState::Open);
}

TEST_CASE("reopening an open gate is idempotent") {
  GateTable t;
  open_gate(t, GateId::PostRanking, payload_of(2));
  open_gate(t, GateId::PostRanking, payload_of(4));
  CHECK(t.at(GateId::PostRanking).versions.size() == 1);
  CHECK(t.at(GateId::PostRanking).current().payload == payload_of(2));
}

TEST_CASE("review errors") {
  GateTable t;
  auto& g = open_gate(t, GateId::PostRanking, payload_of(3));
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Amend, {{"nope", Verdict::Drop, {}, ""}}, {}}, kSmall); }) ==
        ErrorCode::UnknownItem);
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Amend, {}, {}}, kSmall); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Approve, {{"P0", Verdict::Drop, {}, ""}}, {}}, kSmall); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Amend, {{"P0", Verdict::Regrade, 7, ""}}, {}}, kSmall); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Amend, {{"P0", Verdict::Drop, 2, ""}}, {}}, kSmall); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          submit_review(g, {"", "a", Action::Amend, {{"P0", Verdict::Drop, {}, ""}, {"P0", Verdict::Keep, {}, ""}}, {}},
                        kSmall);
        }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { submit_review(g, {"PostMatch", "a", Action::Approve, {}, {}}, kSmall); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Approve, {}, 2}, kSmall); }) == ErrorCode::GateConflict);
  const Bounds tight{3, 3, 3};
  CHECK(code_of([&] { submit_review(g, {"", "a", Action::Amend, {{"P0", Verdict::Drop, {}, ""}}, {}}, tight); }) ==
        ErrorCode::PayloadOutOfBounds);
  CHECK(g.current().state == GateState::Open);
  submit_review(g, {"", "a", Action::Approve, {}, 1}, kSmall);
  CHECK(code_of([&] { submit_review(g, approve(), kSmall); }) == ErrorCode::GateAlreadyResolved);
}

TEST_CASE("lower bound is clamped to the payload size") {
  GateTable t;
  auto& g = open_gate(t, GateId::PostRanking, payload_of(3));
  submit_review(g, approve(), Bounds{30, 20, 50});
  CHECK(g.current().state == GateState::Approved);
}

TEST_CASE("resolved payload applies drops and regrades") {
  GateTable t;
  auto& g = open_gate(t, GateId::PostRanking, payload_of(4));
  submit_review(g,
                {"", "a", Action::Amend,
                 {{"P1", Verdict::Drop, {}, ""}, {"P2", Verdict::Regrade, 3, "x"}, {"P3", Verdict::Keep, {}, ""}}, {}},
                kSmall);
  const auto out = resolved_payload(g.current());
  REQUIRE(out.at("items").size() == 3);
  CHECK(out["items"][0]["item_id"] == "P0");
  CHECK(out["items"][1]["grade"] == 3);
  CHECK_FALSE(out["items"][2].contains("grade"));
  CHECK(g.current().state == GateState::Amended);
}

TEST_CASE("replaying the decision log reproduces downstream inputs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    GateTable t;
    const int n = 3 + static_cast<int>(rng() % 20);
    auto& g = open_gate(t, GateId::PostRanking, payload_of(n));
    Submission s{"PostRanking", "r", Action::Amend, {}, {}};
    for (int i = 0; i < n; ++i) {
      const auto roll = rng() % 4;
      if (roll == 0) s.decisions.push_back({"P" + std::to_string(i), Verdict::Drop, {}, ""});
      if (roll == 1) s.decisions.push_back({"P" + std::to_string(i), Verdict::Regrade, static_cast<int>(rng() % 5), ""});
    }
    if (s.decisions.empty()) s.action = Action::Approve;
    submit_review(g, s, Bounds{30, 0, 100});
    const auto live = dump_json(resolved_payload(g.current()));

    const auto stored = gate_from_json(json::parse(dump_json(to_json(g))));
    CHECK(sha256_hex(dump_json(stored.current().payload)) == stored.current().payload_sha256);
    CHECK(dump_json(resolved_payload(stored.current())) == live);
  }
}

TEST_CASE("gate json round trip") {
  auto t = resolved_through(GateId::PostMatch);
  for (const auto& [id, g] : t) CHECK(to_json(gate_from_json(to_json(g))) == to_json(g));
  CHECK(code_of([] { gate_from_json({{"gate_id", "Nope"}, {"versions", json::array()}}); }) == ErrorCode::NotFound);
  CHECK(code_of([] { gate_from_json({{"gate_id", "PostMatch"}, {"versions", json::array()}}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("submission json") {
  const auto s = submission_from_json(json::parse(R"({"reviewer":"x","verdicts":[{"item_id":"P1","verdict":"drop"}]})"));
  CHECK(s.action == Action::Amend);
  CHECK(submission_from_json(json::object()).action == Action::Approve);
  CHECK(code_of([] { submission_from_json(json::parse(R"({"action":"maybe"})")); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { submission_from_json(json::parse(R"({"verdicts":[{"item_id":"P1","verdict":"burn"}]})")); }) ==
        ErrorCode::InvalidArgument);
  CHECK(submission_from_json(to_json(s)).decisions.size() == 1);
}

TEST_CASE("feedback labels come from amended post-ranking versions") {
  GateTable t;
  auto& g = open_gate(t, GateId::PostRanking, payload_of(4));
  submit_review(g, {"", "a", Action::Amend, {{"P0", Verdict::Regrade, 1, ""}, {"P1", Verdict::Drop, {}, ""}}, {}},
                kSmall);
  open_gate(t, GateId::PostRanking, payload_of(4));
  submit_review(t[GateId::PostRanking], {"", "a", Action::Amend, {{"P0", Verdict::Regrade, 4, ""}}, {}}, kSmall);
  const std::map<std::string, std::string> q{{"P0", "G11C"}, {"P1", "H01L"}};
  const auto labels = export_feedback_labels(t, q);
  REQUIRE(labels.size() == 2);
  CHECK(labels[0].patent_id == "P0");
  CHECK(labels[0].grade == 4);
  CHECK(labels[1].grade == 0);
  CHECK(code_of([&] { export_feedback_labels(t, {}); }) == ErrorCode::UnknownItem);
  CHECK(export_feedback_labels(GateTable{}, q).empty());
}
