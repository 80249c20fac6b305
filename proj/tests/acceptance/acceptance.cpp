#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "oracles/oracles.hpp"
#include "pp/error.hpp"
#include "pp/gates.hpp"
#include "pp/ltr.hpp"
#include "pp/service.hpp"
#include "pp/strata.hpp"
#include "support/fixture.hpp"
#include "support/formula_suite.hpp"
#include "support/synthetic.hpp"

using namespace pp;
using service::Phase;
using service::Run;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = none
  std::function<Outcome()> body;
};

// 1 ---------------------------------------------------------------------------

Outcome formula_oracles() {
  const auto t = testsupport::formula_suite(20250630, 25, 1e-9);
  return {t.ok() && t.cases >= 12 * 25, t.summary()};
}

// 2 ---------------------------------------------------------------------------

Outcome ndcg_enumeration() {
  std::size_t lists = 0, comparisons = 0, bad = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<int> rel(n);
      for (std::size_t i = 0, c = code; i < n; ++i, c /= 4) rel[i] = static_cast<int>(c % 4);
      ++lists;
      // Ideal DCG for every cutoff by trying every ordering.
      std::vector<double> ideal(n + 1, 0.0);
      std::vector<int> perm = rel;
      std::sort(perm.begin(), perm.end());
      do {
        for (std::size_t k = 1; k <= n; ++k) ideal[k] = std::max(ideal[k], oracle::dcg(perm, k));
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (std::size_t k = 1; k <= n + 1; ++k) {
        const double id = ideal[std::min(k, n)];
        const double want = id == 0.0 ? 1.0 : oracle::dcg(rel, k) / id;
        const double got = ltr::ndcg(rel, k);
        ++comparisons;
        worst = std::max(worst, std::abs(got - want));
        if (!oracle::close(got, want, 1e-12)) ++bad;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu lists, %zu cutoffs compared, max |diff| %.1e, %zu mismatches", lists,
                comparisons, worst, bad);
  return {bad == 0, buf};
}

// 3 ---------------------------------------------------------------------------

Outcome lambda_checks() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> score(0.0, 2.0);
  std::uniform_int_distribution<int> grade(0, 4);
  std::size_t nonzero_sums = 0;
  for (int g = 0; g < 1000; ++g) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 40);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = score(rng);
      l[i] = grade(rng);
    }
    const auto grads = ltr::lambda_gradients(s, l, 10, 1.0);
    const double sum = std::accumulate(grads.grad.begin(), grads.grad.end(), 0.0);
    if (sum != 0.0) ++nonzero_sums;
  }

  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> sig(0.5, 2.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const double si = u(rng), sj = u(rng), sigma = sig(rng);
    int hi = 1 + grade(rng) % 4, lo = grade(rng) % hi;
    const double delta = std::abs(oracle::ndcg({hi, lo}, 2) - oracle::ndcg({lo, hi}, 2));
    const auto g = ltr::lambda_gradients({si, sj}, {hi, lo}, 2, sigma);
    const double h = 1e-5;
    const double fd = (ltr::pair_surrogate(si + h, sj, delta, sigma) - ltr::pair_surrogate(si - h, sj, delta, sigma)) /
                      (2 * h);
    worst = std::max(worst, std::abs(g.grad[0] - fd));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "1000 groups, %zu non-zero sums; 2-item max |lambda - fd| %.1e (tol 1e-6)",
                nonzero_sums, worst);
  return {nonzero_sums == 0 && worst <= 1e-6, buf};
}

// 4 ---------------------------------------------------------------------------

Outcome lambdamart_convergence() {
  const auto ts = testsupport::synthetic_set(40, 25, 20250630);
  const ltr::Hyper hp;
  const auto a = ltr::train(ts, hp);
  const auto b = ltr::train(ts, hp);
  std::vector<std::vector<double>> scores;
  for (const auto& q : ts.queries) {
    std::vector<double> s;
    for (const auto& it : q.items) s.push_back(a.score(it.x));
    scores.push_back(std::move(s));
  }
  const double got = ltr::mean_ndcg(ts, scores, 10);
  const double baseline = testsupport::random_order_ndcg(ts, 10, 200, 1);
  const bool same = ltr::serialize_model(a) == ltr::serialize_model(b);
  char buf[200];
  std::snprintf(buf, sizeof buf, "NDCG@10 %.4f, random-order baseline %.4f (need >= 0.95 and >= %.4f); model bytes %s",
                got, baseline, baseline + 0.3, same ? "identical" : "differ");
  return {got >= 0.95 && got >= baseline + 0.3 && same, buf};
}

// 5 ---------------------------------------------------------------------------

Outcome profile_invariance() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_real_distribution<double> m(1e-3, 1e3);
  int changed = 0;
  auto ranking = [](const strata::VectorTable& t, params::Feature f) {
    std::vector<std::string> ids;
    for (const auto& [id, v] : t) ids.push_back(id);
    std::stable_sort(ids.begin(), ids.end(),
                     [&](const std::string& a, const std::string& b) { return t.at(a)[f] > t.at(b)[f]; });
    return ids;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    strata::VectorTable t;
    const int n = 2 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      params::FeatureVector v;
      for (auto& x : v.values) x = rng() % 4 == 0 ? std::floor(u(rng) / 20) : u(rng);
      t["P" + std::to_string(i)] = v;
    }
    const auto f = static_cast<params::Feature>(rng() % params::kFeatureCount);
    strata::WeightingProfile p;
    p.multipliers[params::index(f)] = m(rng);
    strata::VectorTable scaled;
    for (const auto& [id, v] : t) scaled[id] = strata::apply_profile(v, p);
    if (ranking(scaled, f) != ranking(t, f)) ++changed;
  }
  return {changed == 0, "1000 trials, " + std::to_string(changed) + " rankings changed"};
}

// 6 ---------------------------------------------------------------------------

std::vector<std::string> planted() {
  auto v = read_json_file(testsupport::fixture_dir() / "planted.json").at("planted_patents").get<std::vector<std::string>>();
  std::sort(v.begin(), v.end());
  return v;
}

// Every leaf of the report holds a value. An empty list is a value (no risks
// found, for instance); an empty object or string is not.
void empty_leaves(const json& j, const std::string& path, std::vector<std::string>& out) {
  if (j.is_null() || (j.is_string() && j.get<std::string>().empty()) || (j.is_object() && j.empty())) {
    out.push_back(path);
    return;
  }
  if (j.is_string() && j.get<std::string>() == nexus::kInsufficientData) out.push_back(path);
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) empty_leaves(v, path + "." + k, out);
  }
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) empty_leaves(j[i], path + "[" + std::to_string(i) + "]", out);
  }
}

Outcome fixture_replay() {
  TempDir tmp("acc6");
  auto run = Run::create(tmp.path, testsupport::fixture_config());
  const auto phase = run.advance(true);
  if (phase != Phase::Complete) return {false, "run ended at " + std::string(service::to_string(phase))};
  auto pruned = read_json_file(run.dir() / "pruned.json").at("patents").get<std::vector<std::string>>();
  std::sort(pruned.begin(), pruned.end());
  const bool exact = pruned == planted();

  const auto reports = run.reports().at("reports");
  int top_fit = -1;
  std::vector<std::string> gaps;
  static const std::array<const char*, 6> kSections = {"seed_asset",   "target_match", "scoring",
                                                        "opportunity_size", "risk_profile", "strategic_actions"};
  for (const auto& r : reports) {
    top_fit = std::max(top_fit, r.at("report").at("scoring").at("fit_score").get<int>());
    for (const char* s : kSections) {
      if (!r.at("report").contains(s)) gaps.push_back(r.at("cluster_id").get<std::string>() + "." + s);
    }
  }
  const auto& lead = reports.at(0).at("report");
  for (const char* s : kSections) {
    empty_leaves(lead.at(s), s, gaps);
    if (lead.at(s).empty()) gaps.push_back(s);
  }
  std::string detail = "pruned " + std::to_string(pruned.size()) + " of " + std::to_string(planted().size()) +
                       " planted (" + (exact ? "exact" : "mismatch") + "), top fit " + std::to_string(top_fit) + ", " +
                       std::to_string(reports.size()) + " reports, " + std::to_string(gaps.size()) + " unfilled fields";
  if (!gaps.empty()) detail += " e.g. " + gaps.front();
  return {exact && top_fit >= 95 && gaps.empty(), detail};
}

// 7 ---------------------------------------------------------------------------

Outcome gate_audit() {
  TempDir tmp("acc7");
  auto run = Run::create(tmp.path, testsupport::fixture_config());
  run.advance();
  const auto first = run.gate(gates::GateId::PostRanking)["versions"][0]["payload"]["items"];
  run.review(gates::GateId::PostRanking,
             {"", "audit", gates::Action::Amend,
              {{first[3]["item_id"].get<std::string>(), gates::Verdict::Drop, {}, ""},
               {first[5]["item_id"].get<std::string>(), gates::Verdict::Regrade, 1, ""}},
              {}});
  run.advance();
  const auto matches = run.gate(gates::GateId::PostMatch)["versions"][0]["payload"]["items"];
  if (matches.size() < 2) return {false, "too few matches to amend"};
  run.review(gates::GateId::PostMatch,
             {"", "audit", gates::Action::Amend,
              {{matches[matches.size() - 1]["item_id"].get<std::string>(), gates::Verdict::Drop, {}, ""}},
              {}});
  run.advance();
  run.review(gates::GateId::FinalOntology, {"", "audit", gates::Action::Approve, {}, {}});
  if (run.advance() != Phase::Complete) return {false, "run did not complete"};

  const std::map<gates::GateId, std::string> downstream = {{gates::GateId::PostRanking, "approved_ranking.json"},
                                                           {gates::GateId::PostMatch, "approved_matches.json"},
                                                           {gates::GateId::FinalOntology, "approved_clusters.json"}};
  const auto cfg = testsupport::fixture_config();
  int identical = 0;
  std::string why;
  for (const auto& [gid, file] : downstream) {
    const auto log = gates::gate_from_json(read_json_file(run.dir() / "gates" / (std::string(gates::to_string(gid)) + ".json")));
    const auto& v = log.current();
    if (sha256_hex(dump_json(v.payload)) != v.payload_sha256) {
      why += std::string(gates::to_string(gid)) + " payload digest; ";
      continue;
    }
    gates::GateTable fresh;
    for (auto prior : gates::kGateOrder) {
      if (prior == gid) break;
      fresh[prior] = gates::gate_from_json(read_json_file(run.dir() / "gates" / (std::string(gates::to_string(prior)) + ".json")));
    }
    auto& g = gates::open_gate(fresh, gid, v.payload);
    gates::Submission s{std::string(gates::to_string(gid)), v.reviewer,
                        v.state == gates::GateState::Approved ? gates::Action::Approve : gates::Action::Amend,
                        v.decisions, {}};
    gates::submit_review(g, s, cfg.bounds);
    if (dump_json(gates::resolved_payload(g.current())) == read_text_file(run.dir() / file)) {
      ++identical;
    } else {
      why += file + " differs; ";
    }
  }

  // Downstream steps consumed exactly the approved sets.
  std::set<std::string> approved_ids;
  const json approved = read_json_file(run.dir() / "approved_ranking.json");
  for (const auto& it : approved.at("items")) {
    approved_ids.insert(it.at("item_id").get<std::string>());
  }
  std::set<std::string> seeded;
  for (const auto& row : read_jsonl_file(run.dir() / "seeds.jsonl")) seeded.insert(row.at("patent_id").get<std::string>());
  std::set<std::string> errored;
  const json seed_errors = read_json_file(run.dir() / "seed_errors.json");
  for (const auto& e : seed_errors.at("errors")) {
    errored.insert(e.at("patent_id").get<std::string>());
  }
  std::set<std::string> consumed = seeded;
  consumed.insert(errored.begin(), errored.end());
  const bool seeds_match = consumed == approved_ids;
  if (!seeds_match) why += "seeds differ from approved ranking; ";

  return {identical == 3 && seeds_match,
          std::to_string(identical) + "/3 gate logs replay byte-identically" +
              (seeds_match ? ", matching consumed exactly the approved ranking" : "") + (why.empty() ? "" : "; " + why)};
}

// 8 ---------------------------------------------------------------------------

std::string planted_lead() {
  return read_json_file(testsupport::fixture_dir() / "planted.json").at("planted_patents").at(0).get<std::string>();
}

std::optional<int> rank_of(const Run& run, const std::string& id) {
  const json ranking = run.ranking();
  for (const auto& it : ranking.at("items")) {
    if (it.at("patent_id") == id) return it.at("rank").get<int>();
  }
  return std::nullopt;
}

Outcome feedback_loop() {
  TempDir tmp("acc8");
  const std::string target = planted_lead();
  auto before = Run::create(tmp.path / "runs", testsupport::fixture_config());
  before.advance();
  const auto r0 = rank_of(before, target);
  if (!r0) return {false, target + " not ranked"};
  before.review(gates::GateId::PostRanking,
                {"", "feedback", gates::Action::Amend, {{target, gates::Verdict::Regrade, 0, ""}}, {}});
  const auto exported = before.export_labels();

  const auto base_model = ltr::load_model(testsupport::fixture_dir() / "model.json");
  const auto model = service::train_from_files(
      {testsupport::fixture_dir() / "labels.jsonl", before.dir() / "labels.jsonl"}, before.vectors(), base_model.hyper);
  const auto model_path = tmp.path / "retrained.json";
  ltr::save_model(model, model_path);

  auto cfg = testsupport::fixture_config();
  cfg.inputs["model"] = model_path;
  auto after = Run::create(tmp.path / "runs", cfg);
  after.advance();
  const auto r1 = rank_of(after, target);
  if (!r1) return {false, target + " missing after retraining"};
  return {exported.size() == 1 && *r1 > *r0, target + " rank " + std::to_string(*r0) + " -> " + std::to_string(*r1) +
                                                   " after " + std::to_string(exported.size()) + " exported label(s)"};
}

// 9 ---------------------------------------------------------------------------

Outcome determinism() {
  TempDir a("acc9a"), b("acc9b");
  auto ra = Run::create(a.path, testsupport::fixture_config());
  auto rb = Run::create(b.path, testsupport::fixture_config());
  ra.advance(true);
  rb.advance(true);
  const auto sa = testsupport::snapshot(ra.dir());
  const auto sb = testsupport::snapshot(rb.dir());
  std::size_t differing = 0;
  for (const auto& [k, v] : sa) differing += !sb.count(k) || sb.at(k) != v;
  differing += sb.size() > sa.size() ? sb.size() - sa.size() : 0;

  const auto shipped = read_text_file(testsupport::fixture_dir() / "model.json");
  const auto hyper = ltr::parse_model(shipped).hyper;
  const auto retrained = service::train_from_files({testsupport::fixture_dir() / "labels.jsonl"}, ra.vectors(), hyper);
  const bool model_same = ltr::serialize_model(retrained) == shipped;

  return {differing == 0 && sa == sb && model_same,
          std::to_string(sa.size()) + " files, " + std::to_string(differing) + " differ; fixture model retrain " +
              (model_same ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "formula oracles", 5, formula_oracles},
      {2, "ndcg enumeration", 10, ndcg_enumeration},
      {3, "lambda gradients", 0, lambda_checks},
      {4, "lambdamart convergence", 60, lambdamart_convergence},
      {5, "profile invariance", 0, profile_invariance},
      {6, "fixture funnel replay", 30, fixture_replay},
      {7, "gate audit replay", 0, gate_audit},
      {8, "feedback loop", 0, feedback_loop},
      {9, "run determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0 || secs <= c.budget_s;
    const bool pass = o.ok && in_time;
    failed += !pass;
    char timing[64];
    if (c.budget_s > 0) {
      std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.budget_s);
    } else {
      std::snprintf(timing, sizeof timing, "%.2fs", secs);
    }
    std::printf("%s [%d] %s: %s (%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
