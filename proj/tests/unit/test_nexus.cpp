#include <doctest.h>

#include <cmath>
#include <random>

#include "pp/error.hpp"
#include "pp/nexus.hpp"
#include "support/check.hpp"

using namespace pp;
using namespace pp::nexus;
using testsupport::code_of;

namespace {

needgraph::NeedNode node(std::string id, std::string entity, std::vector<std::string> terms, double authority,
                         double db) {
  needgraph::NeedNode n;
  n.need_id = std::move(id);
  n.entity = std::move(entity);
  n.description = "need of " + n.entity;
  n.key_terms = std::move(terms);
  n.authority = authority;
  n.demand_db = db;
  needgraph::Triple t;
  t.subject = n.entity;
  t.object = n.description;
  t.source_doc = "DOC-" + n.need_id;
  t.source_type = needgraph::SourceType::RegulatoryFiling;
  t.observed_date = Date(2024, 1, 1);
  t.quote = n.entity + " needs things.";
  n.supporting_triples = {t};
  n.first_seen = n.last_seen = t.observed_date;
  return n;
}

claims::SeedProfile seed(std::string id, std::vector<std::string> terms) {
  claims::SeedProfile s;
  s.patent_id = std::move(id);
  s.key_terms = std::move(terms);
  s.breadth_score = 0.3;
  s.design_around_score = 0.8;
  return s;
}

// Independent TF-IDF cosine with idf = ln((1 + N) / (1 + df)) + 1 over sets.
double cosine_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b,
                     const std::vector<std::vector<std::string>>& docs) {
  auto idf = [&](const std::string& t) {
    double df = 0;
    for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end();
    return std::log((1.0 + docs.size()) / (1.0 + df)) + 1.0;
  };
  auto weights = [&](const std::vector<std::string>& x) {
    std::map<std::string, double> w;
    for (const auto& t : x) w[t] += 1.0;
    for (auto& [t, v] : w) v *= idf(t);
    return w;
  };
  const auto wa = weights(a), wb = weights(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : wa) {
    na += v * v;
    if (wb.count(t)) dot += v * wb.at(t);
  }
  for (const auto& [t, v] : wb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("need-seed score") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double d = u(rng), r = u(rng), a = u(rng), alpha = u(rng);
    CHECK(need_seed_score(d, r, a, alpha, 1.0 - alpha) == doctest::Approx(d * (alpha * r + (1 - alpha) * a)));
  }
  CHECK(code_of([] { need_seed_score(0.5, 0.5, 0.5, 0.6, 0.6); }) == ErrorCode::WeightsNotNormalized);
  CHECK(code_of([] { need_seed_score(1.5, 0.5, 0.5, 0.7, 0.3); }) == ErrorCode::InputOutOfRange);
  CHECK(fit_score(0.954) == 95);
  CHECK(fit_score(0.955) == 96);
  CHECK(fit_score(1.2) == 100);
  CHECK(fit_score(-0.1) == 0);
}

TEST_CASE("relevance matches a reference tf-idf cosine") {
  const std::vector<std::vector<std::string>> docs = {
      {"nand", "flash", "wear"}, {"flash", "cooling"}, {"battery", "anode", "flash"}, {"wear", "leveling"}};
  text::TermStats stats;
  for (const auto& d : docs) stats.add_document(d);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < docs.size(); ++j) {
      CHECK(relevance(docs[i], docs[j], stats) == doctest::Approx(cosine_oracle(docs[i], docs[j], docs)).epsilon(1e-12));
    }
  }
  CHECK(relevance(docs[0], docs[0], stats) == doctest::Approx(1.0));
  CHECK(relevance({"nand"}, {"battery"}, stats) == 0.0);
  CHECK(code_of([&] { relevance({}, docs[0], stats); }) == ErrorCode::EmptyText);
}

TEST_CASE("demand normalization") {
  needgraph::NeedGraph g;
  g.nodes = {node("N1", "A", {"x"}, 1.0, -60), node("N2", "B", {"y"}, 1.0, 0), node("N3", "C", {"z"}, 1.0, 10)};
  const auto d = demand_norm(g);
  CHECK(d.at("N1") == 0.0);
  CHECK(d.at("N2") == doctest::Approx(60.0 / 70.0));
  CHECK(d.at("N3") == 1.0);
  g.nodes.resize(1);
  CHECK(demand_norm(g).at("N1") == 1.0);
}

TEST_CASE("matching, thresholds and clusters") {
  needgraph::NeedGraph g;
  g.nodes = {node("N0001", "SUNGWON", {"erase", "flash", "nand", "wear"}, 1.0, 10),
             node("N0002", "NORVIA", {"anode", "battery"}, 0.5, 0),
             node("N0003", "ALTRIX", {"flash", "wear"}, 0.4, -60)};
  const std::vector<claims::SeedProfile> seeds = {seed("P2", {"erase", "flash", "nand", "wear"}),
                                                  seed("P1", {"flash", "nand", "wear"}), seed("P3", {"anode", "battery"}),
                                                  seed("P4", {}), seed("P5", {"solar"})};
  NexusConfig cfg;
  cfg.threshold = 0.0;
  const auto all = match_portfolio(seeds, g, cfg);
  for (const auto& m : all) {
    CHECK(m.s_needseed == doctest::Approx(m.s_demand_norm * (0.7 * m.s_relevance + 0.3 * m.s_authority)));
    CHECK(m.fit_score == fit_score(m.s_needseed));
    CHECK(match_from_json(to_json(m)).match_id() == m.match_id());
  }
  REQUIRE(all.size() == 5);
  CHECK(all.front().match_id() == "P2->N0001");
  CHECK(all.front().fit_score == 100);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].fit_score >= all[i].fit_score);

  cfg.threshold = 0.5;
  const auto kept = match_portfolio(seeds, g, cfg);
  for (const auto& m : kept) CHECK(m.s_needseed >= 0.5);
  CHECK(kept.size() < all.size());

  const auto clusters = cluster_matches(all);
  REQUIRE_FALSE(clusters.empty());
  CHECK(clusters[0].cluster_id == "C-N0001");
  CHECK(clusters[0].members == std::vector<std::string>{"P1", "P2"});
  std::size_t placed = 0;
  for (const auto& c : clusters) {
    placed += c.members.size();
    CHECK(to_json(cluster_from_json(to_json(c))) == to_json(c));
  }
  CHECK(placed == 3);
  CHECK(code_of([&] { match_portfolio(seeds, needgraph::NeedGraph{}, cfg); }) == ErrorCode::EmptyGraph);
}

TEST_CASE("report fills every field") {
  needgraph::NeedGraph g;
  g.nodes = {node("N0001", "SUNGWON", {"flash", "nand"}, 1.0, 10)};
  const auto matches = match_portfolio({seed("P1", {"flash", "nand"})}, g, {});
  const auto clusters = cluster_matches(matches);
  REQUIRE(clusters.size() == 1);

  ReportContext bare;
  bare.graph = &g;
  const auto r = generate_report(clusters[0], bare);
  for (const char* key : {"cluster_id", "seed_asset", "target_match", "scoring", "opportunity_size", "risk_profile",
                          "strategic_actions"}) {
    CHECK(r.contains(key));
  }
  CHECK(r["opportunity_size"]["usd"] == kInsufficientData);
  CHECK(r["scoring"]["ltr_rank"] == kInsufficientData);
  CHECK(r["seed_asset"]["titles"][0] == kInsufficientData);
  CHECK(r["target_match"]["source_quote"]["doc_id"] == "DOC-N0001");
  CHECK_FALSE(r["strategic_actions"].empty());
  const auto text = render_report(r);
  CHECK(text.find("fit score: 100/100") != std::string::npos);

  corpus::Portfolio p;
  corpus::PatentRecord rec;
  rec.patent_id = "P1";
  rec.title = "Wear leveling";
  rec.cpc_codes = {"G11C16/34"};
  p.records = {rec};
  params::MarketData market;
  market.by_cpc_prefix["G11C16"].tam_usd = 41e9;
  std::map<std::string, claims::SeedProfile> seeds{{"P1", seed("P1", {"flash", "nand"})}};
  ReportContext full = bare;
  full.portfolio = &p;
  full.market = &market;
  full.seeds = &seeds;
  const auto f = generate_report(clusters[0], full);
  CHECK(f["opportunity_size"]["usd"] == 41e9);
  CHECK(f["seed_asset"]["titles"][0] == "Wear leveling");
  CHECK(render_report(f).find("USD 41,000,000,000") != std::string::npos);
  bool narrow = false;
  for (const auto& risk : f["risk_profile"]["risks"]) narrow |= risk["code"] == "NarrowClaims";
  CHECK(narrow);

  Cluster stray = clusters[0];
  stray.need_id = "N0404";
  CHECK(code_of([&] { generate_report(stray, bare); }) == ErrorCode::InvalidArgument);
}
