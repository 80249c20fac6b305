#include <doctest.h>

#include <algorithm>
#include <random>

#include "pp/error.hpp"
#include "pp/strata.hpp"
#include "support/check.hpp"

using namespace pp;
using namespace pp::strata;
using params::Feature;
using testsupport::code_of;

namespace {

struct Toy {
  corpus::Portfolio portfolio;
  VectorTable vectors;
};

void add(Toy& t, const std::string& id, const std::string& cpc, double l_rem, double trend, double tam) {
  corpus::PatentRecord r;
  r.patent_id = id;
  r.cpc_codes = {cpc};
  t.portfolio.records.push_back(r);
  params::FeatureVector v;
  v[Feature::L_rem] = l_rem;
  v[Feature::S_trend] = trend;
  v[Feature::V_TAM] = tam;
  v[Feature::CAGR_tech] = trend / 2;
  t.vectors[id] = v;
}

std::vector<std::string> ranking_by(const VectorTable& vectors, Feature f) {
  std::vector<std::string> ids;
  for (const auto& [id, v] : vectors) ids.push_back(id);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](const std::string& a, const std::string& b) { return vectors.at(a)[f] > vectors.at(b)[f]; });
  return ids;
}

}  // namespace

TEST_CASE("maturity bands and cpc prefixes") {
  CHECK(maturity_band(15.01) == MaturityBand::GT15);
  CHECK(maturity_band(15.0) == MaturityBand::Y10to15);
  CHECK(maturity_band(10.0) == MaturityBand::Y10to15);
  CHECK(maturity_band(5.0) == MaturityBand::Y5to10);
  CHECK(maturity_band(4.99) == MaturityBand::LT5);
  CHECK(cpc_prefix("g11c 16/34", 4) == "G11C");
  CHECK(cpc_prefix("G11C16/34", 6) == "G11C16");
  CHECK(cpc_prefix("H01", 4) == "H01");
}

TEST_CASE("category keys round trip") {
  const CategoryKey k{"G11C", MaturityBand::Y5to10, GrowthBand::Medium};
  CHECK(k.str() == "G11C|Y5to10|Medium");
  CHECK(CategoryKey::parse(k.str()) == k);
  CHECK(code_of([] { CategoryKey::parse("G11C|Old|High"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { CategoryKey::parse("G11C"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("categorize partitions by prefix, band and growth tertile") {
  Toy t;
  add(t, "A", "G11C16/34", 16, 0.1, 100);
  add(t, "B", "G11C7/10", 16, 0.2, 300);
  add(t, "C", "G11C5/00", 16, 0.3, 500);
  add(t, "D", "H01L23/00", 3, 0.4, 700);
  add(t, "E", "H01L21/00", 3, 0.5, 900);
  add(t, "F", "H01L25/00", 3, 0.6, 1100);
  const auto cats = categorize(t.portfolio, t.vectors);
  REQUIRE(cats.size() == 4);
  CHECK(cats[0].key.str() == "G11C|GT15|Medium");
  CHECK(cats[0].members == std::vector<std::string>{"C"});
  CHECK(cats[1].key.str() == "G11C|GT15|Low");
  CHECK(cats[1].members == std::vector<std::string>{"A", "B"});
  CHECK(cats[1].aggregates.mean_v_tam == doctest::Approx(200));
  CHECK(cats[2].key.str() == "H01L|LT5|High");
  CHECK(cats[2].members.size() == 2);
  CHECK(cats[3].key.str() == "H01L|LT5|Medium");

  std::size_t members = 0;
  for (const auto& c : cats) {
    members += c.members.size();
    REQUIRE(c.v_tam_scaled);
    CHECK(*c.v_tam_scaled >= 0.0);
    CHECK(*c.v_tam_scaled <= 1.0);
    CHECK(to_json(category_from_json(to_json(c))) == to_json(c));
  }
  CHECK(members == 6);
  CHECK(*cats[1].v_tam_scaled == 0.0);
  CHECK(*cats[2].v_tam_scaled == 1.0);

  corpus::Portfolio empty;
  CHECK(code_of([&] { categorize(empty, t.vectors); }) == ErrorCode::EmptyPortfolio);
  t.vectors.erase("A");
  CHECK(code_of([&] { categorize(t.portfolio, t.vectors); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("degenerate market range scales to one") {
  std::vector<Category> cats(2);
  cats[0].aggregates.mean_v_tam = cats[1].aggregates.mean_v_tam = 5;
  scale_market_size(cats);
  CHECK(*cats[0].v_tam_scaled == 1.0);
  CHECK(*cats[1].v_tam_scaled == 1.0);
}

TEST_CASE("category score is the weighted sum") {
  Category c;
  c.aggregates = {12, 0.2, 7e9, 0.1};
  const auto p = custom_profile({0.4, 0.3, 0.2, 0.1}, {});
  CHECK(code_of([&] { category_score(c, p); }) == ErrorCode::UnscaledInput);
  c.v_tam_scaled = 0.5;
  CHECK(category_score(c, p) == doctest::Approx(0.4 * 12 + 0.3 * 0.2 + 0.2 * 0.5 + 0.1 * 0.1));
}

TEST_CASE("profile validation") {
  CHECK(code_of([] { custom_profile({0.5, 0.5, 0.5, 0.5}, {}); }) == ErrorCode::WeightsNotNormalized);
  CHECK(code_of([] { custom_profile({1.5, -0.5, 0, 0}, {}); }) == ErrorCode::WeightsNotNormalized);
  CHECK(code_of([] { custom_profile({1, 0, 0, 0}, {{"TRL", -1}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { custom_profile({1, 0, 0, 0}, {{"Nope", 2}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { resolve_profile("Nope"); }) == ErrorCode::UnknownProfile);
  const auto set = builtin_profiles();
  CHECK(set.by_label.size() == 4);
  CHECK(resolve_profile("DefensiveMoat", set).multiplier(Feature::S_claim) == 2.0);
  CHECK(resolve_profile("Custom", set).multiplier(Feature::S_claim) == 1.0);
}

TEST_CASE("profiles toml") {
  const auto set = profiles_from_toml(
      "[profiles.Mine]\ncategory_weights = [0.1, 0.2, 0.3, 0.4]\n[profiles.Mine.feature_multipliers]\nTRL = 3\n");
  CHECK(set.by_label.size() == 5);
  const auto& p = set.by_label.at("Mine");
  CHECK(p.name == ProfileName::Custom);
  CHECK(p.multiplier(Feature::TRL) == 3.0);
  CHECK(to_json(p)["feature_multipliers"].size() == 1);
  CHECK(code_of([] { profiles_from_toml("[profiles.X]\ncategory_weights = [1, 0]\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { profiles_from_toml("[profiles.X]\ncategory_weights = [0.5, 0.5, 0.5, 0]\n"); }) ==
        ErrorCode::WeightsNotNormalized);
  const auto shipped = load_profiles(std::string(PP_SOURCE_DIR) + "/config/profiles.toml");
  CHECK(shipped.by_label.count("StandardsPlay") == 1);
}

TEST_CASE("single-feature ranking is invariant under positive multipliers") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_real_distribution<double> mult(1e-3, 1e3);
  for (int trial = 0; trial < 1000; ++trial) {
    VectorTable vectors;
    const int n = 2 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      params::FeatureVector v;
      for (auto& x : v.values) x = (rng() % 5 == 0) ? std::floor(u(rng) / 25) : u(rng);
      vectors["P" + std::to_string(i)] = v;
    }
    const auto f = static_cast<Feature>(rng() % params::kFeatureCount);
    WeightingProfile p;
    p.multipliers[params::index(f)] = mult(rng);
    VectorTable scaled;
    for (const auto& [id, v] : vectors) scaled[id] = apply_profile(v, p);
    REQUIRE(ranking_by(scaled, f) == ranking_by(vectors, f));
  }
}
