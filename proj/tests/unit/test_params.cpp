#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "pp/error.hpp"
#include "pp/params.hpp"
#include "support/check.hpp"
#include "support/formula_suite.hpp"

using namespace pp;
using namespace pp::params;
using testsupport::code_of;

namespace {

corpus::PatentRecord base_record() {
  corpus::PatentRecord p;
  p.patent_id = "P1";
  p.claims = {{1, "An apparatus comprising: a frame; and a wheel."}};
  p.filing_date = Date(2015, 1, 1);
  p.grant_date = Date(2017, 1, 1);
  p.expiry_date = Date(2035, 1, 1);
  p.cpc_codes = {"G11C16/34"};
  return p;
}

}  // namespace

TEST_CASE("formulas agree with the reference implementations") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = testsupport::formula_suite(seed, 25);
    INFO(t.summary());
    CHECK(t.ok());
    CHECK(t.cases >= 12 * 25);
  }
}

TEST_CASE("worked examples") {
  const ParamConfig cfg;
  CHECK(rejection_score(2, 1, 3, cfg) == doctest::Approx(3.2));
  CHECK(cagr(100, 121, 2) == doctest::Approx(0.1));
  CHECK(demand_snr(100, 1, cfg) == doctest::Approx(20.0));
  CHECK(demand_snr(0, 1, cfg) == -60.0);
  CHECK(demand_snr(1e-9, 1, cfg) == -60.0);
  CHECK(supply_chain_score(1, 1, 1, cfg) == doctest::Approx(1.0));
  CHECK(ma_score(0, 0, cfg) == 0.0);
  CHECK(partnership_score({{"JointVenture", 1}, {"MoU", 2}}, cfg) == doctest::Approx(1.6));
  CHECK(inventor_score(10, 1, 0, cfg) == doctest::Approx(5.0));

  GniTable gni{{{"USA", 2.0}, {"JPN", 1.0}}};
  CHECK(jurisdiction_score({{"USA", corpus::JurisdictionStatus::Granted}, {"JPN", corpus::JurisdictionStatus::Pending}},
                           gni, cfg) == doctest::Approx(1.35));
}

TEST_CASE("formula errors") {
  const ParamConfig cfg;
  CHECK(code_of([] { cagr(0, 1, 1); }) == ErrorCode::NonPositiveStart);
  CHECK(code_of([] { cagr(1, 1, 0); }) == ErrorCode::NonPositiveHorizon);
  CHECK(code_of([&] { inventor_score(1, 0.5, 0, cfg); }) == ErrorCode::CollabBelowOne);
  CHECK(code_of([&] { inventor_score(1, 2, 1.5, cfg); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { demand_snr(1, 0, cfg); }) == ErrorCode::ZeroNoiseFloor);
  CHECK(code_of([&] { partnership_score({{"Handshake", 1}}, cfg); }) == ErrorCode::UnknownPartnershipType);
  CHECK(code_of([&] { litigation_score({{corpus::LitigationOutcome::Settlement, -1}}, cfg); }) ==
        ErrorCode::NegativeCaseValue);
  CHECK(code_of([&] { supply_chain_score(1.2, 0, 0, cfg); }) == ErrorCode::OutOfRange);
  GniTable gni{{{"USA", 1.0}}};
  CHECK(code_of([&] { jurisdiction_score({{"XXX", corpus::JurisdictionStatus::Granted}}, gni, cfg); }) ==
        ErrorCode::UnknownCountry);

  auto p = base_record();
  CHECK(code_of([&] { remaining_life(p, Date(2036, 1, 1)); }) == ErrorCode::ExpiredAtEvaluation);
  p.grant_date.reset();
  CHECK(code_of([&] { pendency_months(p); }) == ErrorCode::MissingGrantDate);
  CHECK(code_of([&] { citation_velocity(p, Date(2020, 1, 1), cfg); }) == ErrorCode::MissingGrantDate);
  p.claims.clear();
  CHECK(code_of([&] { claim_type_score(p.claims, cfg); }) == ErrorCode::NoClaims);
}

TEST_CASE("citation velocity floors young patents") {
  auto p = base_record();
  p.grant_date = Date(2020, 1, 1);
  p.forward_citations = {{"A", Date(2020, 1, 10)}, {"B", Date(2020, 1, 20)}};
  CHECK(citation_velocity(p, Date(2020, 1, 31), ParamConfig{}) == doctest::Approx(8.0));
  p.forward_citations = {{"A", Date(2010, 1, 10)}};
  CHECK(citation_velocity(p, Date(2020, 1, 31), ParamConfig{}) == 0.0);
}

TEST_CASE("feature vector marks absent inputs") {
  auto p = base_record();
  p.missing_fields = {"forward_citations", "inventors", "jurisdictions", "litigation_events", "rejection_events"};
  p.direct_metrics = {{"TRL", 7}, {"R_mat", 0.5}, {"R_mfg", 0.5}, {"R_work", 0.5}};
  MarketContext ctx{GniTable{{{"USA", 1.0}}}, {}, {}};
  ctx.market.by_cpc_prefix["G11C"].tam_usd = 5e9;
  ctx.market.by_cpc_prefix["G11C"].filings_start = 100;
  ctx.market.by_cpc_prefix["G11C"].filings_end = 121;
  ctx.market.by_cpc_prefix["G11C"].horizon_years = 2;

  const auto v = build_feature_vector(p, Date(2025, 1, 1), ctx);
  CHECK(v[Feature::L_rem] == doctest::Approx(oracle::remaining_life(oracle::jdn(2035, 1, 1), oracle::jdn(2025, 1, 1))));
  CHECK(v[Feature::S_claim] == 1.0);
  CHECK(v[Feature::TRL] == 7.0);
  CHECK(v[Feature::S_sc] == doctest::Approx(0.5));
  CHECK(v[Feature::V_TAM] == 5e9);
  CHECK(v[Feature::S_trend] == doctest::Approx(0.1));
  CHECK(v[Feature::T_pend] == doctest::Approx(oracle::pendency_months(oracle::jdn(2015, 1, 1), oracle::jdn(2017, 1, 1))));
  for (auto f : {Feature::V_cite, Feature::S_inv, Feature::S_juris, Feature::S_litigation, Feature::S_rej, Feature::MRL,
                 Feature::S_demand, Feature::S_NeedSeed, Feature::V_rev}) {
    CHECK(v.missing(f));
    CHECK(v[f] == 0.0);
  }
  CHECK_FALSE(v.missing(Feature::L_rem));
  CHECK(vector_from_json(to_json(v)) == v);
}

TEST_CASE("direct metrics are range checked") {
  auto p = base_record();
  p.direct_metrics = {{"TRL", 12}};
  CHECK(code_of([&] { extract_direct_parameters(p); }) == ErrorCode::RangeViolation);
  p.direct_metrics = {{"TRL", 9}, {"MRL", 10}};
  CHECK(extract_direct_parameters(p)[Feature::MRL] == 10.0);
}

TEST_CASE("market lookup uses the longest prefix") {
  MarketData m;
  m.by_cpc_prefix["G11C"].tam_usd = 1;
  m.by_cpc_prefix["G11C16"].tam_usd = 2;
  CHECK(*m.lookup("G11C16/34")->tam_usd == 2);
  CHECK(*m.lookup("G11C7/10")->tam_usd == 1);
  CHECK(m.lookup("H01L23/00") == nullptr);
  CHECK(m.matching_prefix("G11C16/34") == std::optional<std::string>("G11C16"));
}

TEST_CASE("config toml overrides defaults and validates") {
  const auto c = param_config_from_toml("[rejection]\nw102 = 2.0\n[partnership]\nLicensing = 0.5\n");
  CHECK(c.w102 == 2.0);
  CHECK(c.w103 == 0.6);
  CHECK(c.partnership_weights.size() == 1);
  CHECK(code_of([] { param_config_from_toml("[supply_chain]\nw_mat = 0.9\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { param_config_from_toml("not toml ["); }) == ErrorCode::Config);
  const auto shipped = load_param_config(std::string(PP_SOURCE_DIR) + "/config/params.toml");
  CHECK(to_json(shipped) == to_json(ParamConfig{}));
}

TEST_CASE("feature names index their slots") {
  CHECK(kFeatureNames.size() == 33);
  for (std::size_t i = 0; i < kFeatureCount; ++i) CHECK(feature_index(kFeatureNames[i]) == i);
  CHECK(code_of([] { feature_index("nope"); }) == ErrorCode::InvalidArgument);
}
