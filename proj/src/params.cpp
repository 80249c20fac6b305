#include "pp/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <toml.hpp>

#include "pp/claims.hpp"
#include "pp/error.hpp"

namespace pp::params {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorCode::Config, std::string(what) + " must be finite");
}

std::optional<double> metric(const corpus::PatentRecord& p, const char* key) {
  if (const auto it = p.direct_metrics.find(key); it != p.direct_metrics.end()) return it->second;
  return std::nullopt;
}

/// Runs a slot computation and prefixes any error with the parameter name.
template <typename Fn>
void compute_slot(Feature f, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    fail(e.code(), std::string(kFeatureNames[index(f)]) + ": " + e.what());
  }
}

}  // namespace

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  fail(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
}

json to_json(const FeatureVector& v) {
  return {{"values", v.values}, {"missing_mask", v.missing_mask}};
}

FeatureVector vector_from_json(const json& j) {
  FeatureVector v;
  const auto& values = j.at("values");
  const auto& mask = j.at("missing_mask");
  if (values.size() != kFeatureCount || mask.size() != kFeatureCount) {
    fail(ErrorCode::InvalidArgument, "feature vector must have 33 components");
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    v.values[i] = values[i].get<double>();
    v.missing_mask[i] = mask[i].get<bool>();
  }
  return v;
}

void ParamConfig::validate() const {
  for (double w : {w102, w103, w112, claim_product, claim_process, claim_composition,
                   lit_plaintiff_win, lit_settlement, lit_defendant_win, inv_alpha, inv_beta,
                   inv_gamma, sc_w_mat, sc_w_mfg, sc_w_work, ma_alpha, ma_beta, juris_granted,
                   juris_pending, citation_window_years, velocity_floor_years, demand_floor_db}) {
    require_finite(w, "parameter weight");
  }
  for (const auto& [type, w] : partnership_weights) require_finite(w, "partnership weight");
  if (std::abs(sc_w_mat + sc_w_mfg + sc_w_work - 1.0) > 1e-9) {
    fail(ErrorCode::Config, "supply-chain weights must sum to 1");
  }
  for (double s : {juris_granted, juris_pending}) {
    if (!(s > 0.0 && s <= 1.0)) fail(ErrorCode::Config, "jurisdiction status factors must be in (0,1]");
  }
  if (citation_window_years <= 0.0 || velocity_floor_years <= 0.0) {
    fail(ErrorCode::Config, "citation window and velocity floor must be positive");
  }
}

ParamConfig param_config_from_toml(std::string_view toml_text) {
  toml::table t;
  try {
    t = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    fail(ErrorCode::Config, std::string("params config: ") + std::string(e.description()));
  }
  ParamConfig c;
  auto read = [&](double& field, std::string_view table, std::string_view key) {
    if (auto v = t[table][key].value<double>()) field = *v;
  };
  read(c.w102, "rejection", "w102");
  read(c.w103, "rejection", "w103");
  read(c.w112, "rejection", "w112");
  read(c.claim_product, "claim_type", "product");
  read(c.claim_process, "claim_type", "process");
  read(c.claim_composition, "claim_type", "composition");
  read(c.lit_plaintiff_win, "litigation", "plaintiff_win");
  read(c.lit_settlement, "litigation", "settlement");
  read(c.lit_defendant_win, "litigation", "defendant_win");
  read(c.inv_alpha, "inventor", "alpha");
  read(c.inv_beta, "inventor", "beta");
  read(c.inv_gamma, "inventor", "gamma");
  read(c.sc_w_mat, "supply_chain", "w_mat");
  read(c.sc_w_mfg, "supply_chain", "w_mfg");
  read(c.sc_w_work, "supply_chain", "w_work");
  read(c.ma_alpha, "ma", "alpha");
  read(c.ma_beta, "ma", "beta");
  read(c.juris_granted, "jurisdiction", "granted");
  read(c.juris_pending, "jurisdiction", "pending");
  read(c.citation_window_years, "citation", "window_years");
  read(c.velocity_floor_years, "citation", "velocity_floor_years");
  read(c.demand_floor_db, "demand", "floor_db");
  if (const auto* types = t["partnership"].as_table()) {
    c.partnership_weights.clear();
    for (const auto& [k, v] : *types) {
      const auto w = v.value<double>();
      if (!w) fail(ErrorCode::Config, "partnership weight must be a number");
      c.partnership_weights[std::string(k.str())] = *w;
    }
  }
  c.validate();
  return c;
}

ParamConfig load_param_config(const std::filesystem::path& path) {
  return param_config_from_toml(read_text_file(path));
}

json to_json(const ParamConfig& c) {
  return {
      {"rejection", {{"w102", c.w102}, {"w103", c.w103}, {"w112", c.w112}}},
      {"claim_type",
       {{"product", c.claim_product}, {"process", c.claim_process}, {"composition", c.claim_composition}}},
      {"litigation",
       {{"plaintiff_win", c.lit_plaintiff_win}, {"settlement", c.lit_settlement},
        {"defendant_win", c.lit_defendant_win}}},
      {"inventor", {{"alpha", c.inv_alpha}, {"beta", c.inv_beta}, {"gamma", c.inv_gamma}}},
      {"supply_chain", {{"w_mat", c.sc_w_mat}, {"w_mfg", c.sc_w_mfg}, {"w_work", c.sc_w_work}}},
      {"ma", {{"alpha", c.ma_alpha}, {"beta", c.ma_beta}}},
      {"partnership", c.partnership_weights},
      {"jurisdiction", {{"granted", c.juris_granted}, {"pending", c.juris_pending}}},
      {"citation",
       {{"window_years", c.citation_window_years}, {"velocity_floor_years", c.velocity_floor_years}}},
      {"demand", {{"floor_db", c.demand_floor_db}}},
  };
}

GniTable load_gni_table(const std::filesystem::path& path) {
  GniTable t;
  for (const auto& row : read_csv(path, {"iso3", "gni_usd"})) {
    double v = 0.0;
    try {
      v = std::stod(row[1]);
    } catch (const std::exception&) {
      fail(ErrorCode::Config, "gni.csv: bad number for " + row[0]);
    }
    t.gni_usd[row[0]] = v;
  }
  const auto usa = t.gni_usd.find("USA");
  if (usa == t.gni_usd.end() || !(usa->second > 0.0)) {
    fail(ErrorCode::Config, "gni.csv must include USA with a positive GNI");
  }
  return t;
}

const MarketEntry* MarketData::lookup(std::string_view cpc_code) const {
  const auto key = matching_prefix(cpc_code);
  return key ? &by_cpc_prefix.at(*key) : nullptr;
}

std::optional<std::string> MarketData::matching_prefix(std::string_view cpc_code) const {
  std::optional<std::string> best;
  for (const auto& [prefix, entry] : by_cpc_prefix) {
    if (cpc_code.substr(0, prefix.size()) == prefix && (!best || prefix.size() > best->size())) {
      best = prefix;
    }
  }
  return best;
}

MarketData market_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Config, "market data must be an object keyed by CPC prefix");
  MarketData m;
  for (const auto& [prefix, e] : j.items()) {
    MarketEntry me;
    auto num = [&](const char* key) -> std::optional<double> {
      const auto it = e.find(key);
      if (it == e.end() || it->is_null()) return std::nullopt;
      if (!it->is_number()) fail(ErrorCode::Config, "market." + prefix + "." + key + " must be a number");
      return it->get<double>();
    };
    me.tam_usd = num("tam_usd");
    me.revenue_usd = num("revenue_usd");
    me.market_start = num("market_start");
    me.market_end = num("market_end");
    me.horizon_years = num("horizon_years");
    me.filings_start = num("filings_start");
    me.filings_end = num("filings_end");
    me.signal_power = num("signal_power");
    me.noise_power = num("noise_power");
    me.deals_value_usd = num("deals_value_usd");
    me.deals_count = num("deals_count");
    if (auto it = e.find("partnership_counts"); it != e.end()) {
      me.partnership_counts = it->get<std::map<std::string, double>>();
    }
    m.by_cpc_prefix[prefix] = std::move(me);
  }
  return m;
}

MarketData load_market_data(const std::filesystem::path& path) {
  return market_from_json(read_json_file(path));
}

double remaining_life(const corpus::PatentRecord& p, Date eval_date) {
  const double years = static_cast<double>(p.expiry_date - eval_date) / kDaysPerYear;
  if (years < 0.0) {
    fail(ErrorCode::ExpiredAtEvaluation,
         p.patent_id + " expired " + p.expiry_date.iso() + " before " + eval_date.iso());
  }
  return years;
}

double claim_type_score(const std::vector<corpus::ClaimText>& claims, const ParamConfig& cfg) {
  if (claims.empty()) fail(ErrorCode::NoClaims, "no claims");
  double best = -1.0;
  for (const auto& c : claims::parse_claims(claims)) {
    if (!c.is_independent) continue;
    double s = 0.0;
    switch (c.claim_kind) {
      case claims::ClaimKind::Product: s = cfg.claim_product; break;
      case claims::ClaimKind::Process: s = cfg.claim_process; break;
      case claims::ClaimKind::Composition: s = cfg.claim_composition; break;
      case claims::ClaimKind::Unknown: s = 0.0; break;
    }
    best = std::max(best, s);
  }
  if (best < 0.0) fail(ErrorCode::NoClaims, "no independent claim");
  return best;
}

double citation_velocity(const corpus::PatentRecord& p, Date eval_date, const ParamConfig& cfg) {
  if (!p.grant_date) fail(ErrorCode::MissingGrantDate, p.patent_id + " has no publication date");
  const double window_days = cfg.citation_window_years * kDaysPerYear;
  std::size_t in_window = 0;
  for (const auto& c : p.forward_citations) {
    const auto age = eval_date - c.date;
    if (age >= 0 && static_cast<double>(age) < window_days) ++in_window;
  }
  if (in_window == 0) return 0.0;
  const double years = static_cast<double>(eval_date - *p.grant_date) / kDaysPerYear;
  return static_cast<double>(in_window) / std::max(years, cfg.velocity_floor_years);
}

double litigation_score(const std::vector<corpus::LitigationEvent>& events, const ParamConfig& cfg) {
  double total = 0.0;
  for (const auto& e : events) {
    if (e.case_value < 0.0) fail(ErrorCode::NegativeCaseValue, "case value must be >= 0");
    double w = 0.0;
    switch (e.outcome) {
      case corpus::LitigationOutcome::PlaintiffWin: w = cfg.lit_plaintiff_win; break;
      case corpus::LitigationOutcome::Settlement: w = cfg.lit_settlement; break;
      case corpus::LitigationOutcome::DefendantWin: w = cfg.lit_defendant_win; break;
    }
    total += w * e.case_value;
  }
  return total;
}

double cagr(double start, double end, double n_years) {
  if (!(start > 0.0)) fail(ErrorCode::NonPositiveStart, "CAGR start value must be > 0");
  if (!(n_years > 0.0)) fail(ErrorCode::NonPositiveHorizon, "CAGR horizon must be > 0");
  if (end < 0.0) fail(ErrorCode::InvalidArgument, "CAGR end value must be >= 0");
  return std::pow(end / start, 1.0 / n_years) - 1.0;
}

double pendency_months(const corpus::PatentRecord& p) {
  if (!p.grant_date) fail(ErrorCode::MissingGrantDate, p.patent_id + " has no grant date");
  return static_cast<double>(*p.grant_date - p.filing_date) / kDaysPerMonth;
}

double inventor_score(double h_index, double collab, double lit_success, const ParamConfig& cfg) {
  if (!(collab >= 1.0)) fail(ErrorCode::CollabBelowOne, "collaboration count must be >= 1");
  if (lit_success < 0.0 || lit_success > 1.0) {
    fail(ErrorCode::OutOfRange, "litigation success rate must be in [0,1]");
  }
  return cfg.inv_alpha * h_index + cfg.inv_beta * std::log(collab) + cfg.inv_gamma * lit_success;
}

double rejection_score(int n102, int n103, int n112, const ParamConfig& cfg) {
  if (n102 < 0 || n103 < 0 || n112 < 0) fail(ErrorCode::InvalidArgument, "rejection counts must be >= 0");
  return cfg.w102 * n102 + cfg.w103 * n103 + cfg.w112 * n112;
}

double jurisdiction_score(const std::vector<corpus::Jurisdiction>& jurisdictions, const GniTable& gni,
                          const ParamConfig& cfg) {
  const auto usa = gni.gni_usd.find("USA");
  if (usa == gni.gni_usd.end() || !(usa->second > 0.0)) {
    fail(ErrorCode::Config, "GNI table lacks a positive USA entry");
  }
  double total = 0.0;
  for (const auto& j : jurisdictions) {
    const auto it = gni.gni_usd.find(j.country);
    if (it == gni.gni_usd.end()) fail(ErrorCode::UnknownCountry, "no GNI for " + j.country);
    const double status =
        j.status == corpus::JurisdictionStatus::Granted ? cfg.juris_granted : cfg.juris_pending;
    total += (it->second / usa->second) * status;
  }
  return total;
}

double supply_chain_score(double r_mat, double r_mfg, double r_work, const ParamConfig& cfg) {
  if (std::abs(cfg.sc_w_mat + cfg.sc_w_mfg + cfg.sc_w_work - 1.0) > 1e-9) {
    fail(ErrorCode::WeightsNotNormalized, "supply-chain weights must sum to 1");
  }
  for (double r : {r_mat, r_mfg, r_work}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::OutOfRange, "readiness scores must be in [0,1]");
  }
  return cfg.sc_w_mat * r_mat + cfg.sc_w_mfg * r_mfg + cfg.sc_w_work * r_work;
}

double demand_snr(double p_signal, double p_noise, const ParamConfig& cfg) {
  if (!(p_noise > 0.0)) fail(ErrorCode::ZeroNoiseFloor, "noise power must be > 0");
  if (p_signal < 0.0) fail(ErrorCode::InvalidArgument, "signal power must be >= 0");
  if (p_signal == 0.0) return cfg.demand_floor_db;
  return std::max(10.0 * std::log10(p_signal / p_noise), cfg.demand_floor_db);
}

double partnership_score(const std::map<std::string, double>& counts_by_type, const ParamConfig& cfg) {
  double total = 0.0;
  for (const auto& [type, n] : counts_by_type) {
    const auto it = cfg.partnership_weights.find(type);
    if (it == cfg.partnership_weights.end()) {
      fail(ErrorCode::UnknownPartnershipType, "unknown partnership type '" + type + "'");
    }
    if (n < 0.0) fail(ErrorCode::InvalidArgument, "partnership counts must be >= 0");
    total += it->second * n;
  }
  return total;
}

double ma_score(double total_value, double n_deals, const ParamConfig& cfg) {
  if (total_value < 0.0 || n_deals < 0.0) {
    fail(ErrorCode::InvalidArgument, "deal value and count must be >= 0");
  }
  return cfg.ma_alpha * std::log1p(total_value) + cfg.ma_beta * n_deals;
}

FeatureVector extract_direct_parameters(const corpus::PatentRecord& p) {
  FeatureVector v;
  v.missing_mask.fill(true);

  auto count_slot = [&](Feature f, const char* field, std::size_t n) {
    if (p.is_missing(field)) {
      v.mark_missing(f);
    } else {
      v.set(f, static_cast<double>(n));
    }
  };
  count_slot(Feature::N_fam, "family_members", p.family_members.size());
  count_slot(Feature::N_reassign, "reassignments", p.reassignments.size());
  count_slot(Feature::N_bcite, "backward_citations", p.backward_citations.size());
  count_slot(Feature::N_ecite, "examiner_citations", p.examiner_citations.size());
  if (p.is_missing("cip_flag")) {
    v.mark_missing(Feature::S_CIP);
  } else {
    v.set(Feature::S_CIP, p.cip_flag ? 1.0 : 0.0);
  }

  struct Read {
    Feature slot;
    const char* key;
    double lo;
    double hi;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Read reads[] = {
      {Feature::TRL, "TRL", 1, 9},          {Feature::MRL, "MRL", 1, 10},
      {Feature::V_TAM, "V_TAM", 0, kInf},   {Feature::V_rev, "V_rev", 0, kInf},
      {Feature::P_cost, "P_cost", -kInf, kInf}, {Feature::T_market, "T_market", 0, kInf},
      {Feature::N_app, "N_app", 0, kInf},   {Feature::N_comp, "N_comp", 0, kInf},
      {Feature::S_mfg, "S_mfg", -kInf, kInf}, {Feature::S_invest, "S_invest", -kInf, kInf},
      {Feature::S_owner, "S_owner", -kInf, kInf}, {Feature::S_forecast, "S_forecast", -kInf, kInf},
      {Feature::N_launch, "N_launch", 0, kInf},
  };
  for (const auto& r : reads) {
    const auto val = metric(p, r.key);
    if (!val) {
      v.mark_missing(r.slot);
      continue;
    }
    if (!std::isfinite(*val) || *val < r.lo || *val > r.hi) {
      fail(ErrorCode::RangeViolation, std::string(r.key) + " = " + std::to_string(*val) +
                                          " outside [" + std::to_string(r.lo) + ", " +
                                          std::to_string(r.hi) + "]");
    }
    v.set(r.slot, *val);
  }
  return v;
}

FeatureVector build_feature_vector(const corpus::PatentRecord& p, Date eval_date,
                                   const MarketContext& ctx) {
  const ParamConfig& cfg = ctx.cfg;
  FeatureVector v = extract_direct_parameters(p);
  const MarketEntry* market = ctx.market.lookup(p.primary_cpc());

  compute_slot(Feature::L_rem, [&] { v.set(Feature::L_rem, remaining_life(p, eval_date)); });
  compute_slot(Feature::S_claim, [&] { v.set(Feature::S_claim, claim_type_score(p.claims, cfg)); });

  compute_slot(Feature::V_cite, [&] {
    if (p.is_missing("forward_citations") || !p.grant_date) {
      v.mark_missing(Feature::V_cite);
    } else {
      v.set(Feature::V_cite, citation_velocity(p, eval_date, cfg));
    }
  });
  compute_slot(Feature::S_litigation, [&] {
    if (p.is_missing("litigation_events")) {
      v.mark_missing(Feature::S_litigation);
    } else {
      v.set(Feature::S_litigation, litigation_score(p.litigation_events, cfg));
    }
  });
  compute_slot(Feature::S_trend, [&] {
    if (market && market->filings_start && market->filings_end && market->horizon_years) {
      v.set(Feature::S_trend, cagr(*market->filings_start, *market->filings_end, *market->horizon_years));
    } else {
      v.mark_missing(Feature::S_trend);
    }
  });
  compute_slot(Feature::T_pend, [&] {
    if (p.grant_date) {
      v.set(Feature::T_pend, pendency_months(p));
    } else {
      v.mark_missing(Feature::T_pend);
    }
  });
  compute_slot(Feature::S_inv, [&] {
    double sum = 0.0;
    int n = 0;
    for (const auto& inv : p.inventors) {
      if (inv.h_index && inv.collaborations && inv.litigation_success) {
        sum += inventor_score(*inv.h_index, *inv.collaborations, *inv.litigation_success, cfg);
        ++n;
      }
    }
    if (n == 0) {
      v.mark_missing(Feature::S_inv);
    } else {
      v.set(Feature::S_inv, sum / n);
    }
  });
  compute_slot(Feature::S_rej, [&] {
    if (p.is_missing("rejection_events")) {
      v.mark_missing(Feature::S_rej);
    } else {
      v.set(Feature::S_rej,
            rejection_score(p.rejections.n102, p.rejections.n103, p.rejections.n112, cfg));
    }
  });
  compute_slot(Feature::V_TAM, [&] {
    if (v.missing(Feature::V_TAM) && market && market->tam_usd) v.set(Feature::V_TAM, *market->tam_usd);
  });
  compute_slot(Feature::V_rev, [&] {
    if (v.missing(Feature::V_rev) && market && market->revenue_usd) {
      v.set(Feature::V_rev, *market->revenue_usd);
    }
  });
  compute_slot(Feature::CAGR_tech, [&] {
    const auto s = metric(p, "market_start");
    const auto e = metric(p, "market_end");
    const auto n = metric(p, "market_horizon_years");
    if (s && e && n) {
      v.set(Feature::CAGR_tech, cagr(*s, *e, *n));
    } else if (market && market->market_start && market->market_end && market->horizon_years) {
      v.set(Feature::CAGR_tech, cagr(*market->market_start, *market->market_end, *market->horizon_years));
    } else {
      v.mark_missing(Feature::CAGR_tech);
    }
  });
  compute_slot(Feature::S_juris, [&] {
    if (p.is_missing("jurisdictions")) {
      v.mark_missing(Feature::S_juris);
    } else {
      v.set(Feature::S_juris, jurisdiction_score(p.jurisdictions, ctx.gni, cfg));
    }
  });
  compute_slot(Feature::S_sc, [&] {
    const auto mat = metric(p, "R_mat");
    const auto mfg = metric(p, "R_mfg");
    const auto work = metric(p, "R_work");
    if (mat && mfg && work) {
      v.set(Feature::S_sc, supply_chain_score(*mat, *mfg, *work, cfg));
    } else {
      v.mark_missing(Feature::S_sc);
    }
  });
  compute_slot(Feature::S_demand, [&] {
    if (market && market->signal_power && market->noise_power) {
      v.set(Feature::S_demand, demand_snr(*market->signal_power, *market->noise_power, cfg));
    } else {
      v.mark_missing(Feature::S_demand);
    }
  });
  compute_slot(Feature::S_partner, [&] {
    if (market) {
      v.set(Feature::S_partner, partnership_score(market->partnership_counts, cfg));
    } else {
      v.mark_missing(Feature::S_partner);
    }
  });
  compute_slot(Feature::S_MA, [&] {
    if (market && market->deals_value_usd && market->deals_count) {
      v.set(Feature::S_MA, ma_score(*market->deals_value_usd, *market->deals_count, cfg));
    } else {
      v.mark_missing(Feature::S_MA);
    }
  });
  v.mark_missing(Feature::S_NeedSeed);
  return v;
}

}  // namespace pp::params
