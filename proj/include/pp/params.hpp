#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pp/corpus.hpp"
#include "pp/date.hpp"
#include "pp/io.hpp"

namespace pp::params {

inline constexpr std::size_t kFeatureCount = 33;

/// Canonical slot order of the feature vector.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "L_rem",    "S_claim",   "N_fam",     "V_cite",   "N_reassign", "S_litigation", "S_trend",
    "T_pend",   "N_bcite",   "N_ecite",   "S_inv",    "S_rej",      "S_CIP",        "TRL",
    "MRL",      "V_TAM",     "V_rev",     "CAGR_tech", "S_juris",   "S_sc",         "P_cost",
    "T_market", "N_app",     "N_comp",    "S_mfg",    "S_demand",   "S_partner",    "S_invest",
    "N_launch", "S_MA",      "S_owner",   "S_forecast", "S_NeedSeed",
};

enum class Feature : std::size_t {
  L_rem, S_claim, N_fam, V_cite, N_reassign, S_litigation, S_trend, T_pend, N_bcite, N_ecite,
  S_inv, S_rej, S_CIP, TRL, MRL, V_TAM, V_rev, CAGR_tech, S_juris, S_sc, P_cost, T_market,
  N_app, N_comp, S_mfg, S_demand, S_partner, S_invest, N_launch, S_MA, S_owner, S_forecast,
  S_NeedSeed,
};

constexpr std::size_t index(Feature f) { return static_cast<std::size_t>(f); }

/// Throws Error{InvalidArgument} for an unknown name.
std::size_t feature_index(std::string_view name);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::array<bool, kFeatureCount> missing_mask{};

  double& operator[](Feature f) { return values[index(f)]; }
  double operator[](Feature f) const { return values[index(f)]; }
  bool missing(Feature f) const { return missing_mask[index(f)]; }
  void set(Feature f, double v) {
    values[index(f)] = v;
    missing_mask[index(f)] = false;
  }
  void mark_missing(Feature f) {
    values[index(f)] = 0.0;
    missing_mask[index(f)] = true;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

json to_json(const FeatureVector& v);
FeatureVector vector_from_json(const json& j);

struct ParamConfig {
  double w102 = 1.0;
  double w103 = 0.6;
  double w112 = 0.2;
  double claim_product = 1.0;
  double claim_process = 0.7;
  double claim_composition = 0.5;
  double lit_plaintiff_win = 1.0;
  double lit_settlement = 0.5;
  double lit_defendant_win = 0.0;
  double inv_alpha = 0.5;
  double inv_beta = 0.3;
  double inv_gamma = 0.2;
  double sc_w_mat = 0.4;
  double sc_w_mfg = 0.4;
  double sc_w_work = 0.2;
  double ma_alpha = 1.0;
  double ma_beta = 0.1;
  std::map<std::string, double> partnership_weights = {
      {"JointVenture", 1.0}, {"Licensing", 0.7}, {"MoU", 0.3}};
  double juris_granted = 1.0;
  double juris_pending = 0.7;
  double citation_window_years = 3.0;
  double velocity_floor_years = 0.25;
  double demand_floor_db = -60.0;

  /// Throws Error{Config} when an invariant fails (non-finite weight,
  /// supply-chain weights off the simplex, status factor outside (0,1]).
  void validate() const;
};

/// Loads a TOML config; absent keys keep the defaults above.
ParamConfig load_param_config(const std::filesystem::path& path);
ParamConfig param_config_from_toml(std::string_view toml_text);
json to_json(const ParamConfig& c);

struct GniTable {
  std::map<std::string, double> gni_usd;  // iso3 -> GNI
};

/// `iso3,gni_usd`; must contain USA with a positive value.
GniTable load_gni_table(const std::filesystem::path& path);

struct MarketEntry {
  std::optional<double> tam_usd;
  std::optional<double> revenue_usd;
  std::optional<double> market_start;
  std::optional<double> market_end;
  std::optional<double> horizon_years;
  std::optional<double> filings_start;
  std::optional<double> filings_end;
  std::optional<double> signal_power;
  std::optional<double> noise_power;
  std::optional<double> deals_value_usd;
  std::optional<double> deals_count;
  std::map<std::string, double> partnership_counts;
};

struct MarketData {
  std::map<std::string, MarketEntry> by_cpc_prefix;

  /// Longest key that prefixes `cpc_code`, or nullptr.
  const MarketEntry* lookup(std::string_view cpc_code) const;
  std::optional<std::string> matching_prefix(std::string_view cpc_code) const;
};

MarketData load_market_data(const std::filesystem::path& path);
MarketData market_from_json(const json& j);

struct MarketContext {
  GniTable gni;
  MarketData market;
  ParamConfig cfg;
};

// Formula operations. All are pure.

double remaining_life(const corpus::PatentRecord& p, Date eval_date);
double claim_type_score(const std::vector<corpus::ClaimText>& claims, const ParamConfig& cfg = {});
double citation_velocity(const corpus::PatentRecord& p, Date eval_date, const ParamConfig& cfg = {});
double litigation_score(const std::vector<corpus::LitigationEvent>& events, const ParamConfig& cfg = {});
double cagr(double start, double end, double n_years);
double pendency_months(const corpus::PatentRecord& p);
double inventor_score(double h_index, double collab, double lit_success, const ParamConfig& cfg = {});
double rejection_score(int n102, int n103, int n112, const ParamConfig& cfg = {});
double jurisdiction_score(const std::vector<corpus::Jurisdiction>& jurisdictions, const GniTable& gni,
                          const ParamConfig& cfg = {});
double supply_chain_score(double r_mat, double r_mfg, double r_work, const ParamConfig& cfg = {});
double demand_snr(double p_signal, double p_noise, const ParamConfig& cfg = {});
double partnership_score(const std::map<std::string, double>& counts_by_type, const ParamConfig& cfg = {});
double ma_score(double total_value, double n_deals, const ParamConfig& cfg = {});

/// Copies counts and direct reads into their slots; every other slot is
/// left missing. Throws Error{RangeViolation} naming the parameter.
FeatureVector extract_direct_parameters(const corpus::PatentRecord& p);

/// All 32 parameter slots; S_NeedSeed stays 0 with its mask bit set. Errors
/// from component formulas are rethrown with the parameter name prefixed.
FeatureVector build_feature_vector(const corpus::PatentRecord& p, Date eval_date,
                                   const MarketContext& ctx);

}  // namespace pp::params
