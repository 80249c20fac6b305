#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pp/corpus.hpp"
#include "pp/io.hpp"
#include "pp/params.hpp"

namespace pp::strata {

enum class MaturityBand { GT15, Y10to15, Y5to10, LT5 };
enum class GrowthBand { High, Medium, Low };

std::string_view to_string(MaturityBand b);
std::string_view to_string(GrowthBand b);

struct CategoryKey {
  std::string cpc_prefix;
  MaturityBand maturity = MaturityBand::LT5;
  GrowthBand growth = GrowthBand::Low;

  /// "G11C|GT15|High"; doubles as the LTR query id.
  std::string str() const;
  static CategoryKey parse(std::string_view s);

  friend auto operator<=>(const CategoryKey&, const CategoryKey&) = default;
};

struct CategoryAggregates {
  double mean_l_rem = 0.0;
  double mean_s_trend = 0.0;
  double mean_v_tam = 0.0;
  double mean_cagr_tech = 0.0;
};

struct Category {
  CategoryKey key;
  std::vector<std::string> members;  // sorted patent ids
  CategoryAggregates aggregates;
  /// Mean V_TAM after min-max scaling across the category table; unset
  /// until scale_market_size() runs.
  std::optional<double> v_tam_scaled;
};

json to_json(const Category& c);
Category category_from_json(const json& j);

struct BandsConfig {
  std::size_t cpc_depth = 4;
  double gt15_years = 15.0;
  double y10_years = 10.0;
  double y5_years = 5.0;
};

using VectorTable = std::map<std::string, params::FeatureVector>;

MaturityBand maturity_band(double l_rem, const BandsConfig& cfg = {});
std::string cpc_prefix(std::string_view cpc_code, std::size_t depth);

/// Partition by (CPC prefix, maturity band, growth tertile), ordered by key.
/// Growth tertile cut points are the nearest-rank 1/3 and 2/3 quantiles of
/// S_trend over the portfolio; a value at or below the first cut is Low, at
/// or below the second Medium, otherwise High. Aggregates come out already
/// market-size scaled.
std::vector<Category> categorize(const corpus::Portfolio& p, const VectorTable& vectors,
                                 const BandsConfig& cfg = {});

CategoryAggregates aggregate(const std::vector<std::string>& members, const VectorTable& vectors);

/// Min-max scales mean V_TAM across categories into v_tam_scaled. A
/// degenerate range (single category, or all equal) scales to 1.
void scale_market_size(std::vector<Category>& categories);

enum class ProfileName { AggressiveGrowth, DefensiveMoat, QuickMonetization, Custom };

std::string_view to_string(ProfileName n);

struct WeightingProfile {
  ProfileName name = ProfileName::Custom;
  std::string label;
  std::array<double, 4> category_weights{0.25, 0.25, 0.25, 0.25};
  std::array<double, params::kFeatureCount> multipliers{};

  WeightingProfile() { multipliers.fill(1.0); }

  double multiplier(params::Feature f) const { return multipliers[params::index(f)]; }
  /// Throws Error{WeightsNotNormalized} or Error{InvalidArgument}.
  void validate() const;
};

json to_json(const WeightingProfile& p);

/// Category weights plus any multipliers differing from 1.
WeightingProfile make_profile(ProfileName name, std::string label, std::array<double, 4> weights,
                              const std::map<std::string, double>& multipliers);

struct ProfileSet {
  std::map<std::string, WeightingProfile> by_label;
};

ProfileSet builtin_profiles();
/// TOML with one `[profiles.<label>]` table per profile carrying
/// `category_weights = [w1, w2, w3, w4]` and an optional
/// `[profiles.<label>.feature_multipliers]` table. Built-ins not mentioned
/// keep their defaults.
ProfileSet load_profiles(const std::filesystem::path& path);
ProfileSet profiles_from_toml(std::string_view toml_text);

/// Throws Error{UnknownProfile}.
WeightingProfile resolve_profile(std::string_view label, const ProfileSet& set = builtin_profiles());
WeightingProfile custom_profile(std::array<double, 4> weights,
                                const std::map<std::string, double>& multipliers);

/// Weighted sum over the four category aggregates. Throws
/// Error{UnscaledInput} when scale_market_size() has not run.
double category_score(const Category& c, const WeightingProfile& profile);

params::FeatureVector apply_profile(const params::FeatureVector& v, const WeightingProfile& profile);

}  // namespace pp::strata
