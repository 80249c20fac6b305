#include "pp/strata.hpp"

#include <algorithm>
#include <cmath>

#include <toml.hpp>

#include "pp/error.hpp"
#include "pp/text.hpp"

namespace pp::strata {

using params::Feature;

std::string_view to_string(MaturityBand b) {
  switch (b) {
    case MaturityBand::GT15: return "GT15";
    case MaturityBand::Y10to15: return "Y10to15";
    case MaturityBand::Y5to10: return "Y5to10";
    case MaturityBand::LT5: return "LT5";
  }
  return "LT5";
}

std::string_view to_string(GrowthBand b) {
  switch (b) {
    case GrowthBand::High: return "High";
    case GrowthBand::Medium: return "Medium";
    case GrowthBand::Low: return "Low";
  }
  return "Low";
}

std::string_view to_string(ProfileName n) {
  switch (n) {
    case ProfileName::AggressiveGrowth: return "AggressiveGrowth";
    case ProfileName::DefensiveMoat: return "DefensiveMoat";
    case ProfileName::QuickMonetization: return "QuickMonetization";
    case ProfileName::Custom: return "Custom";
  }
  return "Custom";
}

std::string CategoryKey::str() const {
  return cpc_prefix + "|" + std::string(to_string(maturity)) + "|" + std::string(to_string(growth));
}

CategoryKey CategoryKey::parse(std::string_view s) {
  const auto a = s.find('|');
  const auto b = a == std::string_view::npos ? a : s.find('|', a + 1);
  if (b == std::string_view::npos) fail(ErrorCode::InvalidArgument, "bad category key '" + std::string(s) + "'");
  CategoryKey k;
  k.cpc_prefix = std::string(s.substr(0, a));
  const auto m = s.substr(a + 1, b - a - 1);
  const auto g = s.substr(b + 1);
  bool ok_m = false, ok_g = false;
  for (auto band : {MaturityBand::GT15, MaturityBand::Y10to15, MaturityBand::Y5to10, MaturityBand::LT5}) {
    if (to_string(band) == m) k.maturity = band, ok_m = true;
  }
  for (auto band : {GrowthBand::High, GrowthBand::Medium, GrowthBand::Low}) {
    if (to_string(band) == g) k.growth = band, ok_g = true;
  }
  if (!ok_m || !ok_g) fail(ErrorCode::InvalidArgument, "bad category key '" + std::string(s) + "'");
  return k;
}

json to_json(const Category& c) {
  json j = {{"key", c.key.str()},
            {"cpc_prefix", c.key.cpc_prefix},
            {"maturity_band", to_string(c.key.maturity)},
            {"growth_band", to_string(c.key.growth)},
            {"members", c.members},
            {"aggregates",
             {{"mean_l_rem", c.aggregates.mean_l_rem},
              {"mean_s_trend", c.aggregates.mean_s_trend},
              {"mean_v_tam", c.aggregates.mean_v_tam},
              {"mean_cagr_tech", c.aggregates.mean_cagr_tech}}}};
  j["v_tam_scaled"] = c.v_tam_scaled ? json(*c.v_tam_scaled) : json(nullptr);
  return j;
}

Category category_from_json(const json& j) {
  Category c;
  c.key = CategoryKey::parse(j.at("key").get<std::string>());
  c.members = j.at("members").get<std::vector<std::string>>();
  const auto& a = j.at("aggregates");
  c.aggregates = {a.at("mean_l_rem").get<double>(), a.at("mean_s_trend").get<double>(),
                  a.at("mean_v_tam").get<double>(), a.at("mean_cagr_tech").get<double>()};
  if (const auto& s = j.at("v_tam_scaled"); !s.is_null()) c.v_tam_scaled = s.get<double>();
  return c;
}

MaturityBand maturity_band(double l_rem, const BandsConfig& cfg) {
  if (l_rem > cfg.gt15_years) return MaturityBand::GT15;
  if (l_rem >= cfg.y10_years) return MaturityBand::Y10to15;
  if (l_rem >= cfg.y5_years) return MaturityBand::Y5to10;
  return MaturityBand::LT5;
}

std::string cpc_prefix(std::string_view cpc_code, std::size_t depth) {
  std::string compact;
  for (char c : cpc_code) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  compact = text::to_upper(compact);
  return compact.substr(0, std::min(depth, compact.size()));
}

CategoryAggregates aggregate(const std::vector<std::string>& members, const VectorTable& vectors) {
  CategoryAggregates a;
  if (members.empty()) return a;
  for (const auto& id : members) {
    const auto& v = vectors.at(id);
    a.mean_l_rem += v[Feature::L_rem];
    a.mean_s_trend += v[Feature::S_trend];
    a.mean_v_tam += v[Feature::V_TAM];
    a.mean_cagr_tech += v[Feature::CAGR_tech];
  }
  const double n = static_cast<double>(members.size());
  a.mean_l_rem /= n;
  a.mean_s_trend /= n;
  a.mean_v_tam /= n;
  a.mean_cagr_tech /= n;
  return a;
}

std::vector<Category> categorize(const corpus::Portfolio& p, const VectorTable& vectors,
                                 const BandsConfig& cfg) {
  if (p.records.empty()) fail(ErrorCode::EmptyPortfolio, "nothing to categorize");
  for (const auto& r : p.records) {
    if (!vectors.count(r.patent_id)) {
      fail(ErrorCode::InvalidArgument, "no feature vector for " + r.patent_id);
    }
  }

  std::vector<double> trends;
  trends.reserve(p.records.size());
  for (const auto& r : p.records) trends.push_back(vectors.at(r.patent_id)[Feature::S_trend]);
  std::sort(trends.begin(), trends.end());
  const std::size_t n = trends.size();
  auto nearest_rank = [&](std::size_t num) {
    const std::size_t rank = (num * n + 2) / 3;  // ceil(num * n / 3)
    return trends[std::max<std::size_t>(rank, 1) - 1];
  };
  const double cut_low = nearest_rank(1);
  const double cut_mid = nearest_rank(2);

  std::map<CategoryKey, std::vector<std::string>> groups;
  for (const auto& r : p.records) {
    const auto& v = vectors.at(r.patent_id);
    CategoryKey key;
    key.cpc_prefix = cpc_prefix(r.primary_cpc(), cfg.cpc_depth);
    key.maturity = maturity_band(v[Feature::L_rem], cfg);
    const double s = v[Feature::S_trend];
    key.growth = s <= cut_low ? GrowthBand::Low : (s <= cut_mid ? GrowthBand::Medium : GrowthBand::High);
    groups[key].push_back(r.patent_id);
  }

  std::vector<Category> out;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end());
    Category c;
    c.key = key;
    c.members = std::move(members);
    c.aggregates = aggregate(c.members, vectors);
    out.push_back(std::move(c));
  }
  scale_market_size(out);
  return out;
}

void scale_market_size(std::vector<Category>& categories) {
  if (categories.empty()) return;
  const auto [lo, hi] = std::minmax_element(
      categories.begin(), categories.end(),
      [](const Category& a, const Category& b) { return a.aggregates.mean_v_tam < b.aggregates.mean_v_tam; });
  const double min = lo->aggregates.mean_v_tam;
  const double max = hi->aggregates.mean_v_tam;
  for (auto& c : categories) {
    c.v_tam_scaled = max > min ? (c.aggregates.mean_v_tam - min) / (max - min) : 1.0;
  }
}

void WeightingProfile::validate() const {
  double sum = 0.0;
  for (double w : category_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::WeightsNotNormalized, "category weights must be finite and >= 0");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::WeightsNotNormalized, "category weights must sum to 1");
  for (double m : multipliers) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      fail(ErrorCode::InvalidArgument, "feature multipliers must be finite and >= 0");
    }
  }
}

json to_json(const WeightingProfile& p) {
  json mult = json::object();
  for (std::size_t i = 0; i < params::kFeatureCount; ++i) {
    if (p.multipliers[i] != 1.0) mult[std::string(params::kFeatureNames[i])] = p.multipliers[i];
  }
  return {{"name", to_string(p.name)},
          {"label", p.label},
          {"category_weights", p.category_weights},
          {"feature_multipliers", mult}};
}

WeightingProfile make_profile(ProfileName name, std::string label, std::array<double, 4> weights,
                              const std::map<std::string, double>& multipliers) {
  WeightingProfile p;
  p.name = name;
  p.label = std::move(label);
  p.category_weights = weights;
  for (const auto& [feature, m] : multipliers) p.multipliers[params::feature_index(feature)] = m;
  p.validate();
  return p;
}

ProfileSet builtin_profiles() {
  constexpr double kBoost = 2.0;
  ProfileSet set;
  set.by_label["AggressiveGrowth"] =
      make_profile(ProfileName::AggressiveGrowth, "AggressiveGrowth", {0.10, 0.35, 0.20, 0.35},
                   {{"V_cite", kBoost}, {"CAGR_tech", kBoost}, {"S_trend", kBoost}});
  set.by_label["DefensiveMoat"] =
      make_profile(ProfileName::DefensiveMoat, "DefensiveMoat", {0.50, 0.15, 0.20, 0.15},
                   {{"S_claim", kBoost}, {"N_bcite", kBoost}, {"S_litigation", kBoost}});
  set.by_label["QuickMonetization"] =
      make_profile(ProfileName::QuickMonetization, "QuickMonetization", {0.20, 0.20, 0.40, 0.20},
                   {{"TRL", kBoost}, {"MRL", kBoost}, {"S_sc", kBoost}, {"S_demand", kBoost}});
  set.by_label["Custom"] = make_profile(ProfileName::Custom, "Custom", {0.25, 0.25, 0.25, 0.25}, {});
  return set;
}

ProfileSet profiles_from_toml(std::string_view toml_text) {
  toml::table t;
  try {
    t = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    fail(ErrorCode::Config, std::string("profiles config: ") + std::string(e.description()));
  }
  ProfileSet set = builtin_profiles();
  const auto* profiles = t["profiles"].as_table();
  if (!profiles) return set;
  for (const auto& [label_key, node] : *profiles) {
    const std::string label(label_key.str());
    const auto* tbl = node.as_table();
    if (!tbl) fail(ErrorCode::Config, "profile '" + label + "' must be a table");
    ProfileName name = ProfileName::Custom;
    for (auto n : {ProfileName::AggressiveGrowth, ProfileName::DefensiveMoat, ProfileName::QuickMonetization}) {
      if (to_string(n) == label) name = n;
    }
    std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
    if (const auto* arr = (*tbl)["category_weights"].as_array()) {
      if (arr->size() != 4) fail(ErrorCode::Config, "profile '" + label + "': need 4 category weights");
      for (std::size_t i = 0; i < 4; ++i) {
        const auto w = (*arr)[i].value<double>();
        if (!w) fail(ErrorCode::Config, "profile '" + label + "': category weights must be numbers");
        weights[i] = *w;
      }
    }
    std::map<std::string, double> mult;
    if (const auto* m = (*tbl)["feature_multipliers"].as_table()) {
      for (const auto& [k, v] : *m) {
        const auto x = v.value<double>();
        if (!x) fail(ErrorCode::Config, "profile '" + label + "': multipliers must be numbers");
        mult[std::string(k.str())] = *x;
      }
    }
    set.by_label[label] = make_profile(name, label, weights, mult);
  }
  return set;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  return profiles_from_toml(read_text_file(path));
}

WeightingProfile resolve_profile(std::string_view label, const ProfileSet& set) {
  const auto it = set.by_label.find(std::string(label));
  if (it == set.by_label.end()) fail(ErrorCode::UnknownProfile, "unknown profile '" + std::string(label) + "'");
  return it->second;
}

WeightingProfile custom_profile(std::array<double, 4> weights,
                                const std::map<std::string, double>& multipliers) {
  return make_profile(ProfileName::Custom, "Custom", weights, multipliers);
}

double category_score(const Category& c, const WeightingProfile& profile) {
  if (!c.v_tam_scaled) {
    fail(ErrorCode::UnscaledInput, "category " + c.key.str() + " has unscaled market size");
  }
  profile.validate();
  const auto& w = profile.category_weights;
  return w[0] * c.aggregates.mean_l_rem + w[1] * c.aggregates.mean_s_trend + w[2] * *c.v_tam_scaled +
         w[3] * c.aggregates.mean_cagr_tech;
}

params::FeatureVector apply_profile(const params::FeatureVector& v, const WeightingProfile& profile) {
  params::FeatureVector out = v;
  for (std::size_t i = 0; i < params::kFeatureCount; ++i) out.values[i] = v.values[i] * profile.multipliers[i];
  return out;
}

}  // namespace pp::strata
