#include "pp/nexus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "pp/error.hpp"

namespace pp::nexus {

using params::Feature;

json to_json(const NexusConfig& c) {
  return {{"alpha", c.alpha},
          {"beta", c.beta},
          {"threshold", c.threshold},
          {"candidates_per_seed", c.candidates_per_seed}};
}

text::TermStats relevance_stats(const std::vector<claims::SeedProfile>& seeds, const needgraph::NeedGraph& g) {
  text::TermStats stats;
  for (const auto& s : seeds) stats.add_document(s.key_terms);
  for (const auto& n : g.nodes) stats.add_document(n.key_terms);
  return stats;
}

double relevance(const std::vector<std::string>& seed_terms, const std::vector<std::string>& need_terms,
                 const text::TermStats& stats) {
  if (seed_terms.empty() || need_terms.empty()) fail(ErrorCode::EmptyText, "relevance needs terms on both sides");
  return text::cosine(stats.tfidf(seed_terms), stats.tfidf(need_terms));
}

double need_seed_score(double s_demand_norm, double s_relevance, double s_authority, double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || std::abs(alpha + beta - 1.0) > 1e-9) {
    fail(ErrorCode::WeightsNotNormalized, "alpha and beta must be >= 0 and sum to 1");
  }
  for (double x : {s_demand_norm, s_relevance, s_authority}) {
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InputOutOfRange, "need-seed inputs must lie in [0,1]");
  }
  return s_demand_norm * (alpha * s_relevance + beta * s_authority);
}

int fit_score(double s_needseed) {
  return static_cast<int>(std::lround(100.0 * std::clamp(s_needseed, 0.0, 1.0)));
}

std::map<std::string, double> demand_norm(const needgraph::NeedGraph& g) {
  std::map<std::string, double> out;
  if (g.nodes.empty()) return out;
  double lo = g.nodes.front().demand_db, hi = lo;
  for (const auto& n : g.nodes) {
    lo = std::min(lo, n.demand_db);
    hi = std::max(hi, n.demand_db);
  }
  for (const auto& n : g.nodes) out[n.need_id] = hi > lo ? (n.demand_db - lo) / (hi - lo) : 1.0;
  return out;
}

json to_json(const MatchCandidate& m) {
  return {{"match_id", m.match_id()},       {"patent_id", m.patent_id},   {"need_id", m.need_id},
          {"s_relevance", m.s_relevance},   {"s_authority", m.s_authority}, {"s_demand_norm", m.s_demand_norm},
          {"s_needseed", m.s_needseed},     {"fit_score", m.fit_score}};
}

MatchCandidate match_from_json(const json& j) {
  MatchCandidate m;
  m.patent_id = j.at("patent_id").get<std::string>();
  m.need_id = j.at("need_id").get<std::string>();
  m.s_relevance = j.at("s_relevance").get<double>();
  m.s_authority = j.at("s_authority").get<double>();
  m.s_demand_norm = j.at("s_demand_norm").get<double>();
  m.s_needseed = j.at("s_needseed").get<double>();
  m.fit_score = j.at("fit_score").get<int>();
  return m;
}

std::vector<MatchCandidate> match_portfolio(const std::vector<claims::SeedProfile>& seeds,
                                            const needgraph::NeedGraph& g, const NexusConfig& cfg) {
  if (g.nodes.empty()) fail(ErrorCode::EmptyGraph, "need graph has no nodes");
  const auto stats = relevance_stats(seeds, g);
  const auto demand = demand_norm(g);
  std::vector<MatchCandidate> out;
  for (const auto& seed : seeds) {
    if (seed.key_terms.empty()) continue;
    for (const auto& hit : needgraph::query_needs(g, seed.key_terms, cfg.candidates_per_seed)) {
      const auto* node = g.find(hit.need_id);
      MatchCandidate m;
      m.patent_id = seed.patent_id;
      m.need_id = node->need_id;
      m.s_relevance = relevance(seed.key_terms, node->key_terms, stats);
      m.s_authority = node->authority;
      m.s_demand_norm = demand.at(node->need_id);
      m.s_needseed = need_seed_score(m.s_demand_norm, m.s_relevance, m.s_authority, cfg.alpha, cfg.beta);
      m.fit_score = fit_score(m.s_needseed);
      if (m.s_needseed >= cfg.threshold) out.push_back(std::move(m));
    }
  }
  std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
    if (a.fit_score != b.fit_score) return a.fit_score > b.fit_score;
    if (a.patent_id != b.patent_id) return a.patent_id < b.patent_id;
    return a.need_id < b.need_id;
  });
  return out;
}

json to_json(const Cluster& c) {
  json matches = json::array();
  for (const auto& m : c.matches) matches.push_back(to_json(m));
  return {{"cluster_id", c.cluster_id}, {"need_id", c.need_id}, {"members", c.members}, {"matches", matches}};
}

Cluster cluster_from_json(const json& j) {
  Cluster c;
  c.cluster_id = j.at("cluster_id").get<std::string>();
  c.need_id = j.at("need_id").get<std::string>();
  c.members = j.at("members").get<std::vector<std::string>>();
  for (const auto& m : j.at("matches")) c.matches.push_back(match_from_json(m));
  return c;
}

std::vector<Cluster> cluster_matches(const std::vector<MatchCandidate>& matches) {
  std::map<std::string, Cluster> by_need;
  std::set<std::string> placed;
  for (const auto& m : matches) {
    if (!placed.insert(m.patent_id).second) continue;
    auto& c = by_need[m.need_id];
    c.need_id = m.need_id;
    c.cluster_id = "C-" + m.need_id;
    c.members.push_back(m.patent_id);
    c.matches.push_back(m);
  }
  std::vector<Cluster> out;
  for (auto& [id, c] : by_need) {
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    const int fa = a.matches.front().fit_score, fb = b.matches.front().fit_score;
    return fa != fb ? fa > fb : a.need_id < b.need_id;
  });
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string usd(double v) {
  std::string digits = fixed(v, 0);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && digits[i - 1] != '-' && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return "USD " + out;
}

}  // namespace

json generate_report(const Cluster& c, const ReportContext& ctx) {
  if (c.members.empty() || c.matches.empty()) fail(ErrorCode::InvalidArgument, "empty cluster");
  const auto* node = ctx.graph ? ctx.graph->find(c.need_id) : nullptr;
  if (!node) fail(ErrorCode::InvalidArgument, "cluster need " + c.need_id + " not in graph");

  std::map<std::string, std::pair<std::size_t, double>> rank_of;
  if (ctx.ranking) {
    for (std::size_t i = 0; i < ctx.ranking->size(); ++i) {
      rank_of[(*ctx.ranking)[i].patent_id] = {i + 1, (*ctx.ranking)[i].score};
    }
  }
  std::vector<std::string> ordered = c.members;
  std::stable_sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
    const auto ra = rank_of.count(a) ? rank_of[a].first : SIZE_MAX;
    const auto rb = rank_of.count(b) ? rank_of[b].first : SIZE_MAX;
    return ra < rb;
  });
  const std::string& lead = ordered.front();
  const MatchCandidate* lead_match = &c.matches.front();
  for (const auto& m : c.matches) {
    if (m.patent_id == lead) lead_match = &m;
  }
  const corpus::PatentRecord* lead_record = ctx.portfolio ? ctx.portfolio->find(lead) : nullptr;

  // Seed asset
  json titles = json::array();
  for (const auto& id : ordered) {
    const auto* r = ctx.portfolio ? ctx.portfolio->find(id) : nullptr;
    titles.push_back(r ? json(r->title) : json(kInsufficientData));
  }
  json seed_asset = {{"patent_ids", ordered}, {"titles", titles}, {"lead_patent", lead}, {"count", ordered.size()}};
  const claims::SeedProfile* lead_seed = nullptr;
  if (ctx.seeds) {
    const auto it = ctx.seeds->find(lead);
    if (it != ctx.seeds->end()) lead_seed = &it->second;
  }
  seed_asset["summary"] = lead_seed ? json(lead_seed->solution_summary) : json(kInsufficientData);
  seed_asset["problem_statement"] = lead_seed && !lead_seed->problem_statement.empty()
                                        ? json(lead_seed->problem_statement)
                                        : json(kInsufficientData);

  // Target match
  const auto& quote = node->strongest_support();
  json target = {{"entity", node->entity},
                 {"need_id", node->need_id},
                 {"need_description", node->description},
                 {"authority", node->authority},
                 {"demand_db", node->demand_db},
                 {"source_quote",
                  {{"doc_id", quote.source_doc},
                   {"source_type", needgraph::to_string(quote.source_type)},
                   {"date", quote.observed_date.iso()},
                   {"quote", quote.quote}}}};

  // Scoring
  json members = json::array();
  for (const auto& id : ordered) {
    json row = {{"patent_id", id}};
    if (rank_of.count(id)) {
      row["ltr_rank"] = rank_of[id].first;
      row["s_pat"] = rank_of[id].second;
    } else {
      row["ltr_rank"] = kInsufficientData;
      row["s_pat"] = kInsufficientData;
    }
    for (const auto& m : c.matches) {
      if (m.patent_id == id) row["fit_score"] = m.fit_score;
    }
    members.push_back(row);
  }
  json scoring = {{"fit_score", lead_match->fit_score},
                  {"s_needseed", lead_match->s_needseed},
                  {"s_relevance", lead_match->s_relevance},
                  {"s_authority", lead_match->s_authority},
                  {"s_demand_norm", lead_match->s_demand_norm},
                  {"alpha", ctx.nexus.alpha},
                  {"beta", ctx.nexus.beta},
                  {"members", members}};
  if (rank_of.count(lead)) {
    scoring["ltr_rank"] = rank_of[lead].first;
    scoring["s_pat"] = rank_of[lead].second;
  } else {
    scoring["ltr_rank"] = kInsufficientData;
    scoring["s_pat"] = kInsufficientData;
  }
  scoring["param_coefficients"] = ctx.params ? params::to_json(*ctx.params) : json(kInsufficientData);

  // Opportunity size
  json opportunity = {{"usd", kInsufficientData}, {"basis", kInsufficientData}};
  if (lead_record && ctx.market) {
    const auto prefix = ctx.market->matching_prefix(lead_record->primary_cpc());
    const auto* entry = ctx.market->lookup(lead_record->primary_cpc());
    if (entry && entry->tam_usd) {
      opportunity["usd"] = *entry->tam_usd;
      opportunity["basis"] = "total addressable market for CPC " + *prefix;
      if (entry->revenue_usd) opportunity["revenue_usd"] = *entry->revenue_usd;
    }
  }

  // Risk profile
  json risks = json::array();
  std::set<std::string> codes;
  int short_life = 0;
  std::map<std::string, int> missing_counts;
  for (const auto& id : ordered) {
    if (ctx.seeds) {
      const auto it = ctx.seeds->find(id);
      if (it != ctx.seeds->end()) {
        if (it->second.breadth_score < 0.4) {
          risks.push_back({{"code", "NarrowClaims"}, {"patent_id", id}, {"parameter", "breadth_score"},
                           {"value", it->second.breadth_score},
                           {"detail", "independent claim breadth " + fixed(it->second.breadth_score, 2) + " < 0.40"}});
          codes.insert("NarrowClaims");
        }
        if (it->second.design_around_score > 0.7) {
          risks.push_back({{"code", "DesignAroundRisk"}, {"patent_id", id}, {"parameter", "design_around_score"},
                           {"value", it->second.design_around_score},
                           {"detail", "design-around score " + fixed(it->second.design_around_score, 2) + " > 0.70"}});
          codes.insert("DesignAroundRisk");
        }
      }
    }
    if (ctx.vectors) {
      const auto it = ctx.vectors->find(id);
      if (it == ctx.vectors->end()) continue;
      const auto& v = it->second;
      if (!v.missing(Feature::L_rem) && v[Feature::L_rem] < 5.0) {
        risks.push_back({{"code", "ShortRemainingLife"}, {"patent_id", id}, {"parameter", "L_rem"},
                         {"value", v[Feature::L_rem]},
                         {"detail", "remaining life " + fixed(v[Feature::L_rem], 1) + " years < 5"}});
        codes.insert("ShortRemainingLife");
        ++short_life;
      }
      if (!v.missing(Feature::N_comp) && v[Feature::N_comp] >= 10.0) {
        risks.push_back({{"code", "CrowdedField"}, {"patent_id", id}, {"parameter", "N_comp"},
                         {"value", v[Feature::N_comp]},
                         {"detail", fixed(v[Feature::N_comp], 0) + " competing patents in the field"}});
        codes.insert("CrowdedField");
      }
      for (std::size_t i = 0; i < params::kFeatureCount; ++i) {
        if (v.missing_mask[i] && params::kFeatureNames[i] != "S_NeedSeed") {
          missing_counts[std::string(params::kFeatureNames[i])] += 1;
        }
      }
    }
  }
  for (const auto& [name, count] : missing_counts) {
    risks.push_back({{"code", "MissingData"}, {"parameter", name}, {"value", count},
                     {"detail", name + " missing for " + std::to_string(count) + " of " +
                                    std::to_string(ordered.size()) + " patents"}});
  }
  const std::size_t n_codes = codes.size();
  const std::string level = n_codes == 0 ? "Low" : (n_codes <= 2 ? "Medium" : "High");
  json risk_profile = {{"level", level}, {"risks", risks}};

  // Strategic actions
  json actions = json::array();
  const int fit = lead_match->fit_score;
  if (fit >= 90 && node->authority >= 0.9) {
    actions.push_back("Open a licensing negotiation with " + node->entity + " covering the assets matched to '" +
                      node->description + "'.");
  } else if (fit >= 70) {
    actions.push_back("Hold a technical briefing with " + node->entity +
                      " to confirm the fit before putting a price on the assets.");
  }
  if (ordered.size() > 1) {
    actions.push_back("Offer the " + std::to_string(ordered.size()) +
                      " matched patents as a single package rather than one by one.");
  }
  if (short_life > 0) {
    actions.push_back("Favour a near-term sale: " + std::to_string(short_life) +
                      " of the assets have under five years of life left.");
  }
  if (codes.count("DesignAroundRisk")) {
    actions.push_back("Bundle implementation know-how with the patents to offset design-around exposure.");
  }
  if (actions.empty()) actions.push_back("Keep the assets under watch and revisit them at the next portfolio review.");

  return {{"cluster_id", c.cluster_id},
          {"seed_asset", seed_asset},
          {"target_match", target},
          {"scoring", scoring},
          {"opportunity_size", opportunity},
          {"risk_profile", risk_profile},
          {"strategic_actions", actions}};
}

std::string render_report(const json& r) {
  std::ostringstream os;
  auto str = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fixed(v.get<double>(), 3);
    return v.dump();
  };
  const auto& seed = r.at("seed_asset");
  const auto& target = r.at("target_match");
  const auto& scoring = r.at("scoring");
  const auto& opp = r.at("opportunity_size");
  const auto& risk = r.at("risk_profile");

  os << "Core ontology report " << r.at("cluster_id").get<std::string>() << "\n\n";
  os << "Seed asset\n";
  os << "  patents: " << seed.at("count").get<std::size_t>() << " (lead " << str(seed.at("lead_patent")) << ")\n";
  for (std::size_t i = 0; i < seed.at("patent_ids").size(); ++i) {
    os << "    " << str(seed.at("patent_ids")[i]) << "  " << str(seed.at("titles")[i]) << "\n";
  }
  os << "  summary: " << str(seed.at("summary")) << "\n";
  os << "  problem: " << str(seed.at("problem_statement")) << "\n\n";
  os << "Target match\n";
  os << "  entity: " << str(target.at("entity")) << "\n";
  os << "  need:   " << str(target.at("need_description")) << " [" << str(target.at("need_id")) << "]\n";
  const auto& q = target.at("source_quote");
  os << "  source: " << str(q.at("doc_id")) << " (" << str(q.at("source_type")) << ", " << str(q.at("date"))
     << ")\n";
  os << "  quote:  \"" << str(q.at("quote")) << "\"\n\n";
  os << "Scoring\n";
  os << "  fit score: " << scoring.at("fit_score").get<int>() << "/100\n";
  os << "  LTR rank:  " << str(scoring.at("ltr_rank")) << ", S_pat " << str(scoring.at("s_pat")) << "\n";
  os << "  S_NeedSeed " << str(scoring.at("s_needseed")) << " = demand " << str(scoring.at("s_demand_norm"))
     << " x (" << str(scoring.at("alpha")) << " x relevance " << str(scoring.at("s_relevance")) << " + "
     << str(scoring.at("beta")) << " x authority " << str(scoring.at("s_authority")) << ")\n\n";
  os << "Opportunity size\n  ";
  if (opp.at("usd").is_number()) {
    os << usd(opp.at("usd").get<double>()) << " (" << str(opp.at("basis")) << ")\n\n";
  } else {
    os << kInsufficientData << "\n\n";
  }
  os << "Risk profile: " << str(risk.at("level")) << "\n";
  if (risk.at("risks").empty()) os << "  no flagged risks\n";
  for (const auto& x : risk.at("risks")) {
    os << "  - " << str(x.at("code"));
    if (x.contains("patent_id")) os << " " << str(x.at("patent_id"));
    os << ": " << str(x.at("detail")) << "\n";
  }
  os << "\nStrategic actions\n";
  int i = 1;
  for (const auto& a : r.at("strategic_actions")) os << "  " << i++ << ". " << str(a) << "\n";
  return os.str();
}

}  // namespace pp::nexus
