#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pp/claims.hpp"
#include "pp/corpus.hpp"
#include "pp/io.hpp"
#include "pp/ltr.hpp"
#include "pp/needgraph.hpp"
#include "pp/params.hpp"
#include "pp/strata.hpp"
#include "pp/text.hpp"

namespace pp::nexus {

struct NexusConfig {
  double alpha = 0.7;
  double beta = 0.3;
  double threshold = 0.5;
  std::size_t candidates_per_seed = 10;
};

json to_json(const NexusConfig& c);

/// IDF statistics over every seed's and every need's key terms.
text::TermStats relevance_stats(const std::vector<claims::SeedProfile>& seeds, const needgraph::NeedGraph& g);

/// Cosine of TF-IDF vectors. Throws Error{EmptyText} if either side is empty.
double relevance(const std::vector<std::string>& seed_terms, const std::vector<std::string>& need_terms,
                 const text::TermStats& stats);

/// s_demand_norm * (alpha * s_relevance + beta * s_authority). Throws
/// Error{WeightsNotNormalized} or Error{InputOutOfRange}.
double need_seed_score(double s_demand_norm, double s_relevance, double s_authority, double alpha, double beta);
int fit_score(double s_needseed);

/// Min-max scaled demand_db per need id; degenerate range scales to 1.
std::map<std::string, double> demand_norm(const needgraph::NeedGraph& g);

struct MatchCandidate {
  std::string patent_id;
  std::string need_id;
  double s_relevance = 0.0;
  double s_authority = 0.0;
  double s_demand_norm = 0.0;
  double s_needseed = 0.0;
  int fit_score = 0;

  std::string match_id() const { return patent_id + "->" + need_id; }
};

json to_json(const MatchCandidate& m);
MatchCandidate match_from_json(const json& j);

/// Ordered by fit desc, then patent id, then need id. Throws Error{EmptyGraph}.
std::vector<MatchCandidate> match_portfolio(const std::vector<claims::SeedProfile>& seeds,
                                            const needgraph::NeedGraph& g, const NexusConfig& cfg = {});

struct Cluster {
  std::string cluster_id;  // "C-" + need id
  std::string need_id;
  std::vector<std::string> members;  // sorted
  std::vector<MatchCandidate> matches;  // each member's best match to this need
};

json to_json(const Cluster& c);
Cluster cluster_from_json(const json& j);

/// Each patent joins the cluster of its best-fitting need. Clusters are
/// ordered by best fit desc, then need id.
std::vector<Cluster> cluster_matches(const std::vector<MatchCandidate>& matches);

struct ReportContext {
  const corpus::Portfolio* portfolio = nullptr;
  const std::map<std::string, claims::SeedProfile>* seeds = nullptr;
  const needgraph::NeedGraph* graph = nullptr;
  const strata::VectorTable* vectors = nullptr;
  const std::vector<ltr::Scored>* ranking = nullptr;
  const params::MarketData* market = nullptr;
  const params::ParamConfig* params = nullptr;
  NexusConfig nexus;
};

inline constexpr const char* kInsufficientData = "insufficient data";

/// Every field is populated; values that cannot be derived read
/// "insufficient data".
json generate_report(const Cluster& c, const ReportContext& ctx);
std::string render_report(const json& report);

}  // namespace pp::nexus
