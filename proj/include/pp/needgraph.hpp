#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pp/corpus.hpp"
#include "pp/date.hpp"
#include "pp/io.hpp"
#include "pp/params.hpp"

namespace pp::needgraph {

enum class Relation { Seeks, Needs, InvestingIn, StrugglesWith, ConstrainedBy };
enum class SourceType { RegulatoryFiling, EarningsCall, MarketReport, News, Blog };

std::string_view to_string(Relation r);
std::string_view to_string(SourceType s);
Relation relation_from_string(std::string_view s);
/// Throws Error{UnknownSourceType}.
SourceType source_type_from_string(std::string_view s);

struct Document {
  std::string doc_id;
  SourceType source_type = SourceType::News;
  Date date;
  std::string text;
};

/// Throws Error{EmptyText}, Error{UnknownSourceType}, Error{MalformedRecord}.
Document document_from_json(const json& j);
std::vector<Document> load_documents(const std::filesystem::path& path);

struct Pattern {
  Relation relation = Relation::Needs;
  std::string trigger;  // lowercase, e.g. "is struggling with"
};

/// Lines look like `StrugglesWith: <ENT> is struggling with <PHRASE>`;
/// blank lines and `#` comments are skipped. Throws Error{Config}.
std::vector<Pattern> parse_patterns(const std::vector<std::string>& lines);
std::vector<Pattern> load_patterns(const std::filesystem::path& path);
std::vector<Pattern> default_patterns();

struct EntityResolver {
  corpus::EntityAliasTable aliases;
  std::vector<std::string> suffixes = corpus::default_legal_suffixes();
};

struct Triple {
  std::string subject;
  Relation relation = Relation::Needs;
  std::string object;
  std::string source_doc;
  SourceType source_type = SourceType::News;
  Date observed_date;
  std::string quote;  // sentence the triple came from
  int urgency = 0;    // urgency-lexicon hits in that sentence
};

json to_json(const Triple& t);
Triple triple_from_json(const json& j);

std::vector<std::string> split_sentences(std::string_view text);

/// Left-to-right, non-overlapping; at one position the longest trigger wins.
/// The subject is the capitalized word run just before the trigger,
/// resolved through the alias table (longest matching tail first).
std::vector<Triple> extract_triples(const Document& doc, const std::vector<Pattern>& patterns,
                                    const EntityResolver& resolver);

struct AuthorityTable {
  std::map<SourceType, double> by_type = {{SourceType::RegulatoryFiling, 1.0},
                                         {SourceType::EarningsCall, 0.9},
                                         {SourceType::MarketReport, 0.7},
                                         {SourceType::News, 0.5},
                                         {SourceType::Blog, 0.4}};
};

double authority_of(SourceType s, const AuthorityTable& table = {});
/// Accepts the source type by name. Throws Error{UnknownSourceType}.
double authority_of(std::string_view source_type, const AuthorityTable& table = {});

struct GraphConfig {
  Date window_end{2024, 1, 1};
  double window_days = 365.0;
  /// Expected mentions per window for a need nobody is pushing.
  double baseline_mentions = 1.0;
  double merge_jaccard = 0.6;
  AuthorityTable authority;
  params::ParamConfig params;
};

struct NeedNode {
  std::string need_id;
  std::string entity;
  std::string description;
  std::vector<Triple> supporting_triples;
  double authority = 0.0;
  double demand_db = 0.0;
  int mentions_in_window = 0;
  Date first_seen;
  Date last_seen;
  std::vector<std::string> key_terms;

  /// Triple with the highest authority, earliest first on ties.
  const Triple& strongest_support() const;
};

json to_json(const NeedNode& n);
NeedNode need_from_json(const json& j);

struct NeedGraph {
  std::vector<NeedNode> nodes;
  const NeedNode* find(std::string_view need_id) const;
};

json to_json(const NeedGraph& g);
NeedGraph graph_from_json(const json& j);

/// Triples are ordered by (subject, date, doc, object, quote) and each joins
/// the first node of the same entity whose founding phrase has content-token
/// Jaccard >= merge_jaccard with its own; otherwise it founds a new node.
/// Node ids follow creation order.
NeedGraph build_graph(std::vector<Triple> triples, const GraphConfig& cfg);

struct NeedHit {
  std::string need_id;
  double score = 0.0;
};

/// Jaccard between key_terms and each node's key_terms; zero scores are
/// left out; descending, ties by need_id; at most `limit` hits.
std::vector<NeedHit> query_needs(const NeedGraph& g, const std::vector<std::string>& key_terms,
                                 std::size_t limit = 10);

}  // namespace pp::needgraph
