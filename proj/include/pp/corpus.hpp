#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pp/date.hpp"
#include "pp/io.hpp"

namespace pp::corpus {

enum class LegalStatus { Granted, Pending, Expired, Abandoned, Lapsed, Invalidated };
enum class JurisdictionStatus { Granted, Pending };
enum class LitigationOutcome { PlaintiffWin, Settlement, DefendantWin };

std::string_view to_string(LegalStatus s);
std::string_view to_string(JurisdictionStatus s);
std::string_view to_string(LitigationOutcome o);

struct ClaimText {
  int number = 0;
  std::string text;
};

/// Track-record inputs for the inventor score travel with the inventor.
struct InventorRef {
  std::string name;
  std::string name_canonical;
  std::optional<double> h_index;
  std::optional<double> collaborations;
  std::optional<double> litigation_success;
};

struct Jurisdiction {
  std::string country;  // ISO-3166 alpha-3
  JurisdictionStatus status = JurisdictionStatus::Granted;
};

struct ForwardCitation {
  std::string citing_id;
  Date date;
};

struct Reassignment {
  Date date;
  std::string from;
  std::string to;
};

struct LitigationEvent {
  LitigationOutcome outcome = LitigationOutcome::Settlement;
  double case_value = 0.0;  // USD
};

struct RejectionCounts {
  int n102 = 0;
  int n103 = 0;
  int n112 = 0;
};

struct PatentRecord {
  std::string patent_id;
  std::string title;
  std::string abstract;
  std::string description;
  std::vector<ClaimText> claims;
  Date filing_date;
  std::optional<Date> grant_date;  // absent for pending applications
  Date expiry_date;
  LegalStatus legal_status = LegalStatus::Granted;
  std::string assignee_raw;
  std::string assignee_canonical;
  std::vector<InventorRef> inventors;
  std::vector<std::string> cpc_codes;
  std::vector<std::string> family_members;
  std::vector<Jurisdiction> jurisdictions;
  std::vector<ForwardCitation> forward_citations;
  std::vector<std::string> backward_citations;
  std::vector<std::string> examiner_citations;
  std::vector<Reassignment> reassignments;
  std::vector<LitigationEvent> litigation_events;
  RejectionCounts rejections;
  bool cip_flag = false;
  std::map<std::string, double> direct_metrics;
  /// Optional input fields that were absent (sorted). Carried to the report's
  /// risk profile and to the feature mask.
  std::vector<std::string> missing_fields;

  bool is_missing(std::string_view field) const;
  std::string primary_cpc() const { return cpc_codes.empty() ? std::string{} : cpc_codes.front(); }
};

json to_json(const PatentRecord& r);
/// Throws Error{MalformedRecord} naming the offending field.
PatentRecord record_from_json(const json& j);

struct Portfolio {
  std::vector<PatentRecord> records;
  Date evaluation_date;
  std::string provenance;  // sha256 of the source file

  const PatentRecord* find(std::string_view patent_id) const;
};

json to_json(const Portfolio& p);
Portfolio portfolio_from_json(const json& j);

struct RejectedLine {
  std::size_t line = 0;
  std::string reason;
};

enum class IngestMode {
  Strict,   // any malformed line fails the ingest
  Lenient,  // malformed lines are skipped and reported
};

struct IngestResult {
  Portfolio portfolio;
  std::vector<RejectedLine> rejected;
};

IngestResult ingest_portfolio(const std::filesystem::path& path, Date evaluation_date,
                              IngestMode mode = IngestMode::Strict);
IngestResult ingest_portfolio_text(std::string_view jsonl, Date evaluation_date,
                                   IngestMode mode = IngestMode::Strict);

struct LegalFilterResult {
  Portfolio kept;
  std::vector<std::pair<std::string, std::string>> dropped;  // (patent_id, status)
};

LegalFilterResult verify_legal_status(const Portfolio& p);

struct AliasEntry {
  std::string pattern;  // stored normalized
  std::string canonical;
};

struct EntityAliasTable {
  std::vector<AliasEntry> entries;

  /// Throws Error{Config} on an empty canonical or a pattern that collides
  /// with an earlier one after normalization.
  void add(std::string_view pattern, std::string_view canonical,
           const std::vector<std::string>& suffixes);
  const std::string* lookup(std::string_view normalized) const;
};

std::vector<std::string> default_legal_suffixes();
std::vector<std::string> load_suffix_list(const std::filesystem::path& path);
EntityAliasTable load_alias_table(const std::filesystem::path& path,
                                  const std::vector<std::string>& suffixes);

/// Uppercase, drop punctuation, collapse whitespace, strip trailing legal
/// suffixes. No alias lookup.
std::string normalize_name(std::string_view raw, const std::vector<std::string>& suffixes);

/// normalize_name followed by alias lookup.
std::string canonical_name(std::string_view raw, const EntityAliasTable& aliases,
                           const std::vector<std::string>& suffixes);

Portfolio normalize_entities(const Portfolio& p, const EntityAliasTable& aliases,
                             const std::vector<std::string>& suffixes = default_legal_suffixes());

}  // namespace pp::corpus
