#include "pp/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <unordered_map>

#include "pp/error.hpp"
#include "pp/text.hpp"

namespace pp::corpus {

namespace {

constexpr std::array kOptionalFields = {
    "abstract",           "backward_citations", "cip_flag",          "description",
    "direct_metrics",     "examiner_citations", "family_members",    "forward_citations",
    "inventors",          "jurisdictions",      "litigation_events", "reassignments",
    "rejection_events",
};

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::MalformedRecord, what); }

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing required field '") + key + "'");
  return *it;
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) malformed("field '" + field + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) malformed("field '" + field + "' must be a number");
  return v.get<double>();
}

int get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer()) malformed("field '" + field + "' must be an integer");
  const auto n = v.get<long long>();
  if (n < 0) malformed("field '" + field + "' must be >= 0");
  return static_cast<int>(n);
}

Date get_date(const json& v, const std::string& field) {
  const std::string s = get_string(v, field);
  try {
    return Date::parse(s);
  } catch (const Error&) {
    malformed("field '" + field + "' is not an ISO-8601 date: '" + s + "'");
  }
}

const json& get_array(const json& v, const std::string& field) {
  if (!v.is_array()) malformed("field '" + field + "' must be an array");
  return v;
}

std::vector<std::string> get_string_list(const json& v, const std::string& field) {
  std::vector<std::string> out;
  for (const auto& e : get_array(v, field)) out.push_back(get_string(e, field + "[]"));
  return out;
}

LegalStatus parse_legal_status(const std::string& s) {
  static const std::unordered_map<std::string, LegalStatus> table = {
      {"granted", LegalStatus::Granted},     {"pending", LegalStatus::Pending},
      {"expired", LegalStatus::Expired},     {"abandoned", LegalStatus::Abandoned},
      {"lapsed", LegalStatus::Lapsed},       {"invalidated", LegalStatus::Invalidated},
  };
  const auto it = table.find(text::to_lower(s));
  if (it == table.end()) malformed("unknown legal_status '" + s + "'");
  return it->second;
}

JurisdictionStatus parse_jurisdiction_status(const std::string& s) {
  const auto l = text::to_lower(s);
  if (l == "granted") return JurisdictionStatus::Granted;
  if (l == "pending") return JurisdictionStatus::Pending;
  malformed("jurisdiction status must be granted or pending, got '" + s + "'");
}

LitigationOutcome parse_outcome(const std::string& s) {
  const auto l = text::to_lower(s);
  if (l == "plaintiffwin") return LitigationOutcome::PlaintiffWin;
  if (l == "settlement") return LitigationOutcome::Settlement;
  if (l == "defendantwin") return LitigationOutcome::DefendantWin;
  malformed("unknown litigation outcome '" + s + "'");
}

std::optional<double> optional_number(const json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return get_number(*it, ctx + "." + key);
}

}  // namespace

std::string_view to_string(LegalStatus s) {
  switch (s) {
    case LegalStatus::Granted: return "Granted";
    case LegalStatus::Pending: return "Pending";
    case LegalStatus::Expired: return "Expired";
    case LegalStatus::Abandoned: return "Abandoned";
    case LegalStatus::Lapsed: return "Lapsed";
    case LegalStatus::Invalidated: return "Invalidated";
  }
  return "Unknown";
}

std::string_view to_string(JurisdictionStatus s) {
  return s == JurisdictionStatus::Granted ? "granted" : "pending";
}

std::string_view to_string(LitigationOutcome o) {
  switch (o) {
    case LitigationOutcome::PlaintiffWin: return "PlaintiffWin";
    case LitigationOutcome::Settlement: return "Settlement";
    case LitigationOutcome::DefendantWin: return "DefendantWin";
  }
  return "Unknown";
}

bool PatentRecord::is_missing(std::string_view field) const {
  return std::binary_search(missing_fields.begin(), missing_fields.end(), field);
}

json to_json(const PatentRecord& r) {
  json claims = json::array();
  for (const auto& c : r.claims) claims.push_back({{"number", c.number}, {"text", c.text}});
  json inventors = json::array();
  for (const auto& inv : r.inventors) {
    json e = {{"name", inv.name}, {"name_canonical", inv.name_canonical}};
    if (inv.h_index) e["h_index"] = *inv.h_index;
    if (inv.collaborations) e["collaborations"] = *inv.collaborations;
    if (inv.litigation_success) e["litigation_success"] = *inv.litigation_success;
    inventors.push_back(std::move(e));
  }
  json juris = json::array();
  for (const auto& j : r.jurisdictions) {
    juris.push_back({{"country", j.country}, {"status", to_string(j.status)}});
  }
  json fwd = json::array();
  for (const auto& f : r.forward_citations) {
    fwd.push_back({{"citing_id", f.citing_id}, {"date", f.date.iso()}});
  }
  json reassign = json::array();
  for (const auto& a : r.reassignments) {
    reassign.push_back({{"date", a.date.iso()}, {"from", a.from}, {"to", a.to}});
  }
  json lit = json::array();
  for (const auto& l : r.litigation_events) {
    lit.push_back({{"outcome", to_string(l.outcome)}, {"case_value", l.case_value}});
  }
  return {
      {"patent_id", r.patent_id},
      {"title", r.title},
      {"abstract", r.abstract},
      {"description", r.description},
      {"claims", claims},
      {"filing_date", r.filing_date.iso()},
      {"grant_date", r.grant_date ? json(r.grant_date->iso()) : json(nullptr)},
      {"expiry_date", r.expiry_date.iso()},
      {"legal_status", to_string(r.legal_status)},
      {"assignee_raw", r.assignee_raw},
      {"assignee_canonical", r.assignee_canonical},
      {"inventors", inventors},
      {"cpc_codes", r.cpc_codes},
      {"family_members", r.family_members},
      {"jurisdictions", juris},
      {"forward_citations", fwd},
      {"backward_citations", r.backward_citations},
      {"examiner_citations", r.examiner_citations},
      {"reassignments", reassign},
      {"litigation_events", lit},
      {"rejection_events",
       {{"n102", r.rejections.n102}, {"n103", r.rejections.n103}, {"n112", r.rejections.n112}}},
      {"cip_flag", r.cip_flag},
      {"direct_metrics", r.direct_metrics},
      {"missing_fields", r.missing_fields},
  };
}

PatentRecord record_from_json(const json& j) {
  if (!j.is_object()) malformed("record must be a JSON object");
  PatentRecord r;
  r.patent_id = get_string(require(j, "patent_id"), "patent_id");
  if (trim(r.patent_id).empty()) malformed("patent_id must be non-empty");
  r.title = get_string(require(j, "title"), "title");

  for (const auto& c : get_array(require(j, "claims"), "claims")) {
    if (!c.is_object()) malformed("claims[] entries must be objects");
    ClaimText ct;
    ct.number = get_count(require(c, "number"), "claims[].number");
    ct.text = get_string(require(c, "text"), "claims[].text");
    r.claims.push_back(std::move(ct));
  }

  r.filing_date = get_date(require(j, "filing_date"), "filing_date");
  if (const auto& g = require(j, "grant_date"); !g.is_null()) {
    r.grant_date = get_date(g, "grant_date");
  }
  r.expiry_date = get_date(require(j, "expiry_date"), "expiry_date");
  r.legal_status = parse_legal_status(get_string(require(j, "legal_status"), "legal_status"));
  r.assignee_raw = get_string(require(j, "assignee_raw"), "assignee_raw");
  r.cpc_codes = get_string_list(require(j, "cpc_codes"), "cpc_codes");

  if (r.grant_date) {
    if (r.filing_date > *r.grant_date) malformed("filing_date after grant_date");
    if (*r.grant_date > r.expiry_date) malformed("grant_date after expiry_date");
  } else if (r.legal_status == LegalStatus::Granted) {
    malformed("Granted record requires grant_date");
  }
  if (r.filing_date > r.expiry_date) malformed("filing_date after expiry_date");

  if (auto it = j.find("assignee_canonical"); it != j.end() && !it->is_null()) {
    r.assignee_canonical = get_string(*it, "assignee_canonical");
  }
  if (auto it = j.find("abstract"); it != j.end()) r.abstract = get_string(*it, "abstract");
  if (auto it = j.find("description"); it != j.end()) {
    r.description = get_string(*it, "description");
  }
  if (auto it = j.find("inventors"); it != j.end()) {
    for (const auto& e : get_array(*it, "inventors")) {
      if (!e.is_object()) malformed("inventors[] entries must be objects");
      InventorRef inv;
      inv.name = get_string(require(e, "name"), "inventors[].name");
      if (auto c = e.find("name_canonical"); c != e.end()) {
        inv.name_canonical = get_string(*c, "inventors[].name_canonical");
      }
      inv.h_index = optional_number(e, "h_index", "inventors[]");
      inv.collaborations = optional_number(e, "collaborations", "inventors[]");
      inv.litigation_success = optional_number(e, "litigation_success", "inventors[]");
      r.inventors.push_back(std::move(inv));
    }
  }
  if (auto it = j.find("family_members"); it != j.end()) {
    r.family_members = get_string_list(*it, "family_members");
  }
  if (auto it = j.find("jurisdictions"); it != j.end()) {
    for (const auto& e : get_array(*it, "jurisdictions")) {
      if (!e.is_object()) malformed("jurisdictions[] entries must be objects");
      Jurisdiction jd;
      jd.country = get_string(require(e, "country"), "jurisdictions[].country");
      jd.status = parse_jurisdiction_status(get_string(require(e, "status"), "jurisdictions[].status"));
      r.jurisdictions.push_back(std::move(jd));
    }
  }
  if (auto it = j.find("forward_citations"); it != j.end()) {
    for (const auto& e : get_array(*it, "forward_citations")) {
      if (!e.is_object()) malformed("forward_citations[] entries must be objects");
      r.forward_citations.push_back(
          {get_string(require(e, "citing_id"), "forward_citations[].citing_id"),
           get_date(require(e, "date"), "forward_citations[].date")});
    }
  }
  if (auto it = j.find("backward_citations"); it != j.end()) {
    r.backward_citations = get_string_list(*it, "backward_citations");
  }
  if (auto it = j.find("examiner_citations"); it != j.end()) {
    r.examiner_citations = get_string_list(*it, "examiner_citations");
  }
  if (auto it = j.find("reassignments"); it != j.end()) {
    for (const auto& e : get_array(*it, "reassignments")) {
      if (!e.is_object()) malformed("reassignments[] entries must be objects");
      r.reassignments.push_back({get_date(require(e, "date"), "reassignments[].date"),
                                 get_string(require(e, "from"), "reassignments[].from"),
                                 get_string(require(e, "to"), "reassignments[].to")});
    }
  }
  if (auto it = j.find("litigation_events"); it != j.end()) {
    for (const auto& e : get_array(*it, "litigation_events")) {
      if (!e.is_object()) malformed("litigation_events[] entries must be objects");
      LitigationEvent ev;
      ev.outcome = parse_outcome(get_string(require(e, "outcome"), "litigation_events[].outcome"));
      ev.case_value = get_number(require(e, "case_value"), "litigation_events[].case_value");
      if (ev.case_value < 0) malformed("litigation case_value must be >= 0");
      r.litigation_events.push_back(ev);
    }
  }
  if (auto it = j.find("rejection_events"); it != j.end()) {
    if (!it->is_object()) malformed("rejection_events must be an object");
    auto count = [&](const char* key) {
      const auto f = it->find(key);
      return f == it->end() ? 0 : get_count(*f, std::string("rejection_events.") + key);
    };
    r.rejections = {count("n102"), count("n103"), count("n112")};
  }
  if (auto it = j.find("cip_flag"); it != j.end()) {
    if (!it->is_boolean()) malformed("field 'cip_flag' must be a boolean");
    r.cip_flag = it->get<bool>();
  }
  if (auto it = j.find("direct_metrics"); it != j.end()) {
    if (!it->is_object()) malformed("direct_metrics must be an object");
    for (const auto& [k, v] : it->items()) {
      r.direct_metrics[k] = get_number(v, "direct_metrics." + k);
    }
  }

  if (auto it = j.find("missing_fields"); it != j.end()) {
    r.missing_fields = get_string_list(*it, "missing_fields");
  } else {
    for (const char* f : kOptionalFields) {
      if (!j.contains(f)) r.missing_fields.emplace_back(f);
    }
  }
  std::sort(r.missing_fields.begin(), r.missing_fields.end());
  return r;
}

const PatentRecord* Portfolio::find(std::string_view patent_id) const {
  for (const auto& r : records) {
    if (r.patent_id == patent_id) return &r;
  }
  return nullptr;
}

json to_json(const Portfolio& p) {
  json records = json::array();
  for (const auto& r : p.records) records.push_back(to_json(r));
  return {{"evaluation_date", p.evaluation_date.iso()},
          {"provenance", p.provenance},
          {"records", records}};
}

Portfolio portfolio_from_json(const json& j) {
  Portfolio p;
  p.evaluation_date = Date::parse(j.at("evaluation_date").get<std::string>());
  p.provenance = j.at("provenance").get<std::string>();
  for (const auto& r : j.at("records")) p.records.push_back(record_from_json(r));
  return p;
}

IngestResult ingest_portfolio_text(std::string_view jsonl, Date evaluation_date, IngestMode mode) {
  IngestResult result;
  result.portfolio.evaluation_date = evaluation_date;
  result.portfolio.provenance = sha256_hex(jsonl);

  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, std::size_t> seen;  // patent_id -> line
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        malformed(std::string("invalid JSON: ") + e.what());
      }
      PatentRecord r = record_from_json(j);
      if (auto [it, inserted] = seen.emplace(r.patent_id, line_no); !inserted) {
        fail(ErrorCode::DuplicateId, "patent_id '" + r.patent_id + "' on lines " +
                                         std::to_string(it->second) + " and " +
                                         std::to_string(line_no));
      }
      result.portfolio.records.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedRecord) throw;
      result.rejected.push_back({line_no, e.what()});
    }
  }

  if (mode == IngestMode::Strict && !result.rejected.empty()) {
    std::string msg;
    for (const auto& rej : result.rejected) {
      msg += "line " + std::to_string(rej.line) + ": " + rej.reason + "; ";
    }
    fail(ErrorCode::MalformedRecord, msg);
  }
  if (result.portfolio.records.empty()) fail(ErrorCode::EmptyPortfolio, "no valid records");
  return result;
}

IngestResult ingest_portfolio(const std::filesystem::path& path, Date evaluation_date,
                              IngestMode mode) {
  return ingest_portfolio_text(read_text_file(path), evaluation_date, mode);
}

LegalFilterResult verify_legal_status(const Portfolio& p) {
  LegalFilterResult out;
  out.kept.evaluation_date = p.evaluation_date;
  out.kept.provenance = p.provenance;
  for (const auto& r : p.records) {
    if (r.legal_status == LegalStatus::Granted || r.legal_status == LegalStatus::Pending) {
      out.kept.records.push_back(r);
    } else {
      out.dropped.emplace_back(r.patent_id, std::string(to_string(r.legal_status)));
    }
  }
  return out;
}

std::vector<std::string> default_legal_suffixes() {
  return {"CORP", "CORPORATION", "INC", "INCORPORATED", "LTD", "LIMITED",
          "LLC",  "CO",          "GMBH", "AG",          "SA",  "PLC"};
}

std::vector<std::string> load_suffix_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (const auto& s : read_list_file(path)) out.push_back(text::to_upper(s));
  return out;
}

std::string normalize_name(std::string_view raw, const std::vector<std::string>& suffixes) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : raw) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      cur += static_cast<char>(std::toupper(u));
    } else if (std::isspace(u)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    }
    // other punctuation is dropped without splitting ("Co." -> "CO")
  }
  if (!cur.empty()) words.push_back(std::move(cur));

  while (words.size() > 1 &&
         std::find(suffixes.begin(), suffixes.end(), words.back()) != suffixes.end()) {
    words.pop_back();
  }
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

void EntityAliasTable::add(std::string_view pattern, std::string_view canonical,
                           const std::vector<std::string>& suffixes) {
  const std::string canon = trim(canonical);
  if (canon.empty()) fail(ErrorCode::Config, "alias canonical name must be non-empty");
  std::string norm = normalize_name(pattern, suffixes);
  if (norm.empty()) fail(ErrorCode::Config, "alias pattern normalizes to empty string");
  if (lookup(norm) != nullptr) {
    fail(ErrorCode::Config, "duplicate alias pattern after normalization: " + norm);
  }
  entries.push_back({std::move(norm), canon});
}

const std::string* EntityAliasTable::lookup(std::string_view normalized) const {
  for (const auto& e : entries) {
    if (e.pattern == normalized) return &e.canonical;
  }
  return nullptr;
}

EntityAliasTable load_alias_table(const std::filesystem::path& path,
                                  const std::vector<std::string>& suffixes) {
  EntityAliasTable table;
  for (const auto& row : read_csv(path, {"pattern", "canonical"})) {
    table.add(row[0], row[1], suffixes);
  }
  return table;
}

std::string canonical_name(std::string_view raw, const EntityAliasTable& aliases,
                           const std::vector<std::string>& suffixes) {
  std::string norm = normalize_name(raw, suffixes);
  if (const auto* canon = aliases.lookup(norm)) return *canon;
  return norm;
}

Portfolio normalize_entities(const Portfolio& p, const EntityAliasTable& aliases,
                             const std::vector<std::string>& suffixes) {
  Portfolio out = p;
  for (auto& r : out.records) {
    r.assignee_canonical = canonical_name(r.assignee_raw, aliases, suffixes);
    for (auto& inv : r.inventors) inv.name_canonical = normalize_name(inv.name, {});
  }
  return out;
}

}  // namespace pp::corpus
