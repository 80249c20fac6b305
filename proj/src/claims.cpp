#include "pp/claims.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include "pp/error.hpp"

namespace pp::claims {

namespace {

struct PhraseHit {
  std::size_t pos = std::string::npos;
  std::size_t len = 0;
  Transitional kind = Transitional::Unknown;
};

bool word_boundary(const std::string& s, std::size_t pos, std::size_t len) {
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  const bool left = pos == 0 || !is_word(s[pos - 1]);
  const bool right = pos + len >= s.size() || !is_word(s[pos + len]);
  return left && right;
}

std::size_t find_word(const std::string& haystack, std::string_view needle, std::size_t from = 0) {
  for (auto pos = haystack.find(needle, from); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    if (word_boundary(haystack, pos, needle.size())) return pos;
  }
  return std::string::npos;
}

PhraseHit find_transitional(const std::string& lower) {
  // Longest phrase first so "consisting essentially of" wins a tie at the
  // same start offset.
  static constexpr std::array<std::pair<std::string_view, Transitional>, 3> kPhrases = {{
      {"consisting essentially of", Transitional::ConsistingEssentiallyOf},
      {"consisting of", Transitional::ConsistingOf},
      {"comprising", Transitional::Comprising},
  }};
  PhraseHit best;
  for (const auto& [phrase, kind] : kPhrases) {
    const auto pos = find_word(lower, phrase);
    if (pos != std::string::npos && pos < best.pos) best = {pos, phrase.size(), kind};
  }
  return best;
}

std::string strip_segment(std::string s) {
  s = trim(s);
  auto starts_with_word = [&](std::string_view w) {
    return s.size() > w.size() && text::to_lower(s.substr(0, w.size())) == w &&
           std::isspace(static_cast<unsigned char>(s[w.size()]));
  };
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ':' ||
                          s.back() == ';')) {
      s.pop_back();
      changed = true;
    }
    s = trim(s);
    const std::string lower = text::to_lower(s);
    for (std::string_view tail : {" and", " or"}) {
      if (lower.size() >= tail.size() &&
          lower.compare(lower.size() - tail.size(), tail.size(), tail) == 0) {
        s.resize(s.size() - tail.size());
        s = trim(s);
        changed = true;
      }
    }
    for (std::string_view head : {"and", "or"}) {
      if (starts_with_word(head)) {
        s = trim(s.substr(head.size()));
        changed = true;
      }
    }
  }
  return s;
}

std::vector<std::string> split_limitations(const std::string& body) {
  static const std::regex kEnumMarker(R"(\(\s*(?:[a-z]|[ivx]+|\d+)\s*\))", std::regex::icase);
  std::string marked = std::regex_replace(body, kEnumMarker, ";");
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= marked.size()) {
    auto end = marked.find(';', start);
    if (end == std::string::npos) end = marked.size();
    auto seg = strip_segment(marked.substr(start, end - start));
    if (!seg.empty()) out.push_back(std::move(seg));
    start = end + 1;
  }
  return out;
}

ClaimKind kind_from_head(std::string_view head) {
  static const std::vector<std::pair<std::string, ClaimKind>> kHeads = {
      {"method", ClaimKind::Process},        {"process", ClaimKind::Process},
      {"composition", ClaimKind::Composition}, {"compound", ClaimKind::Composition},
      {"mixture", ClaimKind::Composition},   {"formulation", ClaimKind::Composition},
      {"apparatus", ClaimKind::Product},     {"system", ClaimKind::Product},
      {"device", ClaimKind::Product},        {"medium", ClaimKind::Product},
      {"media", ClaimKind::Product},         {"circuit", ClaimKind::Product},
      {"machine", ClaimKind::Product},       {"assembly", ClaimKind::Product},
      {"article", ClaimKind::Product},       {"controller", ClaimKind::Product},
      {"array", ClaimKind::Product},         {"structure", ClaimKind::Product},
  };
  for (const auto& tok : text::tokenize(head)) {
    for (const auto& [noun, kind] : kHeads) {
      if (tok == noun) return kind;
    }
  }
  return ClaimKind::Unknown;
}

bool is_material_term(const std::string& token) {
  static const std::vector<std::string> kMaterials = {
      "aluminum", "aluminium", "carbide", "ceramic",  "cobalt",   "copper",    "gallium",
      "germanium", "glass",    "gold",    "graphene", "hafnium",  "lithium",   "nickel",
      "nitride",  "oxide",     "platinum", "polyethylene", "polyimide", "polymer", "sapphire",
      "silicon",  "silver",    "steel",   "titanium", "tungsten",
  };
  return std::find(kMaterials.begin(), kMaterials.end(), token) != kMaterials.end();
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cur += s[i];
    const bool terminal = s[i] == '.' || s[i] == '!' || s[i] == '?';
    const bool at_break = i + 1 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 1]));
    if (terminal && at_break) {
      if (auto t = trim(cur); !t.empty()) out.push_back(std::move(t));
      cur.clear();
    }
  }
  if (auto t = trim(cur); !t.empty()) out.push_back(std::move(t));
  return out;
}

}  // namespace

std::string_view to_string(Transitional t) {
  switch (t) {
    case Transitional::Comprising: return "Comprising";
    case Transitional::ConsistingOf: return "ConsistingOf";
    case Transitional::ConsistingEssentiallyOf: return "ConsistingEssentiallyOf";
    case Transitional::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_string(ClaimKind k) {
  switch (k) {
    case ClaimKind::Product: return "Product";
    case ClaimKind::Process: return "Process";
    case ClaimKind::Composition: return "Composition";
    case ClaimKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

ParsedClaim parse_claim(std::string_view text_in, int number) {
  const std::string text = trim(text_in);
  if (text.empty()) fail(ErrorCode::EmptyClaim, "claim " + std::to_string(number) + " is empty");

  ParsedClaim c;
  c.claim_number = number;
  const std::string lower = text::to_lower(text);

  static const std::regex kDependency(R"(\bclaims?\s+\d+)", std::regex::icase);
  c.is_independent = !std::regex_search(text, kDependency);

  const PhraseHit hit = find_transitional(lower);
  if (hit.pos == std::string::npos) {
    c.transitional = Transitional::Unknown;
    c.limitations = {strip_segment(text)};
    if (c.limitations.front().empty()) c.limitations.front() = text;
    const auto comma = text.find(',');
    c.claim_kind = kind_from_head(text.substr(0, comma));
    return c;
  }

  c.transitional = hit.kind;
  c.preamble = strip_segment(text.substr(0, hit.pos));
  std::string body = text.substr(hit.pos + hit.len);
  body.erase(0, std::min(body.find_first_not_of(" \t\r\n:,"), body.size()));
  c.limitations = split_limitations(body);
  if (c.limitations.empty()) c.limitations = {text};
  c.claim_kind = kind_from_head(c.preamble);
  return c;
}

std::vector<ParsedClaim> parse_claims(const std::vector<corpus::ClaimText>& claims) {
  std::vector<ParsedClaim> out;
  out.reserve(claims.size());
  for (const auto& ct : claims) {
    if (trim(ct.text).empty()) continue;
    out.push_back(parse_claim(ct.text, ct.number));
  }
  return out;
}

Lexicon Lexicon::from_terms(const std::vector<std::string>& terms) {
  Lexicon lex;
  for (const auto& t : terms) {
    auto toks = text::tokenize(t);
    if (!toks.empty()) lex.terms.push_back(std::move(toks));
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return from_terms(read_list_file(path)); }

Lexicon Lexicon::starter() {
  return from_terms({"means", "member", "element", "mechanism", "component", "portion", "unit"});
}

int Lexicon::count_hits(const std::vector<std::string>& tokens) const {
  int hits = 0;
  for (const auto& term : terms) {
    if (term.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + term.size() <= tokens.size(); ++i) {
      if (std::equal(term.begin(), term.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        ++hits;
      }
    }
  }
  return hits;
}

double breadth_score(const ParsedClaim& c, const Lexicon& lexicon) {
  std::vector<std::string> tokens = text::tokenize(c.preamble);
  for (const auto& lim : c.limitations) {
    auto t = text::tokenize(lim);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  const double hits = lexicon.count_hits(tokens);
  const double extra = c.limitations.empty() ? 0.0 : static_cast<double>(c.limitations.size() - 1);
  const double open = c.transitional == Transitional::Comprising ? 0.5 : 0.0;
  const double z = hits - 0.25 * extra + open;
  return 1.0 / (1.0 + std::exp(-z));
}

int limitation_weight(std::string_view limitation) {
  static const std::regex kNumericRange(
      R"((\d+(\.\d+)?\s*(%|percent)?\s*(-|to|and)\s*\d)|)"
      R"(((at least|at most|less than|greater than|more than|no more than|no less than|up to|between)\s+(about\s+)?\d))",
      std::regex::icase);
  const std::string s(limitation);
  if (std::regex_search(s, kNumericRange)) return 2;
  for (const auto& tok : text::tokenize(s)) {
    if (is_material_term(tok)) return 2;
  }
  return 1;
}

double design_around_score(const ParsedClaim& c) {
  int w = 0;
  for (const auto& lim : c.limitations) w += limitation_weight(lim);
  if (w <= 1) return 0.0;
  return 1.0 - std::exp(-(static_cast<double>(w) - 1.0) / 3.0);
}

json to_json(const SeedProfile& s) {
  return {{"patent_id", s.patent_id},
          {"solution_summary", s.solution_summary},
          {"problem_statement", s.problem_statement},
          {"breadth_score", s.breadth_score},
          {"design_around_score", s.design_around_score},
          {"key_terms", s.key_terms},
          {"mapping_confidence", s.mapping_confidence}};
}

SeedProfile seed_from_json(const json& j) {
  SeedProfile s;
  s.patent_id = j.at("patent_id").get<std::string>();
  s.solution_summary = j.at("solution_summary").get<std::string>();
  s.problem_statement = j.at("problem_statement").get<std::string>();
  s.breadth_score = j.at("breadth_score").get<double>();
  s.design_around_score = j.at("design_around_score").get<double>();
  s.key_terms = j.at("key_terms").get<std::vector<std::string>>();
  s.mapping_confidence = j.value("mapping_confidence", "heuristic");
  return s;
}

std::string seed_document_text(const corpus::PatentRecord& p) {
  std::string doc = p.abstract;
  for (const auto& c : p.claims) {
    doc += '\n';
    doc += c.text;
  }
  return doc;
}

text::TermStats build_corpus_stats(const std::vector<corpus::PatentRecord>& records) {
  text::TermStats stats;
  for (const auto& r : records) stats.add_document(text::content_tokens(seed_document_text(r)));
  return stats;
}

std::string extract_problem_statement(std::string_view abstract, std::string_view description) {
  static constexpr std::array<std::string_view, 4> kCues = {
      "a need exists", "there is a need", "problem of", "disadvantage"};
  std::string scope(abstract);
  scope += "\n";
  scope += description.substr(0, std::min<std::size_t>(description.size(), 2000));
  for (const auto& sentence : split_sentences(scope)) {
    const auto lower = text::to_lower(sentence);
    for (auto cue : kCues) {
      if (lower.find(cue) != std::string::npos) return sentence;
    }
  }
  const auto sentences = split_sentences(abstract);
  return sentences.empty() ? std::string{} : sentences.front();
}

SeedProfile build_seed_profile(const corpus::PatentRecord& p, const Lexicon& lexicon,
                               const text::TermStats& corpus_stats, std::size_t top_terms) {
  const auto parsed = parse_claims(p.claims);
  std::vector<const ParsedClaim*> independent;
  for (const auto& c : parsed) {
    if (c.is_independent) independent.push_back(&c);
  }
  if (independent.empty()) {
    fail(ErrorCode::NoIndependentClaims, "patent " + p.patent_id + " has no independent claim");
  }

  SeedProfile s;
  s.patent_id = p.patent_id;
  const ParsedClaim* broadest = independent.front();
  double best_breadth = -1.0;
  double min_design_around = 1.0;
  for (const auto* c : independent) {
    const double b = breadth_score(*c, lexicon);
    if (b > best_breadth) {
      best_breadth = b;
      broadest = c;
    }
    min_design_around = std::min(min_design_around, design_around_score(*c));
  }
  s.breadth_score = best_breadth;
  s.design_around_score = min_design_around;

  std::string head = broadest->preamble.empty() ? p.title : broadest->preamble;
  s.solution_summary = head;
  const auto& lims = broadest->limitations;
  if (!lims.empty()) {
    s.solution_summary += " featuring " + lims[0];
    if (lims.size() > 1) s.solution_summary += " and " + lims[1];
  }
  s.solution_summary += ".";
  s.problem_statement = extract_problem_statement(p.abstract, p.description);

  const auto weights = corpus_stats.tfidf(text::content_tokens(seed_document_text(p)));
  std::vector<std::pair<std::string, double>> ranked(weights.begin(), weights.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (std::size_t i = 0; i < ranked.size() && i < top_terms; ++i) {
    s.key_terms.push_back(ranked[i].first);
  }
  return s;
}

SeedProfile PatternClaimAnalyzer::analyze(const corpus::PatentRecord& p) const {
  return build_seed_profile(p, lexicon_, stats_, top_terms_);
}

}  // namespace pp::claims
