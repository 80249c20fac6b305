#include "pp/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pp::text {

namespace {

bool is_alnum_ascii(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
char upper_ascii(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

const std::set<std::string, std::less<>>& stopwords() {
  // General English function words plus claim-drafting boilerplate.
  static const std::set<std::string, std::less<>> words = {
      "a",         "about",     "above",    "after",    "all",       "also",     "an",
      "and",       "any",       "are",      "as",       "at",        "based",    "be",
      "been",      "being",     "between",  "both",     "but",       "by",       "can",
      "claim",     "claims",    "comprise", "comprises", "comprising", "configured",
      "consisting", "could",    "each",     "essentially", "first",  "for",      "from",
      "further",   "had",       "has",      "have",     "having",    "herein",   "in",
      "including", "into",      "is",       "it",       "its",       "least",    "may",
      "more",      "most",      "not",      "of",       "on",        "one",      "or",
      "other",     "our",       "plurality", "said",    "second",    "such",     "than",
      "that",      "the",       "their",    "them",     "then",      "there",    "thereby",
      "therein",   "thereof",   "these",    "they",     "third",     "this",     "those",
      "through",   "to",        "under",    "upon",     "using",     "via",      "was",
      "we",        "were",      "what",     "when",     "where",     "wherein",  "whereby",
      "which",     "while",     "will",     "with",     "within",    "without",  "would",
  };
  return words;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) tokens.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (is_alnum_ascii(c)) {
      cur += lower_ascii(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_stopword(std::string_view token) { return stopwords().count(token) > 0; }

std::vector<std::string> content_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
  return tokens;
}

TermCounts term_counts(const std::vector<std::string>& tokens) {
  TermCounts counts;
  for (const auto& t : tokens) counts[t] += 1.0;
  return counts;
}

void TermStats::add_document(const std::vector<std::string>& tokens) {
  ++documents_;
  for (const auto& t : unique_sorted(tokens)) ++df_[t];
}

std::size_t TermStats::document_frequency(const std::string& term) const {
  const auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double TermStats::idf(const std::string& term) const {
  const double n = static_cast<double>(documents_);
  const double df = static_cast<double>(document_frequency(term));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

TermCounts TermStats::tfidf(const std::vector<std::string>& tokens) const {
  TermCounts v = term_counts(tokens);
  for (auto& [term, w] : v) w *= idf(term);
  return v;
}

double cosine(const TermCounts& a, const TermCounts& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, w] : a) {
    na += w * w;
    if (auto it = b.find(t); it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto sa = unique_sorted(a);
  const auto sb = unique_sorted(b);
  if (sa.empty() && sb.empty()) return 0.0;
  std::vector<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(sa.size() + sb.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower_ascii);
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), upper_ascii);
  return out;
}

std::vector<std::string> unique_sorted(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

}  // namespace pp::text
