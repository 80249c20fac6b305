#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pp::text {

/// Lowercase ASCII alphanumeric runs of length >= 2. Non-ASCII bytes act as
/// separators.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

/// tokenize() minus stopwords.
std::vector<std::string> content_tokens(std::string_view text);

using TermCounts = std::map<std::string, double>;

TermCounts term_counts(const std::vector<std::string>& tokens);

/// Document-frequency table over a corpus. IDF uses the smoothed form
/// ln((1 + N) / (1 + df)) + 1, which is strictly positive for every term,
/// including terms never seen in the corpus (df = 0).
class TermStats {
 public:
  void add_document(const std::vector<std::string>& tokens);

  double idf(const std::string& term) const;
  std::size_t documents() const { return documents_; }
  std::size_t document_frequency(const std::string& term) const;

  TermCounts tfidf(const std::vector<std::string>& tokens) const;

 private:
  std::map<std::string, std::size_t> df_;
  std::size_t documents_ = 0;
};

/// Cosine similarity of two sparse nonnegative vectors; 0 when either is
/// the zero vector.
double cosine(const TermCounts& a, const TermCounts& b);

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// Sorted, deduplicated copy.
std::vector<std::string> unique_sorted(std::vector<std::string> tokens);

}  // namespace pp::text
