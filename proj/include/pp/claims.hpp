#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pp/corpus.hpp"
#include "pp/io.hpp"
#include "pp/text.hpp"

namespace pp::claims {

enum class Transitional { Comprising, ConsistingOf, ConsistingEssentiallyOf, Unknown };
enum class ClaimKind { Product, Process, Composition, Unknown };

std::string_view to_string(Transitional t);
std::string_view to_string(ClaimKind k);

struct ParsedClaim {
  int claim_number = 0;
  std::string preamble;
  Transitional transitional = Transitional::Unknown;
  std::vector<std::string> limitations;
  bool is_independent = true;
  ClaimKind claim_kind = ClaimKind::Unknown;
};

/// Pattern grammar:
///  - preamble is the text before the earliest transitional phrase
///    ("consisting essentially of" / "consisting of" / "comprising");
///  - limitations are the segments after it, split on semicolons and
///    enumeration markers such as "(a)" or "(iii)";
///  - a "claim N" reference marks the claim dependent;
///  - kind comes from the earliest head noun in the preamble.
/// Total on non-empty text; throws Error{EmptyClaim} on blank input.
ParsedClaim parse_claim(std::string_view text, int number);

std::vector<ParsedClaim> parse_claims(const std::vector<corpus::ClaimText>& claims);

/// Broad-term lexicon. Terms are lowercase and may span several words.
struct Lexicon {
  std::vector<std::vector<std::string>> terms;

  static Lexicon from_terms(const std::vector<std::string>& terms);
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon starter();

  /// Number of (possibly overlapping) whole-word term occurrences.
  int count_hits(const std::vector<std::string>& tokens) const;
};

/// Logistic blend in [0,1]:
///   z = hits - 0.25 * (limitations - 1) + 0.5 * [transitional == Comprising]
///   breadth = 1 / (1 + exp(-z))
double breadth_score(const ParsedClaim& c, const Lexicon& lexicon);

/// Weighted limitation count w (limitations with numeric ranges or specific
/// material terms count 2, others 1). Score = 1 - exp(-(w - 1) / 3), so a
/// single plain limitation scores 0 and the score saturates towards 1 as
/// constraints pile up. Higher means easier to design around.
double design_around_score(const ParsedClaim& c);

/// Weight a single limitation contributes to design_around_score.
int limitation_weight(std::string_view limitation);

struct SeedProfile {
  std::string patent_id;
  std::string solution_summary;
  std::string problem_statement;
  double breadth_score = 0.0;
  double design_around_score = 0.0;
  std::vector<std::string> key_terms;
  std::string mapping_confidence = "heuristic";
};

json to_json(const SeedProfile& s);
SeedProfile seed_from_json(const json& j);

/// Document text a patent contributes to corpus term statistics.
std::string seed_document_text(const corpus::PatentRecord& p);

/// Term statistics over the whole portfolio. Built once per run.
text::TermStats build_corpus_stats(const std::vector<corpus::PatentRecord>& records);

/// Analyzer seam so a learned implementation can replace the pattern grammar
/// without touching matching code.
class ClaimAnalyzer {
 public:
  virtual ~ClaimAnalyzer() = default;
  virtual SeedProfile analyze(const corpus::PatentRecord& p) const = 0;
};

class PatternClaimAnalyzer final : public ClaimAnalyzer {
 public:
  PatternClaimAnalyzer(Lexicon lexicon, text::TermStats corpus_stats, std::size_t top_terms = 20)
      : lexicon_(std::move(lexicon)), stats_(std::move(corpus_stats)), top_terms_(top_terms) {}

  SeedProfile analyze(const corpus::PatentRecord& p) const override;

 private:
  Lexicon lexicon_;
  text::TermStats stats_;
  std::size_t top_terms_;
};

/// Throws Error{NoIndependentClaims} when no claim parses as independent.
SeedProfile build_seed_profile(const corpus::PatentRecord& p, const Lexicon& lexicon,
                               const text::TermStats& corpus_stats, std::size_t top_terms = 20);

/// Sentence carrying a problem cue ("a need exists", "problem of",
/// "disadvantage") from the abstract and the first 2,000 characters of the
/// description; falls back to the abstract's first sentence.
std::string extract_problem_statement(std::string_view abstract, std::string_view description);

}  // namespace pp::claims
