#include "pp/needgraph.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "pp/error.hpp"
#include "pp/text.hpp"

namespace pp::needgraph {

namespace {

constexpr std::array<std::pair<Relation, std::string_view>, 5> kRelations = {{
    {Relation::Seeks, "Seeks"},
    {Relation::Needs, "Needs"},
    {Relation::InvestingIn, "InvestingIn"},
    {Relation::StrugglesWith, "StrugglesWith"},
    {Relation::ConstrainedBy, "ConstrainedBy"},
}};

constexpr std::array<std::pair<SourceType, std::string_view>, 5> kSourceTypes = {{
    {SourceType::RegulatoryFiling, "RegulatoryFiling"},
    {SourceType::EarningsCall, "EarningsCall"},
    {SourceType::MarketReport, "MarketReport"},
    {SourceType::News, "News"},
    {SourceType::Blog, "Blog"},
}};

const std::vector<std::string> kUrgencyTerms = {"urgent",   "urgently", "critical", "critically", "immediate",
                                                "immediately", "pressing", "severe", "priority", "bottleneck",
                                                "must", "shortage"};

const std::vector<std::string> kLeadingFillers = {"THE", "A", "AN", "THIS", "THAT", "OUR", "WE", "IT", "ITS",
                                                  "MEANWHILE", "ALSO", "HOWEVER", "TODAY"};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool starts_capitalized(std::string_view w) {
  return !w.empty() && (std::isupper(static_cast<unsigned char>(w.front())) ||
                        std::isdigit(static_cast<unsigned char>(w.front())));
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string resolve_subject(std::string_view before, const EntityResolver& resolver) {
  const auto words = split_words(before);
  std::size_t start = words.size();
  while (start > 0 && starts_capitalized(words[start - 1])) {
    const auto& w = words[start - 1];
    if (start < words.size() && (w.back() == ',' || w.back() == ':') &&
        std::find(resolver.suffixes.begin(), resolver.suffixes.end(), corpus::normalize_name(w, {})) ==
            resolver.suffixes.end()) {
      break;
    }
    --start;
  }
  for (std::size_t i = start; i < words.size(); ++i) {
    const auto norm = corpus::normalize_name(join(words, i), resolver.suffixes);
    if (const auto* canon = resolver.aliases.lookup(norm)) return *canon;
  }
  while (start < words.size() &&
         std::find(kLeadingFillers.begin(), kLeadingFillers.end(), corpus::normalize_name(words[start], {})) !=
             kLeadingFillers.end()) {
    ++start;
  }
  if (start == words.size()) return {};
  return corpus::canonical_name(join(words, start), resolver.aliases, resolver.suffixes);
}

std::string clean_phrase(std::string_view raw) {
  std::string s = trim(raw);
  while (!s.empty() && std::string_view(".,:;!?\"')").find(s.back()) != std::string_view::npos) s.pop_back();
  return trim(s);
}

int urgency_of(std::string_view sentence) {
  int hits = 0;
  for (const auto& tok : text::tokenize(sentence)) {
    if (std::find(kUrgencyTerms.begin(), kUrgencyTerms.end(), tok) != kUrgencyTerms.end()) ++hits;
  }
  return hits;
}

}  // namespace

std::string_view to_string(Relation r) {
  for (const auto& [v, name] : kRelations) {
    if (v == r) return name;
  }
  return "Needs";
}

std::string_view to_string(SourceType s) {
  for (const auto& [v, name] : kSourceTypes) {
    if (v == s) return name;
  }
  return "News";
}

Relation relation_from_string(std::string_view s) {
  for (const auto& [v, name] : kRelations) {
    if (name == s) return v;
  }
  fail(ErrorCode::InvalidArgument, "unknown relation '" + std::string(s) + "'");
}

SourceType source_type_from_string(std::string_view s) {
  for (const auto& [v, name] : kSourceTypes) {
    if (name == s) return v;
  }
  fail(ErrorCode::UnknownSourceType, "unknown source type '" + std::string(s) + "'");
}

Document document_from_json(const json& j) {
  Document d;
  try {
    d.doc_id = j.at("doc_id").get<std::string>();
    d.source_type = source_type_from_string(j.at("source_type").get<std::string>());
    d.date = Date::parse(j.at("date").get<std::string>());
    d.text = j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("need document: ") + e.what());
  }
  if (trim(d.text).empty()) fail(ErrorCode::EmptyText, "document " + d.doc_id + " has no text");
  return d;
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
  std::vector<Document> docs;
  for (const auto& row : read_jsonl_file(path)) docs.push_back(document_from_json(row));
  return docs;
}

std::vector<Pattern> parse_patterns(const std::vector<std::string>& lines) {
  std::vector<Pattern> out;
  for (const auto& raw : lines) {
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorCode::Config, "pattern without relation: " + line);
    Pattern p;
    p.relation = relation_from_string(trim(line.substr(0, colon)));
    std::string body = trim(line.substr(colon + 1));
    constexpr std::string_view ent = "<ENT>", phrase = "<PHRASE>";
    if (!body.starts_with(ent) || !body.ends_with(phrase)) {
      fail(ErrorCode::Config, "pattern must read '<ENT> trigger <PHRASE>': " + line);
    }
    p.trigger = text::to_lower(trim(body.substr(ent.size(), body.size() - ent.size() - phrase.size())));
    if (p.trigger.empty()) fail(ErrorCode::Config, "pattern has an empty trigger: " + line);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Pattern> load_patterns(const std::filesystem::path& path) {
  return parse_patterns(read_list_file(path));
}

std::vector<Pattern> default_patterns() {
  return {{Relation::StrugglesWith, "is struggling with"}, {Relation::StrugglesWith, "struggles with"},
          {Relation::Seeks, "is seeking"},                 {Relation::Seeks, "seeks"},
          {Relation::Needs, "needs"},                      {Relation::InvestingIn, "is investing in"},
          {Relation::InvestingIn, "invests in"},           {Relation::ConstrainedBy, "lacks"},
          {Relation::ConstrainedBy, "is constrained by"}};
}

json to_json(const Triple& t) {
  return {{"subject", t.subject},         {"relation", to_string(t.relation)},
          {"object", t.object},           {"source_doc", t.source_doc},
          {"source_type", to_string(t.source_type)}, {"observed_date", t.observed_date.iso()},
          {"quote", t.quote},             {"urgency", t.urgency}};
}

Triple triple_from_json(const json& j) {
  Triple t;
  t.subject = j.at("subject").get<std::string>();
  t.relation = relation_from_string(j.at("relation").get<std::string>());
  t.object = j.at("object").get<std::string>();
  t.source_doc = j.at("source_doc").get<std::string>();
  t.source_type = source_type_from_string(j.at("source_type").get<std::string>());
  t.observed_date = Date::parse(j.at("observed_date").get<std::string>());
  t.quote = j.at("quote").get<std::string>();
  t.urgency = j.at("urgency").get<int>();
  return t;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      emit(i);
      start = i + 1;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    if (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) continue;
    while (j < text.size() && text[j] == ' ') ++j;
    if (j >= text.size() || text[j] == '\n' || std::isupper(static_cast<unsigned char>(text[j])) ||
        std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '"') {
      emit(i + 1);
    }
  }
  emit(text.size());
  return out;
}

std::vector<Triple> extract_triples(const Document& doc, const std::vector<Pattern>& patterns,
                                    const EntityResolver& resolver) {
  std::vector<Triple> out;
  for (const auto& sentence : split_sentences(doc.text)) {
    const std::string lower = text::to_lower(sentence);
    const int urgency = urgency_of(sentence);
    std::size_t cursor = 0;
    while (cursor < lower.size()) {
      std::size_t best_pos = std::string::npos;
      const Pattern* best = nullptr;
      for (const auto& p : patterns) {
        std::size_t pos = lower.find(p.trigger, cursor);
        while (pos != std::string::npos) {
          const std::size_t end = pos + p.trigger.size();
          const bool left_ok = pos > 0 && !is_word_char(lower[pos - 1]);
          const bool right_ok = end < lower.size() && !is_word_char(lower[end]);
          if (left_ok && right_ok) break;
          pos = lower.find(p.trigger, pos + 1);
        }
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && p.trigger.size() > best->trigger.size())) {
          best_pos = pos;
          best = &p;
        }
      }
      if (!best) break;
      const std::size_t phrase_start = best_pos + best->trigger.size();
      std::size_t phrase_end = sentence.find(';', phrase_start);
      if (phrase_end == std::string::npos) phrase_end = sentence.size();

      const std::string subject = resolve_subject(std::string_view(sentence).substr(cursor, best_pos - cursor), resolver);
      const std::string object = clean_phrase(std::string_view(sentence).substr(phrase_start, phrase_end - phrase_start));
      if (subject.empty() || object.empty()) {
        cursor = phrase_start;
        continue;
      }
      out.push_back({subject, best->relation, object, doc.doc_id, doc.source_type, doc.date, sentence, urgency});
      cursor = phrase_end + 1;
    }
  }
  return out;
}

double authority_of(SourceType s, const AuthorityTable& table) {
  const auto it = table.by_type.find(s);
  if (it == table.by_type.end()) fail(ErrorCode::UnknownSourceType, std::string(to_string(s)));
  return it->second;
}

double authority_of(std::string_view source_type, const AuthorityTable& table) {
  return authority_of(source_type_from_string(source_type), table);
}

const Triple& NeedNode::strongest_support() const {
  const Triple* best = &supporting_triples.front();
  for (const auto& t : supporting_triples) {
    if (authority_of(t.source_type) > authority_of(best->source_type)) best = &t;
  }
  return *best;
}

json to_json(const NeedNode& n) {
  json triples = json::array();
  for (const auto& t : n.supporting_triples) triples.push_back(to_json(t));
  return {{"need_id", n.need_id},
          {"entity", n.entity},
          {"description", n.description},
          {"authority", n.authority},
          {"demand_db", n.demand_db},
          {"mentions_in_window", n.mentions_in_window},
          {"first_seen", n.first_seen.iso()},
          {"last_seen", n.last_seen.iso()},
          {"key_terms", n.key_terms},
          {"supporting_triples", triples}};
}

NeedNode need_from_json(const json& j) {
  NeedNode n;
  n.need_id = j.at("need_id").get<std::string>();
  n.entity = j.at("entity").get<std::string>();
  n.description = j.at("description").get<std::string>();
  n.authority = j.at("authority").get<double>();
  n.demand_db = j.at("demand_db").get<double>();
  n.mentions_in_window = j.at("mentions_in_window").get<int>();
  n.first_seen = Date::parse(j.at("first_seen").get<std::string>());
  n.last_seen = Date::parse(j.at("last_seen").get<std::string>());
  n.key_terms = j.at("key_terms").get<std::vector<std::string>>();
  for (const auto& t : j.at("supporting_triples")) n.supporting_triples.push_back(triple_from_json(t));
  return n;
}

const NeedNode* NeedGraph::find(std::string_view need_id) const {
  for (const auto& n : nodes) {
    if (n.need_id == need_id) return &n;
  }
  return nullptr;
}

json to_json(const NeedGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(to_json(n));
  return {{"nodes", nodes}};
}

NeedGraph graph_from_json(const json& j) {
  NeedGraph g;
  for (const auto& n : j.at("nodes")) g.nodes.push_back(need_from_json(n));
  return g;
}

NeedGraph build_graph(std::vector<Triple> triples, const GraphConfig& cfg) {
  std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.subject, a.observed_date, a.source_doc, a.object, a.quote) <
           std::tie(b.subject, b.observed_date, b.source_doc, b.object, b.quote);
  });

  struct Draft {
    std::vector<std::string> founding_tokens;
    NeedNode node;
  };
  std::vector<Draft> drafts;
  for (auto& t : triples) {
    const auto tokens = text::unique_sorted(text::content_tokens(t.object));
    Draft* home = nullptr;
    for (auto& d : drafts) {
      if (d.node.entity == t.subject && text::jaccard(d.founding_tokens, tokens) >= cfg.merge_jaccard) {
        home = &d;
        break;
      }
    }
    if (!home) {
      drafts.push_back({tokens, {}});
      home = &drafts.back();
      home->node.entity = t.subject;
      home->node.description = t.object;
    }
    home->node.supporting_triples.push_back(std::move(t));
  }

  NeedGraph g;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& n = drafts[i].node;
    const std::string num = std::to_string(i + 1);
    n.need_id = "N" + std::string(num.size() < 4 ? 4 - num.size() : 0, '0') + num;
    n.first_seen = n.supporting_triples.front().observed_date;
    n.last_seen = n.first_seen;
    std::vector<std::string> terms;
    for (const auto& t : n.supporting_triples) {
      n.authority = std::max(n.authority, authority_of(t.source_type, cfg.authority));
      n.first_seen = std::min(n.first_seen, t.observed_date);
      n.last_seen = std::max(n.last_seen, t.observed_date);
      const auto age = cfg.window_end - t.observed_date;
      if (age >= 0 && static_cast<double>(age) < cfg.window_days) ++n.mentions_in_window;
      for (auto& tok : text::content_tokens(t.object)) terms.push_back(std::move(tok));
    }
    n.key_terms = text::unique_sorted(std::move(terms));
    n.demand_db = params::demand_snr(n.mentions_in_window, cfg.baseline_mentions, cfg.params);
    g.nodes.push_back(std::move(n));
  }
  return g;
}

std::vector<NeedHit> query_needs(const NeedGraph& g, const std::vector<std::string>& key_terms, std::size_t limit) {
  const auto query = text::unique_sorted(key_terms);
  std::vector<NeedHit> hits;
  for (const auto& n : g.nodes) {
    const double s = text::jaccard(query, n.key_terms);
    if (s > 0.0) hits.push_back({n.need_id, s});
  }
  std::sort(hits.begin(), hits.end(), [](const NeedHit& a, const NeedHit& b) {
    return a.score != b.score ? a.score > b.score : a.need_id < b.need_id;
  });
  if (hits.size() > limit) hits.resize(limit);
  return hits;
}

}  // namespace pp::needgraph
