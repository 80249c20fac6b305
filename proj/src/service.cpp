#include "pp/service.hpp"

#include <algorithm>
#include <set>

#include "pp/claims.hpp"
#include "pp/error.hpp"
#include "pp/needgraph.hpp"
#include "pp/params.hpp"
#include "pp/strata.hpp"

namespace pp::service {

namespace fs = std::filesystem;
using gates::GateId;

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 10> kPhases = {{
    {Phase::Ingested, "Ingested"},
    {Phase::Categorized, "Categorized"},
    {Phase::Ranked, "Ranked"},
    {Phase::GatePostRanking, "GatePostRanking"},
    {Phase::Matched, "Matched"},
    {Phase::GatePostMatch, "GatePostMatch"},
    {Phase::Reported, "Reported"},
    {Phase::GateFinal, "GateFinal"},
    {Phase::Complete, "Complete"},
    {Phase::Failed, "Failed"},
}};

std::string_view stored_name(std::string_view key) {
  for (const auto& [k, name] : kInputFiles) {
    if (k == key) return name;
  }
  fail(ErrorCode::Config, "unknown input '" + std::string(key) + "'");
}

json rows_to_array(const std::vector<json>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(r);
  return a;
}

std::vector<ltr::Scored> scored_from_ranking(const json& ranking) {
  std::vector<ltr::Scored> out;
  for (const auto& it : ranking.at("items")) {
    out.push_back({it.at("patent_id").get<std::string>(), it.at("score").get<double>()});
  }
  return out;
}

}  // namespace

std::string_view to_string(Phase p) {
  for (const auto& [v, name] : kPhases) {
    if (v == p) return name;
  }
  return "Failed";
}

Phase phase_from_string(std::string_view s) {
  for (const auto& [v, name] : kPhases) {
    if (name == s) return v;
  }
  fail(ErrorCode::InvalidArgument, "unknown phase '" + std::string(s) + "'");
}

Phase gate_phase(GateId g) {
  switch (g) {
    case GateId::PostRanking: return Phase::GatePostRanking;
    case GateId::PostMatch: return Phase::GatePostMatch;
    case GateId::FinalOntology: return Phase::GateFinal;
  }
  return Phase::GatePostRanking;
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    for (const auto& [key, name] : kInputFiles) {
      const std::string k(key);
      if (!j.contains(k) || j.at(k).is_null()) continue;
      fs::path p = j.at(k).get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      c.inputs[k] = p.lexically_normal();
    }
    for (std::size_t i = 0; i < kRequiredInputs; ++i) {
      if (!c.inputs.count(std::string(kInputFiles[i].first))) {
        fail(ErrorCode::Config, "run config is missing input '" + std::string(kInputFiles[i].first) + "'");
      }
    }
    c.evaluation_date = Date::parse(j.at("evaluation_date").get<std::string>());
    if (j.contains("profile")) c.profile = j.at("profile").get<std::string>();
    if (j.contains("selected_categories") && !j.at("selected_categories").is_null()) {
      c.selected_categories = j.at("selected_categories").get<std::vector<std::string>>();
    }
    if (j.contains("await_selection")) c.await_selection = j.at("await_selection").get<bool>();
    if (j.contains("ingest_mode")) {
      const auto m = j.at("ingest_mode").get<std::string>();
      if (m == "strict") {
        c.ingest_mode = corpus::IngestMode::Strict;
      } else if (m == "lenient") {
        c.ingest_mode = corpus::IngestMode::Lenient;
      } else {
        fail(ErrorCode::Config, "ingest_mode must be strict or lenient");
      }
    }
    if (j.contains("gate_bounds")) {
      const auto& b = j.at("gate_bounds");
      c.bounds.top_n = b.value("top_n", c.bounds.top_n);
      c.bounds.min_items = b.value("min_items", c.bounds.min_items);
      c.bounds.max_items = b.value("max_items", c.bounds.max_items);
      if (c.bounds.min_items > c.bounds.max_items) fail(ErrorCode::Config, "gate_bounds min exceeds max");
    }
    if (j.contains("nexus")) {
      const auto& n = j.at("nexus");
      c.nexus.alpha = n.value("alpha", c.nexus.alpha);
      c.nexus.beta = n.value("beta", c.nexus.beta);
      c.nexus.threshold = n.value("threshold", c.nexus.threshold);
      c.nexus.candidates_per_seed = n.value("candidates_per_seed", c.nexus.candidates_per_seed);
    }
    if (j.contains("needs")) {
      const auto& n = j.at("needs");
      c.needs.window_days = n.value("window_days", c.needs.window_days);
      c.needs.baseline_mentions = n.value("baseline_mentions", c.needs.baseline_mentions);
      c.needs.merge_jaccard = n.value("merge_jaccard", c.needs.merge_jaccard);
    }
    if (j.contains("run_id") && !j.at("run_id").is_null()) c.run_id = j.at("run_id").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("run config: ") + e.what());
  }
  if (c.run_id) {
    const auto& id = *c.run_id;
    const bool ok = !id.empty() && std::all_of(id.begin(), id.end(), [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
    });
    if (!ok) fail(ErrorCode::Config, "run_id may only hold letters, digits, '-' and '_'");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(read_json_file(path), fs::absolute(path).parent_path());
}

json settings_to_json(const RunConfig& c) {
  return {{"evaluation_date", c.evaluation_date.iso()},
          {"profile", c.profile},
          {"selected_categories", c.selected_categories ? json(*c.selected_categories) : json(nullptr)},
          {"await_selection", c.await_selection},
          {"ingest_mode", c.ingest_mode == corpus::IngestMode::Strict ? "strict" : "lenient"},
          {"gate_bounds",
           {{"top_n", c.bounds.top_n}, {"min_items", c.bounds.min_items}, {"max_items", c.bounds.max_items}}},
          {"nexus", nexus::to_json(c.nexus)},
          {"needs",
           {{"window_days", c.needs.window_days},
            {"baseline_mentions", c.needs.baseline_mentions},
            {"merge_jaccard", c.needs.merge_jaccard}}}};
}

Run::Run(fs::path root, std::string id) : root_(std::move(root)), id_(std::move(id)), dir_(root_ / id_) {}

Run Run::create(const fs::path& runs_root, const RunConfig& cfg) {
  json inputs = json::object();
  std::map<std::string, std::string> contents;
  for (const auto& [key, path] : cfg.inputs) {
    contents[key] = read_text_file(path);
    inputs[key] = {{"file", "inputs/" + std::string(stored_name(key))}, {"sha256", sha256_hex(contents[key])}};
  }
  const json settings = settings_to_json(cfg);
  const std::string id =
      cfg.run_id ? *cfg.run_id : "run-" + sha256_hex(dump_json({{"inputs", inputs}, {"settings", settings}})).substr(0, 12);

  Run run(runs_root, id);
  if (fs::exists(run.artifact("run.json"))) return run;
  fs::create_directories(run.dir_ / "inputs");
  for (const auto& [key, text] : contents) write_file_atomic(run.input(key), text);
  run.write_info({{"run_id", id},
                  {"phase", "Created"},
                  {"settings", settings},
                  {"inputs", inputs},
                  {"history", json::array()},
                  {"failure", nullptr}});
  try {
    run.do_ingest();
    run.set_phase(Phase::Ingested);
  } catch (const Error& e) {
    run.fail_run(Phase::Ingested, std::string(pp::to_string(e.code())), e.message());
  }
  return run;
}

Run Run::open(const fs::path& runs_root, std::string_view run_id) {
  const bool safe = !run_id.empty() && run_id.find('/') == std::string_view::npos && run_id != "." && run_id != "..";
  if (!safe || !fs::exists(runs_root / run_id / "run.json")) {
    fail(ErrorCode::NotFound, "no run '" + std::string(run_id) + "'");
  }
  return Run(runs_root, std::string(run_id));
}

std::vector<std::string> list_runs(const fs::path& runs_root) {
  std::vector<std::string> ids;
  if (!fs::exists(runs_root)) return ids;
  for (const auto& e : fs::directory_iterator(runs_root)) {
    if (e.is_directory() && fs::exists(e.path() / "run.json")) ids.push_back(e.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

json Run::read_info() const { return read_json_file(artifact("run.json")); }
void Run::write_info(const json& info) const { write_json_atomic(artifact("run.json"), info); }

Phase Run::phase() const {
  const auto s = read_info().at("phase").get<std::string>();
  if (s == "Created") return Phase::Failed;
  return phase_from_string(s);
}

json Run::info() const {
  json info = read_info();
  json gates = json::object();
  for (const auto& [id, g] : gate_table()) {
    gates[std::string(gates::to_string(id))] = {{"state", gates::to_string(g.current().state)},
                                                {"version", g.current().version}};
  }
  info["gates"] = gates;
  return info;
}

void Run::set_phase(Phase p) const {
  json info = read_info();
  info["phase"] = to_string(p);
  info["history"].push_back(to_string(p));
  write_info(info);
}

void Run::fail_run(Phase at, const std::string& code, const std::string& message) const {
  json info = read_info();
  info["phase"] = to_string(Phase::Failed);
  info["history"].push_back(to_string(Phase::Failed));
  info["failure"] = {{"phase", to_string(at)}, {"code", code}, {"message", message}};
  write_info(info);
}

fs::path Run::input(std::string_view key) const { return dir_ / "inputs" / stored_name(key); }
bool Run::has_input(std::string_view key) const { return fs::exists(input(key)); }

namespace {

struct Context {
  RunConfig settings;
  params::ParamConfig params;
  std::vector<std::string> suffixes;
  corpus::EntityAliasTable aliases;
  strata::ProfileSet profiles;
};

Context load_context(const json& info, const fs::path& inputs) {
  const auto& st = info.at("settings");
  auto present = [&](std::string_view key) { return fs::exists(inputs / stored_name(key)); };
  auto path = [&](std::string_view key) { return inputs / stored_name(key); };
  Context ctx;
  auto& c = ctx.settings;
  c.evaluation_date = Date::parse(st.at("evaluation_date").get<std::string>());
  c.profile = st.at("profile").get<std::string>();
  if (!st.at("selected_categories").is_null()) {
    c.selected_categories = st.at("selected_categories").get<std::vector<std::string>>();
  }
  c.await_selection = st.at("await_selection").get<bool>();
  c.ingest_mode = st.at("ingest_mode") == "strict" ? corpus::IngestMode::Strict : corpus::IngestMode::Lenient;
  const auto& b = st.at("gate_bounds");
  c.bounds = {b.at("top_n").get<std::size_t>(), b.at("min_items").get<std::size_t>(),
              b.at("max_items").get<std::size_t>()};
  const auto& n = st.at("nexus");
  c.nexus.alpha = n.at("alpha").get<double>();
  c.nexus.beta = n.at("beta").get<double>();
  c.nexus.threshold = n.at("threshold").get<double>();
  c.nexus.candidates_per_seed = n.at("candidates_per_seed").get<std::size_t>();
  const auto& nd = st.at("needs");
  c.needs = {nd.at("window_days").get<double>(), nd.at("baseline_mentions").get<double>(),
             nd.at("merge_jaccard").get<double>()};
  ctx.params = present("params") ? params::load_param_config(path("params")) : params::ParamConfig{};
  ctx.suffixes = present("suffixes") ? corpus::load_suffix_list(path("suffixes")) : corpus::default_legal_suffixes();
  if (present("aliases")) ctx.aliases = corpus::load_alias_table(path("aliases"), ctx.suffixes);
  ctx.profiles = present("profiles") ? strata::load_profiles(path("profiles")) : strata::builtin_profiles();
  return ctx;
}

}  // namespace

void Run::do_ingest() const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  auto result = corpus::ingest_portfolio(input("portfolio"), ctx.settings.evaluation_date, ctx.settings.ingest_mode);
  const auto normalized = corpus::normalize_entities(result.portfolio, ctx.aliases, ctx.suffixes);
  auto filtered = corpus::verify_legal_status(normalized);

  json dropped = json::array();
  for (const auto& [id, status] : filtered.dropped) dropped.push_back({{"patent_id", id}, {"reason", status}});
  corpus::Portfolio kept = filtered.kept;
  kept.records.clear();
  for (auto& r : filtered.kept.records) {
    if (r.expiry_date < ctx.settings.evaluation_date) {
      dropped.push_back({{"patent_id", r.patent_id}, {"reason", "ExpiredAtEvaluation"}});
    } else {
      kept.records.push_back(std::move(r));
    }
  }
  if (kept.records.empty()) fail(ErrorCode::EmptyPortfolio, "no in-force patents left after the legal filter");
  json rejected = json::array();
  for (const auto& r : result.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  write_json_atomic(artifact("portfolio.json"), corpus::to_json(kept));
  write_json_atomic(artifact("dropped.json"), {{"dropped", dropped}, {"rejected_lines", rejected}});
}

strata::VectorTable read_vectors(const fs::path& path) {
  strata::VectorTable out;
  for (const auto& row : read_jsonl_file(path)) {
    out[row.at("patent_id").get<std::string>()] = params::vector_from_json(row);
  }
  return out;
}

strata::VectorTable Run::vectors() const { return read_vectors(artifact("vectors.jsonl")); }

void Run::do_categorize() const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  const auto portfolio = corpus::portfolio_from_json(read_json_file(artifact("portfolio.json")));
  params::MarketContext mctx{params::load_gni_table(input("gni")), params::load_market_data(input("market")),
                             ctx.params};
  strata::VectorTable vectors;
  std::vector<json> rows;
  for (const auto& r : portfolio.records) {
    auto v = params::build_feature_vector(r, ctx.settings.evaluation_date, mctx);
    json row = params::to_json(v);
    row["patent_id"] = r.patent_id;
    rows.push_back(std::move(row));
    vectors[r.patent_id] = std::move(v);
  }
  const auto categories = strata::categorize(portfolio, vectors);
  const auto profile = strata::resolve_profile(ctx.settings.profile, ctx.profiles);
  json cats = json::array();
  for (const auto& c : categories) {
    json j = strata::to_json(c);
    j["score"] = strata::category_score(c, profile);
    cats.push_back(std::move(j));
  }
  write_file_atomic(artifact("vectors.jsonl"), dump_jsonl(rows));
  write_json_atomic(artifact("categories.json"), {{"profile", profile.label}, {"categories", cats}});
}

std::map<std::string, std::string> Run::category_of() const {
  std::map<std::string, std::string> out;
  const json doc_categories = read_json_file(artifact("categories.json"));
  for (const auto& c : doc_categories.at("categories")) {
    for (const auto& m : c.at("members")) out[m.get<std::string>()] = c.at("key").get<std::string>();
  }
  return out;
}

void Run::select_categories(const std::vector<std::string>& keys, std::optional<std::string> profile) {
  if (phase() != Phase::Categorized) fail(ErrorCode::PhaseError, "categories can only be selected while Categorized");
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  if (keys.empty()) fail(ErrorCode::InvalidArgument, "select at least one category");
  std::set<std::string> known;
  const json doc_categories = read_json_file(artifact("categories.json"));
  for (const auto& c : doc_categories.at("categories")) {
    known.insert(c.at("key").get<std::string>());
  }
  for (const auto& k : keys) {
    if (!known.count(k)) fail(ErrorCode::InvalidArgument, "unknown category '" + k + "'");
  }
  const std::string label = profile.value_or(ctx.settings.profile);
  strata::resolve_profile(label, ctx.profiles);
  std::set<std::string> unique(keys.begin(), keys.end());
  write_json_atomic(artifact("selection.json"),
                    {{"categories", std::vector<std::string>(unique.begin(), unique.end())}, {"profile", label}});
}

void Run::do_rank() const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  std::vector<std::string> selected;
  std::string profile_label = ctx.settings.profile;
  if (fs::exists(artifact("selection.json"))) {
    const auto sel = read_json_file(artifact("selection.json"));
    selected = sel.at("categories").get<std::vector<std::string>>();
    profile_label = sel.at("profile").get<std::string>();
  } else if (ctx.settings.selected_categories) {
    selected = *ctx.settings.selected_categories;
  }
  const auto cats = read_json_file(artifact("categories.json")).at("categories");
  std::set<std::string> keys;
  for (const auto& c : cats) keys.insert(c.at("key").get<std::string>());
  if (selected.empty()) selected.assign(keys.begin(), keys.end());
  for (const auto& k : selected) {
    if (!keys.count(k)) fail(ErrorCode::InvalidArgument, "unknown category '" + k + "'");
  }
  std::sort(selected.begin(), selected.end());

  const auto all = vectors();
  const auto cat_of = category_of();
  strata::VectorTable chosen;
  for (const auto& [id, v] : all) {
    if (std::binary_search(selected.begin(), selected.end(), cat_of.at(id))) chosen[id] = v;
  }
  if (!has_input("model")) fail(ErrorCode::Config, "run has no model input; train one with pp train --run");
  const auto model = ltr::load_model(input("model"));
  const auto profile = strata::resolve_profile(profile_label, ctx.profiles);
  const auto ranked = ltr::predict(model, chosen, profile);
  json items = json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    items.push_back({{"rank", i + 1},
                     {"patent_id", ranked[i].patent_id},
                     {"score", ranked[i].score},
                     {"category", cat_of.at(ranked[i].patent_id)}});
  }
  write_json_atomic(artifact("ranking.json"), {{"profile", profile.label},
                                               {"selected_categories", selected},
                                               {"model_sha256", sha256_hex(read_text_file(input("model")))},
                                               {"items", items}});
}

gates::GateTable Run::gate_table() const {
  gates::GateTable table;
  for (auto g : gates::kGateOrder) {
    const auto path = dir_ / "gates" / (std::string(gates::to_string(g)) + ".json");
    if (fs::exists(path)) table[g] = gates::gate_from_json(read_json_file(path));
  }
  return table;
}

json Run::gate(GateId g) const {
  const auto table = gate_table();
  const auto it = table.find(g);
  if (it == table.end()) fail(ErrorCode::NotFound, std::string(gates::to_string(g)) + " has not been opened");
  return gates::to_json(it->second);
}

namespace {

void save_gate(const fs::path& dir, const gates::Gate& g) {
  fs::create_directories(dir / "gates");
  write_json_atomic(dir / "gates" / (std::string(gates::to_string(g.id)) + ".json"), gates::to_json(g));
}

}  // namespace

void Run::do_open_gate(GateId g) const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  json payload;
  if (g == GateId::PostRanking) {
    const auto ranking = read_json_file(artifact("ranking.json"));
    const auto portfolio = corpus::portfolio_from_json(read_json_file(artifact("portfolio.json")));
    const auto& b = ctx.settings.bounds;
    const std::size_t n = std::min(std::clamp(b.top_n, b.min_items, b.max_items), ranking.at("items").size());
    json items = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& it = ranking.at("items")[i];
      const auto id = it.at("patent_id").get<std::string>();
      items.push_back({{"item_id", id},
                       {"rank", it.at("rank")},
                       {"score", it.at("score")},
                       {"category", it.at("category")},
                       {"title", portfolio.find(id)->title}});
    }
    payload = {{"kind", "ranking"}, {"profile", ranking.at("profile")}, {"items", items}};
  } else if (g == GateId::PostMatch) {
    json items = json::array();
    for (auto m : read_jsonl_file(artifact("matches.jsonl"))) {
      m["item_id"] = m.at("match_id");
      items.push_back(std::move(m));
    }
    payload = {{"kind", "matches"}, {"items", items}};
  } else {
    const auto graph = needgraph::graph_from_json(read_json_file(artifact("needs.json")));
    json items = json::array();
    const json doc_clusters = read_json_file(artifact("clusters.json"));
    for (const auto& c : doc_clusters.at("clusters")) {
      const auto cl = nexus::cluster_from_json(c);
      items.push_back({{"item_id", cl.cluster_id},
                       {"need_id", cl.need_id},
                       {"entity", graph.find(cl.need_id)->entity},
                       {"members", cl.members},
                       {"fit_score", cl.matches.front().fit_score},
                       {"report", "reports/" + cl.cluster_id + ".json"}});
    }
    payload = {{"kind", "clusters"}, {"items", items}};
  }
  auto table = gate_table();
  auto& gate = gates::open_gate(table, g, std::move(payload));
  save_gate(dir_, gate);
}

void Run::do_match() const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  const auto table = gate_table();
  const json approved = gates::resolved_payload(table.at(GateId::PostRanking).current());
  write_json_atomic(artifact("approved_ranking.json"), approved);

  const auto portfolio = corpus::portfolio_from_json(read_json_file(artifact("portfolio.json")));
  const auto lexicon = has_input("broad_terms") ? claims::Lexicon::load(input("broad_terms")) : claims::Lexicon::starter();
  const auto stats = claims::build_corpus_stats(portfolio.records);
  std::vector<claims::SeedProfile> seeds;
  std::vector<json> seed_rows;
  json seed_errors = json::array();
  for (const auto& it : approved.at("items")) {
    const auto id = it.at("item_id").get<std::string>();
    try {
      seeds.push_back(claims::build_seed_profile(*portfolio.find(id), lexicon, stats));
      seed_rows.push_back(claims::to_json(seeds.back()));
    } catch (const Error& e) {
      seed_errors.push_back({{"patent_id", id}, {"code", pp::to_string(e.code())}, {"message", e.message()}});
    }
  }

  const auto patterns = has_input("patterns") ? needgraph::load_patterns(input("patterns")) : needgraph::default_patterns();
  needgraph::EntityResolver resolver{ctx.aliases, ctx.suffixes};
  std::vector<needgraph::Triple> triples;
  for (const auto& doc : needgraph::load_documents(input("needs_corpus"))) {
    for (auto& t : needgraph::extract_triples(doc, patterns, resolver)) triples.push_back(std::move(t));
  }
  needgraph::GraphConfig gcfg;
  gcfg.window_end = ctx.settings.evaluation_date;
  gcfg.window_days = ctx.settings.needs.window_days;
  gcfg.baseline_mentions = ctx.settings.needs.baseline_mentions;
  gcfg.merge_jaccard = ctx.settings.needs.merge_jaccard;
  gcfg.params = ctx.params;
  const auto graph = needgraph::build_graph(std::move(triples), gcfg);

  const auto matches = nexus::match_portfolio(seeds, graph, ctx.settings.nexus);
  std::vector<json> match_rows;
  for (const auto& m : matches) match_rows.push_back(nexus::to_json(m));

  write_file_atomic(artifact("seeds.jsonl"), dump_jsonl(seed_rows));
  write_json_atomic(artifact("seed_errors.json"), {{"errors", seed_errors}});
  write_json_atomic(artifact("needs.json"), needgraph::to_json(graph));
  write_file_atomic(artifact("matches.jsonl"), dump_jsonl(match_rows));
}

void Run::do_report() const {
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  const auto table = gate_table();
  const json approved = gates::resolved_payload(table.at(GateId::PostMatch).current());
  write_json_atomic(artifact("approved_matches.json"), approved);

  std::vector<nexus::MatchCandidate> kept;
  for (const auto& it : approved.at("items")) kept.push_back(nexus::match_from_json(it));
  const auto clusters = nexus::cluster_matches(kept);

  const auto portfolio = corpus::portfolio_from_json(read_json_file(artifact("portfolio.json")));
  std::map<std::string, claims::SeedProfile> seeds;
  for (const auto& row : read_jsonl_file(artifact("seeds.jsonl"))) {
    auto s = claims::seed_from_json(row);
    seeds[s.patent_id] = std::move(s);
  }
  const auto graph = needgraph::graph_from_json(read_json_file(artifact("needs.json")));
  const auto vecs = vectors();
  const auto ranking = scored_from_ranking(read_json_file(artifact("ranking.json")));
  const auto market = params::load_market_data(input("market"));

  nexus::ReportContext rctx;
  rctx.portfolio = &portfolio;
  rctx.seeds = &seeds;
  rctx.graph = &graph;
  rctx.vectors = &vecs;
  rctx.ranking = &ranking;
  rctx.market = &market;
  rctx.params = &ctx.params;
  rctx.nexus = ctx.settings.nexus;

  fs::create_directories(dir_ / "reports");
  json cl = json::array();
  for (const auto& c : clusters) {
    const auto report = nexus::generate_report(c, rctx);
    write_json_atomic(dir_ / "reports" / (c.cluster_id + ".json"), report);
    write_file_atomic(dir_ / "reports" / (c.cluster_id + ".txt"), nexus::render_report(report));
    cl.push_back(nexus::to_json(c));
  }
  write_json_atomic(artifact("clusters.json"), {{"clusters", cl}});
}

void Run::do_finalize() const {
  const auto table = gate_table();
  const json approved = gates::resolved_payload(table.at(GateId::FinalOntology).current());
  write_json_atomic(artifact("approved_clusters.json"), approved);
  std::set<std::string> patents;
  json clusters = json::array();
  for (const auto& it : approved.at("items")) {
    for (const auto& m : it.at("members")) patents.insert(m.get<std::string>());
    clusters.push_back({{"cluster_id", it.at("item_id")},
                        {"need_id", it.at("need_id")},
                        {"entity", it.at("entity")},
                        {"fit_score", it.at("fit_score")},
                        {"members", it.at("members")},
                        {"report", it.at("report")}});
  }
  write_json_atomic(artifact("pruned.json"), {{"run_id", id_},
                                              {"count", patents.size()},
                                              {"patents", std::vector<std::string>(patents.begin(), patents.end())},
                                              {"clusters", clusters}});
  export_labels();
}

std::vector<ltr::Label> Run::export_labels() const {
  const auto labels = gates::export_feedback_labels(gate_table(), category_of());
  std::vector<json> rows;
  for (const auto& l : labels) rows.push_back(ltr::to_json(l));
  write_file_atomic(artifact("labels.jsonl"), dump_jsonl(rows));
  return labels;
}

bool Run::step(bool auto_approve) {
  const Phase p = phase();
  auto wait_on_gate = [&](GateId g, Phase next, void (Run::*work)() const) {
    auto table = gate_table();
    auto& gate = table.at(g);
    if (gate.current().state == gates::GateState::Open) {
      if (!auto_approve) return false;
      gates::Submission s;
      s.gate_id = std::string(gates::to_string(g));
      s.reviewer = "auto-approve";
      s.action = gates::Action::Approve;
      gates::submit_review(gate, s, load_context(read_info(), dir_ / "inputs").settings.bounds);
      save_gate(dir_, gate);
    }
    if (gate.current().state == gates::GateState::Rejected) {
      fail_run(p, "Rejected", std::string(gates::to_string(g)) + " rejected by " + gate.current().reviewer);
      return false;
    }
    (this->*work)();
    set_phase(next);
    return true;
  };
  try {
    switch (p) {
      case Phase::Ingested:
        do_categorize();
        set_phase(Phase::Categorized);
        return true;
      case Phase::Categorized: {
        const json st = read_info().at("settings");
        const bool preselected = !st.at("selected_categories").is_null();
        if (st.at("await_selection").get<bool>() && !preselected && !fs::exists(artifact("selection.json"))) {
          return false;
        }
        do_rank();
        set_phase(Phase::Ranked);
        return true;
      }
      case Phase::Ranked:
        do_open_gate(GateId::PostRanking);
        set_phase(Phase::GatePostRanking);
        return true;
      case Phase::GatePostRanking: return wait_on_gate(GateId::PostRanking, Phase::Matched, &Run::do_match);
      case Phase::Matched:
        do_open_gate(GateId::PostMatch);
        set_phase(Phase::GatePostMatch);
        return true;
      case Phase::GatePostMatch: return wait_on_gate(GateId::PostMatch, Phase::Reported, &Run::do_report);
      case Phase::Reported:
        do_open_gate(GateId::FinalOntology);
        set_phase(Phase::GateFinal);
        return true;
      case Phase::GateFinal: return wait_on_gate(GateId::FinalOntology, Phase::Complete, &Run::do_finalize);
      case Phase::Complete:
      case Phase::Failed: return false;
    }
  } catch (const Error& e) {
    fail_run(p, std::string(pp::to_string(e.code())), e.message());
  }
  return false;
}

Phase Run::advance(bool auto_approve) {
  while (step(auto_approve)) {
  }
  return phase();
}

gates::GateVersion Run::review(GateId g, const gates::Submission& s) {
  if (phase() != gate_phase(g)) {
    auto table = gate_table();
    const auto it = table.find(g);
    if (it != table.end() && it->second.current().state != gates::GateState::Open) {
      fail(ErrorCode::GateAlreadyResolved, std::string(gates::to_string(g)) + " is already " +
                                               std::string(gates::to_string(it->second.current().state)));
    }
    fail(ErrorCode::GateOrderViolation, "run is at " + std::string(to_string(phase())) + ", not waiting on " +
                                            std::string(gates::to_string(g)));
  }
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  auto table = gate_table();
  auto& gate = table.at(g);
  const auto v = gates::submit_review(gate, s, ctx.settings.bounds);
  save_gate(dir_, gate);
  return v;
}

void Run::reopen(GateId g) {
  const json info = read_info();
  const auto& failure = info.at("failure");
  if (phase() != Phase::Failed || failure.is_null() || failure.at("code") != "Rejected" ||
      failure.at("phase") != to_string(gate_phase(g))) {
    fail(ErrorCode::PhaseError, "only a gate that rejected the run can be reopened");
  }
  auto table = gate_table();
  const json payload = table.at(g).current().payload;
  auto& gate = gates::open_gate(table, g, payload);
  save_gate(dir_, gate);
  json next = read_info();
  next["failure"] = nullptr;
  next["phase"] = to_string(gate_phase(g));
  next["history"].push_back(to_string(gate_phase(g)));
  write_info(next);
}

json Run::categories(std::optional<std::string> profile) const {
  const auto path = artifact("categories.json");
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "run has not been categorized yet");
  json stored = read_json_file(path);
  if (profile && *profile != stored.at("profile").get<std::string>()) {
    const Context ctx = load_context(read_info(), dir_ / "inputs");
    const auto prof = strata::resolve_profile(*profile, ctx.profiles);
    for (auto& c : stored.at("categories")) c["score"] = strata::category_score(strata::category_from_json(c), prof);
    stored["profile"] = prof.label;
    stored["what_if"] = true;
  }
  auto& cats = stored.at("categories");
  std::stable_sort(cats.begin(), cats.end(), [](const json& a, const json& b) {
    return a.at("score").get<double>() > b.at("score").get<double>();
  });
  if (fs::exists(artifact("selection.json"))) stored["selection"] = read_json_file(artifact("selection.json"));
  return stored;
}

json Run::ranking(std::optional<std::string> profile) const {
  const auto path = artifact("ranking.json");
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "run has not been ranked yet");
  json stored = read_json_file(path);
  if (!profile || *profile == stored.at("profile").get<std::string>()) return stored;
  const Context ctx = load_context(read_info(), dir_ / "inputs");
  const auto prof = strata::resolve_profile(*profile, ctx.profiles);
  const auto all = vectors();
  strata::VectorTable chosen;
  for (const auto& it : stored.at("items")) {
    const auto id = it.at("patent_id").get<std::string>();
    chosen[id] = all.at(id);
  }
  const auto cat_of = category_of();
  const auto ranked = ltr::predict(ltr::load_model(input("model")), chosen, prof);
  json items = json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    items.push_back({{"rank", i + 1},
                     {"patent_id", ranked[i].patent_id},
                     {"score", ranked[i].score},
                     {"category", cat_of.at(ranked[i].patent_id)}});
  }
  stored["profile"] = prof.label;
  stored["items"] = items;
  stored["what_if"] = true;
  return stored;
}

json Run::matches() const {
  const auto path = artifact("matches.jsonl");
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "run has not been matched yet");
  json out = {{"matches", rows_to_array(read_jsonl_file(path))}};
  out["clusters"] = fs::exists(artifact("clusters.json")) ? read_json_file(artifact("clusters.json")).at("clusters")
                                                          : json::array();
  return out;
}

json Run::reports() const {
  const auto path = artifact("clusters.json");
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "run has no reports yet");
  json reports = json::array();
  const json doc_clusters = read_json_file(path);
  for (const auto& c : doc_clusters.at("clusters")) {
    const auto id = c.at("cluster_id").get<std::string>();
    reports.push_back({{"cluster_id", id},
                       {"report", read_json_file(dir_ / "reports" / (id + ".json"))},
                       {"text", read_text_file(dir_ / "reports" / (id + ".txt"))}});
  }
  return {{"reports", reports}};
}

ltr::RankerModel train_from_files(const std::vector<fs::path>& label_files, const strata::VectorTable& vectors,
                                  const ltr::Hyper& hyper) {
  std::vector<ltr::Label> labels;
  for (const auto& f : label_files) labels = ltr::merge_labels(labels, ltr::read_labels(f));
  return ltr::train(ltr::training_set_from_labels(labels, vectors), hyper);
}

}  // namespace pp::service
