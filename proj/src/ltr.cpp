#include "pp/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pp/error.hpp"

namespace pp::ltr {

namespace {

constexpr double kFixedScale = 4294967296.0;  // 2^32

double gain(int rel) { return std::ldexp(1.0, rel) - 1.0; }

double discount(std::size_t position, std::size_t k) {
  return position <= k ? 1.0 / std::log2(static_cast<double>(position) + 1.0) : 0.0;
}

std::vector<std::size_t> rank_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double dcg(const std::vector<int>& relevances, std::size_t k) {
  double total = 0.0;
  const std::size_t n = std::min(k, relevances.size());
  for (std::size_t i = 0; i < relevances.size(); ++i) {
    if (relevances[i] < 0) fail(ErrorCode::NegativeRelevance, "relevance " + std::to_string(relevances[i]));
  }
  for (std::size_t i = 0; i < n; ++i) total += gain(relevances[i]) * discount(i + 1, k);
  return total;
}

double ndcg(const std::vector<int>& relevances_in_ranked_order, std::size_t k) {
  std::vector<int> ideal = relevances_in_ranked_order;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal, k);
  if (best <= 0.0) return 1.0;
  return dcg(relevances_in_ranked_order, k) / best;
}

double pair_lambda(double s_i, double s_j, double delta_ndcg, double sigma) {
  return -sigma * std::abs(delta_ndcg) / (1.0 + std::exp(sigma * (s_i - s_j)));
}

double pair_hessian(double s_i, double s_j, double delta_ndcg, double sigma) {
  const double rho = 1.0 / (1.0 + std::exp(sigma * (s_i - s_j)));
  return sigma * sigma * std::abs(delta_ndcg) * rho * (1.0 - rho);
}

double pair_surrogate(double s_i, double s_j, double delta_ndcg, double sigma) {
  return std::abs(delta_ndcg) * std::log1p(std::exp(-sigma * (s_i - s_j)));
}

Gradients lambda_gradients(const std::vector<double>& scores, const std::vector<int>& labels,
                           std::size_t ndcg_k, double sigma) {
  const std::size_t n = scores.size();
  if (labels.size() != n) fail(ErrorCode::InvalidArgument, "scores and labels differ in length");
  Gradients out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (n < 2) return out;
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCode::InvalidArgument, "non-finite score");
  }

  std::vector<int> sorted_labels = labels;
  std::sort(sorted_labels.begin(), sorted_labels.end(), std::greater<>());
  const double ideal = dcg(sorted_labels, ndcg_k);
  if (ideal <= 0.0) return out;

  const auto order = rank_order(scores);
  std::vector<std::size_t> position(n);
  for (std::size_t r = 0; r < n; ++r) position[order[r]] = r + 1;

  std::vector<std::int64_t> g(n, 0);
  std::vector<std::int64_t> h(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] <= labels[j]) continue;
      const double delta = std::abs((gain(labels[i]) - gain(labels[j])) *
                                    (discount(position[i], ndcg_k) - discount(position[j], ndcg_k))) /
                           ideal;
      if (delta == 0.0) continue;
      const auto lam = static_cast<std::int64_t>(std::llround(pair_lambda(scores[i], scores[j], delta, sigma) * kFixedScale));
      const auto hes = static_cast<std::int64_t>(std::llround(pair_hessian(scores[i], scores[j], delta, sigma) * kFixedScale));
      g[i] += lam;
      g[j] -= lam;
      h[i] += hes;
      h[j] += hes;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.grad[i] = static_cast<double>(g[i]) / kFixedScale;
    out.hess[i] = static_cast<double>(h[i]) / kFixedScale;
  }
  return out;
}

double RegressionTree::evaluate(const std::vector<double>& x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& nd = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct Leaf {
  std::size_t node;
  std::vector<std::size_t> samples;
  Split best;
};

double leaf_value(const std::vector<std::size_t>& samples, const std::vector<double>& grad,
                  const std::vector<double>& hess, double ridge) {
  double g = 0.0, h = 0.0;
  for (auto s : samples) {
    g += grad[s];
    h += hess[s];
  }
  return -g / (h + ridge) + 0.0;
}

}  // namespace

RegressionTree fit_tree(const std::vector<std::vector<double>>& rows, const std::vector<double>& grad,
                        const std::vector<double>& hess, const TreeParams& p) {
  const std::size_t n = rows.size();
  if (grad.size() != n || hess.size() != n) fail(ErrorCode::InvalidArgument, "gradient length mismatch");
  if (n == 0) fail(ErrorCode::InvalidArgument, "no samples");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorCode::InvalidArgument, "ragged feature rows");
  }
  const std::size_t msl = std::max<std::size_t>(p.min_samples_leaf, 1);

  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), 0);
  if (p.feature_fraction < 1.0 && d > 1) {
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.feature_fraction * static_cast<double>(d))));
    std::mt19937_64 rng(p.seed);
    std::shuffle(features.begin(), features.end(), rng);
    features.resize(keep);
    std::sort(features.begin(), features.end());
  }

  std::vector<std::vector<std::size_t>> sorted(d);
  for (auto f : features) {
    auto& ord = sorted[f];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return rows[a][f] < rows[b][f]; });
  }

  std::vector<int> owner(n, 0);
  auto find_split = [&](const Leaf& leaf) {
    Split best;
    const std::size_t m = leaf.samples.size();
    if (m < 2 * msl) return best;
    double total = 0.0, sq = 0.0;
    for (auto s : leaf.samples) {
      total += grad[s];
      sq += grad[s] * grad[s];
    }
    const double parent = total * total / static_cast<double>(m);
    const double eps = 1e-12 * sq;
    const int id = static_cast<int>(leaf.node);
    for (auto f : features) {
      double left = 0.0;
      std::size_t n_left = 0;
      double prev = 0.0;
      for (auto s : sorted[f]) {
        if (owner[s] != id) continue;
        const double x = rows[s][f];
        if (n_left >= msl && m - n_left >= msl && x > prev) {
          const double right = total - left;
          const double g = left * left / static_cast<double>(n_left) +
                           right * right / static_cast<double>(m - n_left) - parent;
          if (g > eps && g > best.gain) {
            double thr = std::midpoint(prev, x);
            if (!(thr < x)) thr = prev;
            best = {static_cast<int>(f), thr, g};
          }
        }
        if (m - n_left < msl) break;
        left += grad[s];
        ++n_left;
        prev = x;
      }
    }
    return best;
  };

  RegressionTree tree;
  tree.nodes.push_back({});
  std::vector<Leaf> leaves;
  {
    Leaf root{0, std::vector<std::size_t>(n), {}};
    std::iota(root.samples.begin(), root.samples.end(), 0);
    root.best = find_split(root);
    leaves.push_back(std::move(root));
  }

  while (leaves.size() < std::max<std::size_t>(p.max_leaves, 1)) {
    std::size_t pick = leaves.size();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].best.feature < 0) continue;
      if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
    }
    if (pick == leaves.size()) break;

    Leaf parent = std::move(leaves[pick]);
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
    const auto f = static_cast<std::size_t>(parent.best.feature);
    Leaf l{tree.nodes.size(), {}, {}};
    Leaf r{tree.nodes.size() + 1, {}, {}};
    for (auto s : parent.samples) {
      if (rows[s][f] <= parent.best.threshold) {
        l.samples.push_back(s);
        owner[s] = static_cast<int>(l.node);
      } else {
        r.samples.push_back(s);
        owner[s] = static_cast<int>(r.node);
      }
    }
    auto& pn = tree.nodes[parent.node];
    pn.feature = parent.best.feature;
    pn.threshold = parent.best.threshold;
    pn.left = static_cast<int>(l.node);
    pn.right = static_cast<int>(r.node);
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    l.best = find_split(l);
    r.best = find_split(r);
    leaves.push_back(std::move(l));
    leaves.push_back(std::move(r));
    std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) { return a.node < b.node; });
  }

  for (const auto& leaf : leaves) tree.nodes[leaf.node].value = leaf_value(leaf.samples, grad, hess, p.ridge);
  return tree;
}

json to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return {{"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j, std::size_t n_features) {
  RegressionTree t;
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) fail(ErrorCode::CorruptModel, "tree without nodes");
  const auto count = static_cast<int>(nodes.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    TreeNode node;
    if (n.contains("value")) {
      node.value = n.at("value").get<double>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) {
        fail(ErrorCode::CorruptModel, "split feature out of range");
      }
      if (node.left <= i || node.right <= i || node.left >= count || node.right >= count) {
        fail(ErrorCode::CorruptModel, "bad child index");
      }
    }
    t.nodes.push_back(node);
  }
  return t;
}

json to_json(const Hyper& h) {
  return {{"n_trees", h.n_trees},
          {"learning_rate", h.learning_rate},
          {"max_leaves", h.max_leaves},
          {"min_samples_leaf", h.min_samples_leaf},
          {"ndcg_k", h.ndcg_k},
          {"sigma", h.sigma},
          {"seed", h.seed},
          {"feature_fraction", h.feature_fraction},
          {"max_grade", h.max_grade}};
}

double RankerModel::score(const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& t : trees) s += learning_rate * t.evaluate(x);
  return s;
}

std::vector<std::string> model_feature_names() {
  std::vector<std::string> names;
  for (auto n : params::kFeatureNames) names.emplace_back(n);
  for (auto n : params::kFeatureNames) names.push_back("missing:" + std::string(n));
  return names;
}

std::vector<double> model_row(const params::FeatureVector& v) {
  std::vector<double> row(v.values.begin(), v.values.end());
  for (bool m : v.missing_mask) row.push_back(m ? 1.0 : 0.0);
  return row;
}

double mean_ndcg(const TrainingSet& ts, const std::vector<std::vector<double>>& scores, std::size_t k) {
  if (ts.queries.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < ts.queries.size(); ++q) {
    const auto& items = ts.queries[q].items;
    std::vector<int> ranked;
    for (auto i : rank_order(scores[q])) ranked.push_back(items[i].label);
    total += ndcg(ranked, k);
  }
  return total / static_cast<double>(ts.queries.size());
}

RankerModel train(const TrainingSet& input, const Hyper& hyper) {
  TrainingSet ts;
  for (const auto& q : input.queries) {
    if (q.items.size() >= 2) ts.queries.push_back(q);
  }
  if (ts.queries.empty()) fail(ErrorCode::InsufficientQueries, "no query group with at least two items");
  if (hyper.learning_rate <= 0.0 || hyper.ndcg_k == 0 || hyper.sigma <= 0.0) {
    fail(ErrorCode::InvalidArgument, "learning_rate, sigma and ndcg_k must be positive");
  }

  std::size_t n_features = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& q : ts.queries) {
    for (const auto& it : q.items) {
      if (it.label < 0) fail(ErrorCode::NegativeRelevance, "label for " + it.item_id);
      if (it.label > hyper.max_grade) fail(ErrorCode::InvalidArgument, "label above max grade for " + it.item_id);
      if (rows.empty()) n_features = it.x.size();
      if (it.x.size() != n_features) fail(ErrorCode::InvalidArgument, "ragged feature rows");
      rows.push_back(it.x);
    }
  }

  RankerModel m;
  m.feature_names = n_features == 2 * params::kFeatureCount ? model_feature_names() : std::vector<std::string>{};
  if (m.feature_names.empty()) {
    for (std::size_t i = 0; i < n_features; ++i) m.feature_names.push_back("f" + std::to_string(i));
  }
  m.learning_rate = hyper.learning_rate;
  m.hyper = hyper;

  std::vector<std::vector<double>> scores;
  for (const auto& q : ts.queries) scores.emplace_back(q.items.size(), 0.0);
  m.initial_ndcg = mean_ndcg(ts, scores, hyper.ndcg_k);

  std::vector<double> grad(rows.size()), hess(rows.size());
  for (std::size_t t = 0; t < hyper.n_trees; ++t) {
    std::size_t offset = 0;
    for (std::size_t q = 0; q < ts.queries.size(); ++q) {
      std::vector<int> labels;
      for (const auto& it : ts.queries[q].items) labels.push_back(it.label);
      const auto gh = lambda_gradients(scores[q], labels, hyper.ndcg_k, hyper.sigma);
      std::copy(gh.grad.begin(), gh.grad.end(), grad.begin() + static_cast<std::ptrdiff_t>(offset));
      std::copy(gh.hess.begin(), gh.hess.end(), hess.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += labels.size();
    }
    TreeParams tp;
    tp.max_leaves = hyper.max_leaves;
    tp.min_samples_leaf = hyper.min_samples_leaf;
    tp.feature_fraction = hyper.feature_fraction;
    tp.seed = hyper.seed + t;
    auto tree = fit_tree(rows, grad, hess, tp);

    offset = 0;
    for (auto& s : scores) {
      for (auto& v : s) v += m.learning_rate * tree.evaluate(rows[offset++]);
    }
    m.trees.push_back(std::move(tree));
    m.ndcg_trace.push_back(mean_ndcg(ts, scores, hyper.ndcg_k));
  }
  return m;
}

json to_json(const RankerModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"version", kModelVersion},
          {"feature_names", m.feature_names},
          {"learning_rate", m.learning_rate},
          {"trees", trees},
          {"training_meta",
           {{"hyper", to_json(m.hyper)}, {"initial_ndcg", m.initial_ndcg}, {"ndcg_trace", m.ndcg_trace}}}};
}

RankerModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) fail(ErrorCode::CorruptModel, "missing version");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kModelVersion) {
    fail(ErrorCode::SchemaVersionMismatch,
         "model version " + j.at("version").dump() + ", expected " + std::to_string(kModelVersion));
  }
  try {
    RankerModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, m.feature_names.size()));
    const auto& meta = j.at("training_meta");
    const auto& h = meta.at("hyper");
    m.hyper.n_trees = h.at("n_trees").get<std::size_t>();
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.max_leaves = h.at("max_leaves").get<std::size_t>();
    m.hyper.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();
    m.hyper.ndcg_k = h.at("ndcg_k").get<std::size_t>();
    m.hyper.sigma = h.at("sigma").get<double>();
    m.hyper.seed = h.at("seed").get<std::uint64_t>();
    m.hyper.feature_fraction = h.at("feature_fraction").get<double>();
    m.hyper.max_grade = h.at("max_grade").get<int>();
    m.initial_ndcg = meta.at("initial_ndcg").get<double>();
    m.ndcg_trace = meta.at("ndcg_trace").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptModel, e.what());
  }
}

std::string serialize_model(const RankerModel& m) { return dump_json(to_json(m)); }

RankerModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptModel, e.what());
  }
  return model_from_json(j);
}

void save_model(const RankerModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(m));
}

RankerModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

json to_json(const Label& l) { return {{"query_id", l.query_id}, {"patent_id", l.patent_id}, {"grade", l.grade}}; }

Label label_from_json(const json& j) {
  Label l;
  try {
    l.query_id = j.at("query_id").get<std::string>();
    l.patent_id = j.at("patent_id").get<std::string>();
    l.grade = j.at("grade").get<int>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("label: ") + e.what());
  }
  if (l.grade < 0) fail(ErrorCode::NegativeRelevance, "grade for " + l.patent_id);
  return l;
}

std::vector<Label> read_labels(const std::filesystem::path& path) {
  std::vector<Label> out;
  for (const auto& row : read_jsonl_file(path)) out.push_back(label_from_json(row));
  return out;
}

std::vector<Label> merge_labels(const std::vector<Label>& base, const std::vector<Label>& overrides) {
  std::map<std::pair<std::string, std::string>, int> grades;
  for (const auto* src : {&base, &overrides}) {
    for (const auto& l : *src) grades[{l.query_id, l.patent_id}] = l.grade;
  }
  std::vector<Label> out;
  for (const auto& [key, grade] : grades) out.push_back({key.first, key.second, grade});
  return out;
}

TrainingSet training_set_from_labels(const std::vector<Label>& labels, const strata::VectorTable& vectors) {
  std::map<std::string, std::map<std::string, int>> groups;
  for (const auto& l : labels) {
    if (!vectors.count(l.patent_id)) fail(ErrorCode::InvalidArgument, "label for unknown patent " + l.patent_id);
    groups[l.query_id][l.patent_id] = l.grade;
  }
  TrainingSet ts;
  for (const auto& [qid, items] : groups) {
    QueryGroup g{qid, {}};
    for (const auto& [pid, grade] : items) g.items.push_back({pid, model_row(vectors.at(pid)), grade});
    ts.queries.push_back(std::move(g));
  }
  return ts;
}

std::vector<Scored> predict(const RankerModel& m, const strata::VectorTable& vectors,
                            const strata::WeightingProfile& profile) {
  if (m.feature_names != model_feature_names()) {
    fail(ErrorCode::FeatureOrderMismatch, "model feature layout does not match the 33-slot vector");
  }
  std::vector<Scored> out;
  out.reserve(vectors.size());
  for (const auto& [id, v] : vectors) out.push_back({id, m.score(model_row(strata::apply_profile(v, profile)))});
  std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  return out;
}

}  // namespace pp::ltr
