#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pp/io.hpp"
#include "pp/params.hpp"
#include "pp/strata.hpp"

namespace pp::ltr {

// Metric ---------------------------------------------------------------------

/// Gain 2^rel - 1, discount log2(i + 1). Throws Error{NegativeRelevance}.
double dcg(const std::vector<int>& relevances, std::size_t k);
/// 1.0 when no item has positive relevance.
double ndcg(const std::vector<int>& relevances_in_ranked_order, std::size_t k);

// Gradients ------------------------------------------------------------------

/// Pairwise lambda for a pair where item i is preferred over item j.
double pair_lambda(double s_i, double s_j, double delta_ndcg, double sigma);
double pair_hessian(double s_i, double s_j, double delta_ndcg, double sigma);
/// |ΔNDCG| * log(1 + exp(-sigma (s_i - s_j))); pair_lambda is its derivative in s_i.
double pair_surrogate(double s_i, double s_j, double delta_ndcg, double sigma);

struct Gradients {
  std::vector<double> grad;
  std::vector<double> hess;
};

/// Items are ranked by score descending, ties by position. Gradients are
/// accumulated in 2^-32 fixed point so each group sums to exactly zero.
Gradients lambda_gradients(const std::vector<double>& scores, const std::vector<int>& labels,
                           std::size_t ndcg_k, double sigma);

// Trees ----------------------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(const std::vector<double>& x) const;
  std::size_t leaf_count() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct TreeParams {
  std::size_t max_leaves = 15;
  std::size_t min_samples_leaf = 5;
  double feature_fraction = 1.0;
  std::uint64_t seed = 7;
  double ridge = 1e-6;
};

/// Best-first growth on exact thresholds. A sample goes left when
/// x[feature] <= threshold. Split ties resolve to the lowest feature index,
/// then the lowest threshold.
RegressionTree fit_tree(const std::vector<std::vector<double>>& rows, const std::vector<double>& grad,
                        const std::vector<double>& hess, const TreeParams& p);

json to_json(const RegressionTree& t);
RegressionTree tree_from_json(const json& j, std::size_t n_features);

// Training -------------------------------------------------------------------

struct Item {
  std::string item_id;
  std::vector<double> x;
  int label = 0;
};

struct QueryGroup {
  std::string query_id;
  std::vector<Item> items;
};

struct TrainingSet {
  std::vector<QueryGroup> queries;
};

struct Hyper {
  std::size_t n_trees = 50;
  double learning_rate = 0.1;
  std::size_t max_leaves = 15;
  std::size_t min_samples_leaf = 5;
  std::size_t ndcg_k = 10;
  double sigma = 1.0;
  std::uint64_t seed = 7;
  double feature_fraction = 1.0;
  int max_grade = 4;
};

json to_json(const Hyper& h);

struct RankerModel {
  std::vector<std::string> feature_names;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  Hyper hyper;
  double initial_ndcg = 0.0;
  std::vector<double> ndcg_trace;

  double score(const std::vector<double>& x) const;
};

inline constexpr int kModelVersion = 1;

/// 33 values followed by 33 missing-indicator columns.
std::vector<std::string> model_feature_names();
std::vector<double> model_row(const params::FeatureVector& v);

/// Mean NDCG@k over groups, items ranked by score desc, ties by position.
double mean_ndcg(const TrainingSet& ts, const std::vector<std::vector<double>>& scores, std::size_t k);

/// Groups with fewer than two items are dropped. Throws
/// Error{InsufficientQueries}, Error{NegativeRelevance}, Error{InvalidArgument}.
RankerModel train(const TrainingSet& ts, const Hyper& hyper = {});

json to_json(const RankerModel& m);
RankerModel model_from_json(const json& j);
std::string serialize_model(const RankerModel& m);
RankerModel parse_model(std::string_view text);
void save_model(const RankerModel& m, const std::filesystem::path& path);
/// Throws Error{CorruptModel} or Error{SchemaVersionMismatch}.
RankerModel load_model(const std::filesystem::path& path);

// Labels and inference -------------------------------------------------------

struct Label {
  std::string query_id;
  std::string patent_id;
  int grade = 0;
};

json to_json(const Label& l);
Label label_from_json(const json& j);
std::vector<Label> read_labels(const std::filesystem::path& path);
/// Later entries for the same (query_id, patent_id) override earlier ones.
std::vector<Label> merge_labels(const std::vector<Label>& base, const std::vector<Label>& overrides);

/// Groups ordered by query id, items by patent id. Throws
/// Error{InvalidArgument} for a label naming an unknown patent.
TrainingSet training_set_from_labels(const std::vector<Label>& labels, const strata::VectorTable& vectors);

struct Scored {
  std::string patent_id;
  double score = 0.0;
};

/// Throws Error{FeatureOrderMismatch} when the model was trained on a
/// different feature layout.
std::vector<Scored> predict(const RankerModel& m, const strata::VectorTable& vectors,
                            const strata::WeightingProfile& profile);

}  // namespace pp::ltr
