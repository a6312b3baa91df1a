#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyad {

/// Bagged CART classifier. Labels are dense class indices 0..n_classes-1;
/// class 1 is the "positive" class whose vote fraction predict() reports.
struct ForestConfig {
  int n_trees = 51;
  std::optional<int> max_depth;     // unlimited when empty
  int min_leaf = 1;
  std::optional<int> features_per_split;  // floor(sqrt(n_features)) when empty
  std::uint64_t seed = 0;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;     // taken when x[feature] <= threshold
  int right = -1;
  std::vector<int> counts;  // leaf class counts (empty for splits)

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Index of the leaf that x falls into.
  int leaf_for(std::span<const double> x) const;
  /// Majority class of the leaf; ties go to the lower class index.
  int predict(std::span<const double> x) const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestPrediction {
  int label = 0;
  double positive_fraction = 0.0;  // share of trees voting for class 1
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, ForestConfig config, int n_features, int n_classes);

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const ForestConfig& config() const noexcept { return config_; }
  int n_features() const noexcept { return n_features_; }
  int n_classes() const noexcept { return n_classes_; }

  /// Majority vote across trees; ties go to the lower class index.
  /// Throws DimensionMismatch.
  ForestPrediction predict(std::span<const double> x) const;

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  std::vector<DecisionTree> trees_;
  ForestConfig config_;
  int n_features_ = 0;
  int n_classes_ = 0;
};

/// Tree i draws its bootstrap sample and candidate features from
/// Pcg32(cfg.seed, i), so the forest is identical for any `jobs` value.
/// Throws EmptyTrainingSet, SingleClass, RaggedFeatures, InvalidArgument.
Forest train_forest(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                    const ForestConfig& cfg, unsigned jobs = 1);

/// Stratified k-fold mean held-out accuracy. Throws TooFewSamples.
double cross_validate(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      const ForestConfig& cfg, int k_folds, unsigned jobs = 1);

std::string forest_to_json(const Forest& forest);
/// Throws MalformedModel.
Forest forest_from_json(std::string_view text);

}  // namespace dyad
