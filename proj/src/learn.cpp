#include "dyad/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "dyad/error.hpp"
#include "dyad/parallel.hpp"
#include "dyad/rng.hpp"

namespace dyad {

int DecisionTree::leaf_for(std::span<const double> x) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& n = nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return node;
}

int DecisionTree::predict(std::span<const double> x) const {
  const auto& counts = nodes[leaf_for(x)].counts;
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Forest::Forest(std::vector<DecisionTree> trees, ForestConfig config, int n_features,
               int n_classes)
    : trees_(std::move(trees)), config_(config), n_features_(n_features), n_classes_(n_classes) {}

ForestPrediction Forest::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features_) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(n_features_) +
                                             " features, got " + std::to_string(x.size()));
  }
  std::vector<int> votes(std::max(n_classes_, 2), 0);
  for (const auto& t : trees_) ++votes[t.predict(x)];
  ForestPrediction p;
  p.label = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  p.positive_fraction =
      trees_.empty() ? 0.0 : static_cast<double>(votes[1]) / static_cast<double>(trees_.size());
  return p;
}

namespace {

struct SplitChoice {
  double score = 0.0;  // n-weighted Gini impurity of the two children
  int feature = -1;
  double threshold = 0.0;
};

double weighted_gini(const std::vector<int>& counts, int n) {
  if (n == 0) return 0.0;
  double sum_sq = 0.0;
  for (int c : counts) sum_sq += static_cast<double>(c) * c;
  return static_cast<double>(n) - sum_sq / n;
}

bool better(const SplitChoice& a, const SplitChoice& b) {
  constexpr double kEps = 1e-12;
  if (b.feature < 0) return true;
  if (a.score < b.score - kEps) return true;
  if (a.score > b.score + kEps) return false;
  return std::tie(a.feature, a.threshold) < std::tie(b.feature, b.threshold);
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              int n_classes, const ForestConfig& cfg, int mtry, Pcg32 rng)
      : X_(X), y_(y), n_classes_(n_classes), cfg_(cfg), mtry_(mtry), rng_(rng) {}

  DecisionTree build(std::vector<int> sample) {
    struct Pending {
      int node;
      std::vector<int> idx;
      int depth;
    };
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(sample), 0});
    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();

      std::vector<int> counts(n_classes_, 0);
      for (int i : p.idx) ++counts[y_[i]];
      const int n = static_cast<int>(p.idx.size());
      const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
      const bool depth_cap = cfg_.max_depth && p.depth >= *cfg_.max_depth;

      std::optional<SplitChoice> split;
      if (!pure && !depth_cap && n >= 2 * cfg_.min_leaf) split = find_split(p.idx, counts);
      if (!split) {
        tree.nodes[p.node].counts = std::move(counts);
        continue;
      }

      std::vector<int> left_idx;
      std::vector<int> right_idx;
      for (int i : p.idx) {
        (X_[i][split->feature] <= split->threshold ? left_idx : right_idx).push_back(i);
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      auto& node = tree.nodes[p.node];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, std::move(right_idx), p.depth + 1});
      stack.push_back({left, std::move(left_idx), p.depth + 1});
    }
    return tree;
  }

 private:
  // Visits features in a random order until mtry non-constant features have
  // been scored (or all features are exhausted).
  std::optional<SplitChoice> find_split(const std::vector<int>& idx, const std::vector<int>& node_counts) {
    const int n_features = static_cast<int>(X_[0].size());
    std::vector<int> order(n_features);
    std::iota(order.begin(), order.end(), 0);

    SplitChoice best;
    int scored = 0;
    std::vector<std::pair<double, int>> values(idx.size());
    for (int k = 0; k < n_features && scored < mtry_; ++k) {
      const int pick = k + static_cast<int>(rng_.below(static_cast<std::uint32_t>(n_features - k)));
      std::swap(order[k], order[pick]);
      const int f = order[k];

      for (std::size_t i = 0; i < idx.size(); ++i) values[i] = {X_[idx[i]][f], y_[idx[i]]};
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;
      ++scored;

      const int n = static_cast<int>(values.size());
      std::vector<int> left(n_classes_, 0);
      std::vector<int> right = node_counts;
      for (int i = 0; i + 1 < n; ++i) {
        ++left[values[i].second];
        --right[values[i].second];
        if (values[i].first == values[i + 1].first) continue;
        const int n_left = i + 1;
        const int n_right = n - n_left;
        if (n_left < cfg_.min_leaf || n_right < cfg_.min_leaf) continue;
        SplitChoice cand;
        cand.score = weighted_gini(left, n_left) + weighted_gini(right, n_right);
        cand.feature = f;
        cand.threshold = 0.5 * (values[i].first + values[i + 1].first);
        // The midpoint can round onto the upper value for adjacent doubles.
        if (!(cand.threshold < values[i + 1].first)) cand.threshold = values[i].first;
        if (better(cand, best)) best = cand;
      }
    }
    if (best.feature < 0) return std::nullopt;
    return best;
  }

  const std::vector<std::vector<double>>& X_;
  const std::vector<int>& y_;
  int n_classes_;
  const ForestConfig& cfg_;
  int mtry_;
  Pcg32 rng_;
};

int check_training_set(const std::vector<std::vector<double>>& X, const std::vector<int>& y) {
  if (X.empty() || y.empty()) throw Error(Errc::EmptyTrainingSet, "no training rows");
  if (X.size() != y.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(X.size()) + " rows vs " +
                                          std::to_string(y.size()) + " labels");
  }
  const std::size_t dim = X[0].size();
  if (dim == 0) throw Error(Errc::RaggedFeatures, "rows have no features");
  for (const auto& row : X) {
    if (row.size() != dim) throw Error(Errc::RaggedFeatures, "rows differ in feature count");
  }
  int max_label = 0;
  for (int label : y) {
    if (label < 0) throw Error(Errc::InvalidArgument, "labels must be >= 0");
    max_label = std::max(max_label, label);
  }
  if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
    throw Error(Errc::SingleClass, "all training labels are " + std::to_string(y[0]));
  }
  return max_label + 1;
}

}  // namespace

Forest train_forest(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                    const ForestConfig& cfg, unsigned jobs) {
  const int n_classes = check_training_set(X, y);
  if (cfg.n_trees < 1 || cfg.min_leaf < 1 || (cfg.max_depth && *cfg.max_depth < 0) ||
      (cfg.features_per_split && *cfg.features_per_split < 1)) {
    throw Error(Errc::InvalidArgument, "invalid forest configuration");
  }
  const int n_features = static_cast<int>(X[0].size());
  const int mtry = std::min(
      n_features, cfg.features_per_split.value_or(std::max(
                      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features)))))));
  const auto n = static_cast<std::uint32_t>(X.size());

  std::vector<DecisionTree> trees(cfg.n_trees);
  parallel_for(trees.size(), jobs, [&](std::size_t t) {
    Pcg32 rng(cfg.seed, t);
    std::vector<int> sample(n);
    for (auto& s : sample) s = static_cast<int>(rng.below(n));
    TreeBuilder builder(X, y, n_classes, cfg, mtry, rng);
    trees[t] = builder.build(std::move(sample));
  });
  return Forest(std::move(trees), cfg, n_features, n_classes);
}

double cross_validate(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      const ForestConfig& cfg, int k_folds, unsigned jobs) {
  if (k_folds < 2 || X.size() < static_cast<std::size_t>(k_folds)) {
    throw Error(Errc::TooFewSamples, std::to_string(X.size()) + " samples for " +
                                         std::to_string(k_folds) + " folds");
  }
  const int n_classes = check_training_set(X, y);

  // Stratify: shuffle each class, then deal rows round-robin across folds.
  std::vector<int> fold_of(X.size(), 0);
  int dealt = 0;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) members.push_back(static_cast<int>(i));
    }
    Pcg32 rng(mix_seed(cfg.seed, 0xcf01d), static_cast<std::uint64_t>(c));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(static_cast<std::uint32_t>(i))]);
    }
    for (int m : members) fold_of[m] = dealt++ % k_folds;
  }

  double total = 0.0;
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    std::vector<int> test;
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (fold_of[i] == fold) {
        test.push_back(static_cast<int>(i));
      } else {
        train_x.push_back(X[i]);
        train_y.push_back(y[i]);
      }
    }
    const Forest forest = train_forest(train_x, train_y, cfg, jobs);
    int correct = 0;
    for (int i : test) correct += forest.predict(X[i]).label == y[i] ? 1 : 0;
    total += static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return total / k_folds;
}

// --------------------------------------------------------------------------
// Serialization

using json = nlohmann::json;

std::string forest_to_json(const Forest& forest) {
  json doc;
  const auto& cfg = forest.config();
  doc["n_features"] = forest.n_features();
  doc["n_classes"] = forest.n_classes();
  doc["config"] = {{"n_trees", cfg.n_trees},
                   {"max_depth", cfg.max_depth ? json(*cfg.max_depth) : json(nullptr)},
                   {"min_leaf", cfg.min_leaf},
                   {"features_per_split",
                    cfg.features_per_split ? json(*cfg.features_per_split) : json(nullptr)},
                   {"seed", cfg.seed}};
  json trees = json::array();
  for (const auto& t : forest.trees()) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"counts", n.counts}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump() + "\n";
}

Forest forest_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    ForestConfig cfg;
    const auto& c = doc.at("config");
    cfg.n_trees = c.at("n_trees").get<int>();
    if (!c.at("max_depth").is_null()) cfg.max_depth = c.at("max_depth").get<int>();
    cfg.min_leaf = c.at("min_leaf").get<int>();
    if (!c.at("features_per_split").is_null()) {
      cfg.features_per_split = c.at("features_per_split").get<int>();
    }
    cfg.seed = c.at("seed").get<std::uint64_t>();
    const int n_features = doc.at("n_features").get<int>();
    const int n_classes = doc.at("n_classes").get<int>();
    if (n_features < 1 || n_classes < 2) {
      throw Error(Errc::MalformedModel, "bad feature or class count");
    }

    std::vector<DecisionTree> trees;
    for (const auto& jt : doc.at("trees")) {
      DecisionTree tree;
      for (const auto& jn : jt) {
        TreeNode node;
        if (jn.contains("counts")) {
          node.counts = jn.at("counts").get<std::vector<int>>();
          if (static_cast<int>(node.counts.size()) != n_classes) {
            throw Error(Errc::MalformedModel, "leaf count width mismatch");
          }
        } else {
          node.feature = jn.at("feature").get<int>();
          node.threshold = jn.at("threshold").get<double>();
          node.left = jn.at("left").get<int>();
          node.right = jn.at("right").get<int>();
          if (node.feature < 0) throw Error(Errc::MalformedModel, "negative split feature");
        }
        tree.nodes.push_back(std::move(node));
      }
      const int size = static_cast<int>(tree.nodes.size());
      if (size == 0) throw Error(Errc::MalformedModel, "empty tree");
      for (int i = 0; i < size; ++i) {
        const auto& n = tree.nodes[i];
        if (n.is_leaf()) continue;
        if (n.feature >= n_features || n.left <= i || n.right <= i || n.left >= size ||
            n.right >= size) {
          throw Error(Errc::MalformedModel, "bad split node " + std::to_string(i));
        }
      }
      trees.push_back(std::move(tree));
    }
    if (static_cast<int>(trees.size()) != cfg.n_trees) {
      throw Error(Errc::MalformedModel, "tree count does not match config");
    }
    return Forest(std::move(trees), cfg, n_features, n_classes);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, e.what());
  }
}

}  // namespace dyad
