#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekma/features.hpp"
#include "ekma/rng.hpp"

namespace ekma {

struct ForestParams {
  int num_trees = 500;
  int mtry = 0;  // 0 selects floor(sqrt(p)) at training time
  int min_node_size = 5;
  std::uint64_t seed = 42;
  bool bootstrap = true;  // off only in exact-fit tests

  // Returns a copy with mtry resolved for p features; throws on invalid values.
  ForestParams resolved(std::size_t p) const;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;  // rows with x <= threshold go left
  double sse = 0.0;        // SSE(left) + SSE(right), two-pass over rows in input order

  friend bool operator==(const Split&, const Split&) = default;
};

// Internal nodes have feature >= 0 and children; leaves have feature == -1
// and `value` holds the prediction.
struct Node {
  std::int32_t feature = -1;
  double value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ForestModel {
  ForestParams params;  // mtry resolved
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  std::uint64_t training_fingerprint = 0;
};

// Best variance-reduction split of `rows` over the candidate `features`.
// Thresholds are midpoints between consecutive distinct values; ties go to
// the lower feature index, then the smaller threshold. Empty when no
// candidate feature has two distinct values among `rows`.
std::optional<Split> best_split(std::span<const std::size_t> rows, std::span<const std::size_t> features,
                                const FeatureMatrix& x, std::span<const double> y);

// Grows one depth-unlimited tree. Consumes `rng` in a fixed order: the
// bootstrap draw first, then mtry features per split node in depth-first,
// left-before-right order.
Tree grow_tree(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params, Rng& rng);

// Tree i is grown from Rng(derive_seed(seed, {i})); the result does not
// depend on thread count.
ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params);

// Mean of tree outputs per row, accumulated as a running mean in ascending
// tree order.
std::vector<double> predict(const ForestModel& model, const FeatureMatrix& x);

namespace reference {

ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params);
std::vector<double> predict(const ForestModel& model, const FeatureMatrix& x);

}  // namespace reference

void save_model(std::ostream& out, const ForestModel& model);
ForestModel load_model(std::istream& in);

}  // namespace ekma
