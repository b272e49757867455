#include "ekma/forest.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "ekma/error.hpp"

namespace ekma {

ForestParams ForestParams::resolved(std::size_t p) const {
  ForestParams out = *this;
  if (p == 0) throw Error("forest: no features");
  if (out.mtry == 0) {
    out.mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
  }
  if (out.num_trees < 1) throw Error("forest: num_trees must be >= 1");
  if (out.mtry < 1 || static_cast<std::size_t>(out.mtry) > p) {
    throw Error("forest: mtry " + std::to_string(out.mtry) + " outside [1, " + std::to_string(p) + "]");
  }
  if (out.min_node_size < 1) throw Error("forest: min_node_size must be >= 1");
  return out;
}

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const Node& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.value ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
}

namespace {

// Column-major copy of the training matrix.
struct Columns {
  std::size_t rows = 0;
  std::vector<std::vector<double>> data;

  explicit Columns(const FeatureMatrix& x) : rows(x.rows()), data(x.cols(), std::vector<double>(x.rows())) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) data[c][r] = x.at(r, c);
    }
  }
};

double midpoint(double a, double b) {
  const double m = 0.5 * (a + b);
  return m < b ? m : a;
}

double two_pass_sse(std::span<const std::size_t> rows, const std::vector<double>& col, std::span<const double> y,
                    double threshold) {
  double sum[2] = {0.0, 0.0};
  std::size_t n[2] = {0, 0};
  for (const std::size_t r : rows) {
    const int side = col[r] <= threshold ? 0 : 1;
    sum[side] += y[r];
    ++n[side];
  }
  const double mean[2] = {sum[0] / static_cast<double>(n[0]), sum[1] / static_cast<double>(n[1])};
  double sse[2] = {0.0, 0.0};
  for (const std::size_t r : rows) {
    const int side = col[r] <= threshold ? 0 : 1;
    const double d = y[r] - mean[side];
    sse[side] += d * d;
  }
  return sse[0] + sse[1];
}

struct Candidate {
  std::size_t feature;
  double threshold;
  double score;  // prefix-sum SSE, subject to rounding
};

// Scratch buffers reused across nodes of one tree.
struct SplitScratch {
  std::vector<std::pair<double, double>> xy;
  std::vector<Candidate> candidates;
};

// Scans every (feature, midpoint) with prefix sums, then settles the winner
// on the two-pass SSE among candidates whose prefix score is within rounding
// distance of the best. Candidates are generated in (feature, threshold)
// order, so the first strict minimum is the tie-break winner.
std::optional<Split> find_best(std::span<const std::size_t> rows, std::span<const std::size_t> features,
                               const Columns& cols, std::span<const double> y, SplitScratch& scratch) {
  const std::size_t n = rows.size();
  double total = 0.0;
  double total_sq = 0.0;
  for (const std::size_t r : rows) {
    total += y[r];
    total_sq += y[r] * y[r];
  }

  auto& xy = scratch.xy;
  auto& candidates = scratch.candidates;
  candidates.clear();
  double best_score = std::numeric_limits<double>::infinity();
  for (const std::size_t f : features) {
    const auto& col = cols.data[f];
    xy.clear();
    for (const std::size_t r : rows) xy.emplace_back(col[r], y[r]);
    std::sort(xy.begin(), xy.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (xy.front().first == xy.back().first) continue;

    double left = 0.0;
    double left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += xy[i].second;
      left_sq += xy[i].second * xy[i].second;
      if (!(xy[i].first < xy[i + 1].first)) continue;
      const auto nl = static_cast<double>(i + 1);
      const auto nr = static_cast<double>(n - i - 1);
      const double right = total - left;
      const double right_sq = total_sq - left_sq;
      const double score = (left_sq - left * left / nl) + (right_sq - right * right / nr);
      candidates.push_back({f, midpoint(xy[i].first, xy[i + 1].first), score});
      best_score = std::min(best_score, score);
    }
  }
  if (candidates.empty()) return std::nullopt;

  const double window = 64.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * total_sq;
  std::optional<Split> best;
  for (const Candidate& c : candidates) {
    if (c.score > best_score + window) continue;
    const double sse = two_pass_sse(rows, cols.data[c.feature], y, c.threshold);
    if (!best || sse < best->sse) best = Split{c.feature, c.threshold, sse};
  }
  return best;
}

bool constant_targets(std::span<const std::size_t> rows, std::span<const double> y) {
  const double first = y[rows.front()];
  return std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y[r] == first; });
}

double running_mean(std::span<const std::size_t> rows, std::span<const double> y) {
  double mean = 0.0;
  double count = 0.0;
  for (const std::size_t r : rows) {
    count += 1.0;
    mean += (y[r] - mean) / count;
  }
  return mean;
}

Tree grow(const Columns& cols, std::span<const double> y, const ForestParams& params, Rng& rng) {
  const std::size_t n = cols.rows;
  const std::size_t p = cols.data.size();
  if (n == 0) throw Error("grow_tree: empty training set");

  std::vector<std::size_t> sample(n);
  if (params.bootstrap) {
    for (auto& s : sample) s = static_cast<std::size_t>(rng.uniform_index(n));
  } else {
    std::iota(sample.begin(), sample.end(), std::size_t{0});
  }

  Tree tree;
  tree.nodes.emplace_back();
  struct Pending {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Pending> stack{{0, 0, n}};
  std::vector<std::size_t> feature_pool(p);
  std::vector<std::size_t> drawn;
  SplitScratch scratch;
  const auto mtry = static_cast<std::size_t>(params.mtry);
  const auto min_split = 2 * static_cast<std::size_t>(params.min_node_size);

  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    const std::span<std::size_t> rows(sample.data() + cur.begin, cur.end - cur.begin);

    std::optional<Split> split;
    if (rows.size() >= min_split && !constant_targets(rows, y)) {
      // Partial Fisher-Yates: first mtry entries are a uniform draw without replacement.
      std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < mtry; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(p - i));
        std::swap(feature_pool[i], feature_pool[j]);
      }
      drawn.assign(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(mtry));
      std::sort(drawn.begin(), drawn.end());
      split = find_best(rows, drawn, cols, y, scratch);
    }

    if (!split) {
      tree.nodes[cur.node].value = running_mean(rows, y);
      continue;
    }

    const auto& col = cols.data[split->feature];
    const auto mid = std::stable_partition(rows.begin(), rows.end(),
                                           [&](std::size_t r) { return col[r] <= split->threshold; });
    const std::size_t left_end = cur.begin + static_cast<std::size_t>(mid - rows.begin());

    const auto left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    Node& node = tree.nodes[cur.node];
    node.feature = static_cast<std::int32_t>(split->feature);
    node.value = split->threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({static_cast<std::size_t>(left) + 1, left_end, cur.end});
    stack.push_back({static_cast<std::size_t>(left), cur.begin, left_end});
  }
  return tree;
}

void check_training_inputs(const FeatureMatrix& x, std::span<const double> y) {
  if (y.size() != x.rows()) throw Error("forest: target length does not match row count");
  if (!x.fully_observed()) throw Error("forest: training matrix has missing values");
  if (std::any_of(y.begin(), y.end(), [](double v) { return is_missing(v); })) {
    throw Error("forest: training target has missing values");
  }
}

std::uint64_t fingerprint(const FeatureMatrix& x, std::span<const double> y) {
  FeatureMatrix copy = x;
  copy.target().assign(y.begin(), y.end());
  return checksum(copy);
}

ForestModel empty_model(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params) {
  check_training_inputs(x, y);
  if (x.rows() < 2) throw Error("train_forest: need at least 2 rows");
  ForestModel model;
  model.params = params.resolved(x.cols());
  model.feature_names = x.column_names();
  model.training_fingerprint = fingerprint(x, y);
  model.trees.resize(static_cast<std::size_t>(model.params.num_trees));
  return model;
}

void check_prediction_inputs(const ForestModel& model, const FeatureMatrix& x) {
  if (x.column_names() != model.feature_names) throw Error("predict: matrix columns do not match the model");
  if (!x.fully_observed()) throw Error("predict: matrix has missing values");
}

double predict_row(const ForestModel& model, std::span<const double> row) {
  double mean = 0.0;
  double count = 0.0;
  for (const Tree& t : model.trees) {
    count += 1.0;
    mean += (t.predict(row) - mean) / count;
  }
  return mean;
}

}  // namespace

std::optional<Split> best_split(std::span<const std::size_t> rows, std::span<const std::size_t> features,
                                const FeatureMatrix& x, std::span<const double> y) {
  if (rows.size() < 2 || features.empty()) return std::nullopt;
  std::vector<std::size_t> sorted(features.begin(), features.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const Columns cols(x);
  SplitScratch scratch;
  return find_best(rows, sorted, cols, y, scratch);
}

Tree grow_tree(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params, Rng& rng) {
  check_training_inputs(x, y);
  return grow(Columns(x), y, params.resolved(x.cols()), rng);
}

ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params) {
  ForestModel model = empty_model(x, y, params);
  const Columns cols(x);
  const auto count = static_cast<std::ptrdiff_t>(model.trees.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(model.params.seed, {static_cast<std::uint64_t>(i)}));
    model.trees[static_cast<std::size_t>(i)] = grow(cols, y, model.params, rng);
  }
  return model;
}

std::vector<double> predict(const ForestModel& model, const FeatureMatrix& x) {
  check_prediction_inputs(model, x);
  // Tree-major within a block of rows keeps one tree hot in cache. Each row
  // still sees the trees in order, so the running mean matches predict_row.
  constexpr std::size_t kBlock = 256;
  std::vector<double> out(x.rows());
  const auto blocks = static_cast<std::ptrdiff_t>((x.rows() + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(x.rows(), begin + kBlock);
    double count = 0.0;
    for (std::size_t r = begin; r < end; ++r) out[r] = 0.0;
    for (const Tree& t : model.trees) {
      count += 1.0;
      for (std::size_t r = begin; r < end; ++r) out[r] += (t.predict(x.row(r)) - out[r]) / count;
    }
  }
  return out;
}

namespace reference {

ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params) {
  ForestModel model = empty_model(x, y, params);
  const Columns cols(x);
  for (std::size_t i = 0; i < model.trees.size(); ++i) {
    Rng rng(derive_seed(model.params.seed, {i}));
    model.trees[i] = grow(cols, y, model.params, rng);
  }
  return model;
}

std::vector<double> predict(const ForestModel& model, const FeatureMatrix& x) {
  check_prediction_inputs(model, x);
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(model, x.row(r));
  return out;
}

}  // namespace reference

namespace {

constexpr const char* kModelTag = "ekma-forest";
constexpr int kModelVersion = 1;

std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("model: bad number \"" + s + "\"");
  return v;
}

template <class T>
T expect_field(std::istream& in, const char* key) {
  std::string k;
  T v{};
  if (!(in >> k) || k != key || !(in >> v)) {
    throw FormatError(std::string("model: expected field \"") + key + "\"");
  }
  return v;
}

}  // namespace

void save_model(std::ostream& out, const ForestModel& model) {
  const ForestParams& p = model.params;
  out << kModelTag << ' ' << kModelVersion << '\n';
  out << "num_trees " << p.num_trees << '\n';
  out << "mtry " << p.mtry << '\n';
  out << "min_node_size " << p.min_node_size << '\n';
  out << "seed " << p.seed << '\n';
  out << "bootstrap " << (p.bootstrap ? 1 : 0) << '\n';
  char fp[24];
  std::snprintf(fp, sizeof fp, "%016" PRIx64, model.training_fingerprint);
  out << "fingerprint " << fp << '\n';
  out << "features " << model.feature_names.size();
  for (const auto& name : model.feature_names) out << ' ' << name;
  out << '\n';
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes;
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (const Node& n : nodes) {
      out << n.feature << ' ' << hex_double(n.value) << ' ' << n.left << ' ' << n.right << '\n';
    }
  }
}

ForestModel load_model(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag) || tag != kModelTag) throw FormatError("model: missing format tag");
  if (!(in >> version) || version != kModelVersion) {
    throw FormatError("model: unsupported format version " + std::to_string(version));
  }
  ForestModel model;
  ForestParams& p = model.params;
  p.num_trees = expect_field<int>(in, "num_trees");
  p.mtry = expect_field<int>(in, "mtry");
  p.min_node_size = expect_field<int>(in, "min_node_size");
  p.seed = expect_field<std::uint64_t>(in, "seed");
  p.bootstrap = expect_field<int>(in, "bootstrap") != 0;
  const auto fp = expect_field<std::string>(in, "fingerprint");
  model.training_fingerprint = std::strtoull(fp.c_str(), nullptr, 16);
  const auto n_features = expect_field<std::size_t>(in, "features");
  model.feature_names.resize(n_features);
  for (auto& name : model.feature_names) {
    if (!(in >> name)) throw FormatError("model: truncated feature list");
  }
  model.params = p.resolved(n_features);

  model.trees.resize(static_cast<std::size_t>(p.num_trees));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    std::string k;
    std::size_t index = 0;
    std::size_t count = 0;
    if (!(in >> k >> index >> count) || k != "tree" || index != t || count == 0) {
      throw FormatError("model: bad header for tree " + std::to_string(t));
    }
    auto& nodes = model.trees[t].nodes;
    nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::string value;
      Node& n = nodes[i];
      if (!(in >> n.feature >> value >> n.left >> n.right)) {
        throw FormatError("model: truncated tree " + std::to_string(t));
      }
      n.value = parse_hex_double(value);
      const auto limit = static_cast<std::int32_t>(count);
      if (n.feature >= static_cast<std::int32_t>(n_features) ||
          (!n.is_leaf() && (n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
                            n.left >= limit || n.right >= limit))) {
        throw FormatError("model: invalid node " + std::to_string(i) + " in tree " + std::to_string(t));
      }
    }
  }
  return model;
}

}  // namespace ekma
