#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gameblend/errors.hpp"
#include "gameblend/evalsuite.hpp"

namespace gameblend {

FeatureMatrix FeatureMatrix::rows(const std::vector<int>& indices) const {
  FeatureMatrix out;
  out.samples = static_cast<int>(indices.size());
  out.features = features;
  out.data.resize(static_cast<std::size_t>(out.samples) * features);
  for (int f = 0; f < features; ++f) {
    for (int i = 0; i < out.samples; ++i) {
      out.data[static_cast<std::size_t>(f) * out.samples + i] = at(indices[static_cast<std::size_t>(i)], f);
    }
  }
  return out;
}

FeatureMatrix segment_features(const std::vector<Segment>& segments, std::size_t vocab_size) {
  FeatureMatrix x;
  x.samples = static_cast<int>(segments.size());
  x.features = kSegmentCells * static_cast<int>(vocab_size);
  x.data.assign(static_cast<std::size_t>(x.samples) * x.features, 0.0f);
  for (int i = 0; i < x.samples; ++i) {
    const TileGrid& g = segments[static_cast<std::size_t>(i)].grid;
    if (static_cast<int>(g.cells.size()) != kSegmentCells) throw BadShape("segment is not 15x16");
    for (int cell = 0; cell < kSegmentCells; ++cell) {
      const std::size_t tile = g.cells[static_cast<std::size_t>(cell)];
      if (tile >= vocab_size) throw DimMismatch("tile id outside the vocabulary");
      const std::size_t f = static_cast<std::size_t>(cell) * vocab_size + tile;
      x.data[f * x.samples + i] = 1.0f;
    }
  }
  return x;
}

nlohmann::json ForestHyper::to_json() const {
  return {{"trees", trees}, {"max_depth", max_depth}, {"min_leaf", min_leaf},
          {"test_fraction", test_fraction}, {"seed", seed}};
}

ForestHyper ForestHyper::from_json(const nlohmann::json& j) {
  ForestHyper h;
  h.trees = j.value("trees", h.trees);
  h.max_depth = j.value("max_depth", h.max_depth);
  h.min_leaf = j.value("min_leaf", h.min_leaf);
  h.test_fraction = j.value("test_fraction", h.test_fraction);
  h.seed = j.value("seed", h.seed);
  if (h.trees < 1 || h.min_leaf < 1 || h.max_depth < 0 || h.test_fraction <= 0.0 ||
      h.test_fraction >= 1.0) {
    throw UsageError("bad forest hyperparameters");
  }
  return h;
}

const std::vector<double>& DecisionTree::leaf(const FeatureMatrix& x, int sample) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(n)];
    n = x.at(sample, node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(n)].distribution;
}

namespace {

struct Split {
  int feature = -1;
  float threshold = 0.0f;
  double purity = -1.0;  // sum over children of sum_c n_c^2 / n; larger is better
};

double child_purity(const std::vector<int>& counts, int n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (int c : counts) s += double(c) * c;
  return s / n;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const std::vector<int>& y, int classes,
              const std::vector<char>& binary, const ForestHyper& hyper, Rng& rng)
      : x_(x), y_(y), classes_(classes), binary_(binary), hyper_(hyper), rng_(rng) {
    mtry_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.features))));
    order_.resize(static_cast<std::size_t>(x.features));
    std::iota(order_.begin(), order_.end(), 0);
  }

  DecisionTree build(std::vector<int> rows) {
    DecisionTree tree;
    struct Job {
      int node;
      std::vector<int> rows;
      int depth;
    };
    std::vector<Job> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(rows), 0});
    while (!stack.empty()) {
      Job job = std::move(stack.back());
      stack.pop_back();
      std::vector<int> counts(static_cast<std::size_t>(classes_), 0);
      for (int r : job.rows) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
      const int n = static_cast<int>(job.rows.size());
      const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
      const bool too_deep = hyper_.max_depth > 0 && job.depth >= hyper_.max_depth;
      Split split;
      if (!pure && !too_deep && n >= 2 * hyper_.min_leaf) split = best_split(job.rows, counts);
      if (split.feature < 0) {
        TreeNode& leaf = tree.nodes[static_cast<std::size_t>(job.node)];
        leaf.distribution.resize(counts.size());
        for (std::size_t c = 0; c < counts.size(); ++c) leaf.distribution[c] = double(counts[c]) / n;
        continue;
      }
      std::vector<int> left, right;
      for (int r : job.rows) {
        (x_.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
      }
      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = li;
      node.right = li + 1;
      stack.push_back({li + 1, std::move(right), job.depth + 1});
      stack.push_back({li, std::move(left), job.depth + 1});
    }
    return tree;
  }

 private:
  // Draws features without replacement until mtry non-constant ones have
  // been scored or all features are exhausted.
  Split best_split(const std::vector<int>& rows, const std::vector<int>& counts) {
    Split best;
    const int n = static_cast<int>(rows.size());
    int scored = 0;
    for (int drawn = 0; drawn < x_.features && scored < mtry_; ++drawn) {
      std::uniform_int_distribution<int> pick(drawn, x_.features - 1);
      std::swap(order_[static_cast<std::size_t>(drawn)], order_[static_cast<std::size_t>(pick(rng_))]);
      const int f = order_[static_cast<std::size_t>(drawn)];
      const bool found = binary_[static_cast<std::size_t>(f)] ? score_binary(f, rows, counts, n, best)
                                                              : score_sorted(f, rows, counts, n, best);
      scored += found;
    }
    return best;
  }

  bool score_binary(int f, const std::vector<int>& rows, const std::vector<int>& counts, int n,
                    Split& best) {
    std::vector<int> ones(counts.size(), 0);
    int n_ones = 0;
    for (int r : rows) {
      if (x_.at(r, f) > 0.5f) {
        ++ones[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
        ++n_ones;
      }
    }
    if (n_ones == 0 || n_ones == n) return false;
    if (n_ones < hyper_.min_leaf || n - n_ones < hyper_.min_leaf) return true;
    std::vector<int> zeros(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) zeros[c] = counts[c] - ones[c];
    const double purity = child_purity(zeros, n - n_ones) + child_purity(ones, n_ones);
    if (purity > best.purity) best = {f, 0.5f, purity};
    return true;
  }

  bool score_sorted(int f, const std::vector<int>& rows, const std::vector<int>& counts, int n,
                    Split& best) {
    std::vector<std::pair<float, int>> v;
    v.reserve(rows.size());
    for (int r : rows) v.emplace_back(x_.at(r, f), y_[static_cast<std::size_t>(r)]);
    std::sort(v.begin(), v.end());
    if (v.front().first == v.back().first) return false;
    std::vector<int> left(counts.size(), 0), right = counts;
    for (int i = 0; i + 1 < n; ++i) {
      const auto c = static_cast<std::size_t>(v[static_cast<std::size_t>(i)].second);
      ++left[c];
      --right[c];
      const float a = v[static_cast<std::size_t>(i)].first, b = v[static_cast<std::size_t>(i) + 1].first;
      if (a == b) continue;
      const int nl = i + 1;
      if (nl < hyper_.min_leaf || n - nl < hyper_.min_leaf) continue;
      const double purity = child_purity(left, nl) + child_purity(right, n - nl);
      if (purity > best.purity) {
        float mid = a + (b - a) / 2.0f;
        if (mid >= b) mid = a;
        best = {f, mid, purity};
      }
    }
    return true;
  }

  const FeatureMatrix& x_;
  const std::vector<int>& y_;
  int classes_;
  const std::vector<char>& binary_;
  const ForestHyper& hyper_;
  Rng& rng_;
  int mtry_ = 1;
  std::vector<int> order_;
};

}  // namespace

ForestClassifier ForestClassifier::fit_indices(const FeatureMatrix& x, const std::vector<int>& labels,
                                               const std::vector<int>& rows, const ForestHyper& hyper) {
  if (static_cast<int>(labels.size()) != x.samples) throw DimMismatch("one label per sample required");
  if (rows.empty()) throw EmptySet("no training samples");
  ForestClassifier clf;
  clf.hyper_ = hyper;
  clf.features_ = x.features;
  for (int r : rows) clf.classes_.push_back(labels[static_cast<std::size_t>(r)]);
  std::sort(clf.classes_.begin(), clf.classes_.end());
  clf.classes_.erase(std::unique(clf.classes_.begin(), clf.classes_.end()), clf.classes_.end());
  if (clf.classes_.size() < 2) throw SingleClass();

  std::vector<int> y(labels.size(), 0);
  for (int r : rows) {
    const int label = labels[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(r)] = static_cast<int>(
        std::lower_bound(clf.classes_.begin(), clf.classes_.end(), label) - clf.classes_.begin());
  }
  std::vector<char> binary(static_cast<std::size_t>(x.features), 1);
  for (int f = 0; f < x.features; ++f) {
    for (int r : rows) {
      const float v = x.at(r, f);
      if (v != 0.0f && v != 1.0f) {
        binary[static_cast<std::size_t>(f)] = 0;
        break;
      }
    }
  }
  for (int t = 0; t < hyper.trees; ++t) {
    Rng rng = derive_rng(hyper.seed, static_cast<std::uint64_t>(t) + 1);
    std::uniform_int_distribution<std::size_t> draw(0, rows.size() - 1);
    std::vector<int> boot(rows.size());
    for (int& b : boot) b = rows[draw(rng)];
    TreeBuilder builder(x, y, static_cast<int>(clf.classes_.size()), binary, hyper, rng);
    clf.trees_.push_back(builder.build(std::move(boot)));
  }
  return clf;
}

ForestClassifier ForestClassifier::fit(const FeatureMatrix& x, const std::vector<int>& labels,
                                       const ForestHyper& hyper) {
  std::vector<int> rows(static_cast<std::size_t>(x.samples));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_indices(x, labels, rows, hyper);
}

ForestClassifier ForestClassifier::train(const FeatureMatrix& x, const std::vector<int>& labels,
                                         const ForestHyper& hyper) {
  std::vector<int> order(static_cast<std::size_t>(x.samples));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = derive_rng(hyper.seed, 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::lround(hyper.test_fraction * x.samples));
  if (n_test == 0 || n_test >= order.size()) throw EmptySet("too few samples for a train/test split");
  const std::vector<int> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<int> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  ForestClassifier clf = fit_indices(x, labels, train, hyper);
  int correct = 0;
  for (int r : test) {
    correct += clf.classes_[static_cast<std::size_t>(clf.predict_index(x, r))] ==
               labels[static_cast<std::size_t>(r)];
  }
  clf.test_accuracy_ = double(correct) / static_cast<double>(test.size());
  return clf;
}

std::vector<double> ForestClassifier::predict_proba(const FeatureMatrix& x, int sample) const {
  if (x.features != features_) throw DimMismatch("feature count differs from the training data");
  std::vector<double> p(classes_.size(), 0.0);
  for (const DecisionTree& t : trees_) {
    const std::vector<double>& d = t.leaf(x, sample);
    for (std::size_t c = 0; c < p.size(); ++c) p[c] += d[c];
  }
  for (double& v : p) v /= static_cast<double>(trees_.size());
  return p;
}

int ForestClassifier::predict_index(const FeatureMatrix& x, int sample) const {
  const std::vector<double> p = predict_proba(x, sample);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<int> ForestClassifier::predict(const FeatureMatrix& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.samples));
  for (int i = 0; i < x.samples; ++i) {
    out[static_cast<std::size_t>(i)] = classes_[static_cast<std::size_t>(predict_index(x, i))];
  }
  return out;
}

nlohmann::json ForestClassifier::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& t : trees_) {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(),
                   dist = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      dist.push_back(n.distribution);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                     {"right", right}, {"distribution", dist}});
  }
  nlohmann::json j = {{"format", "gameblend-forest"}, {"classes", classes_},
                      {"features", features_}, {"hyper", hyper_.to_json()}, {"trees", trees},
                      {"feature_encoding", "flattened one-hot tiles"}};
  j["test_accuracy"] = test_accuracy_ ? nlohmann::json(*test_accuracy_) : nlohmann::json();
  return j;
}

ForestClassifier ForestClassifier::from_json(const nlohmann::json& j) {
  ForestClassifier clf;
  try {
    clf.classes_ = j.at("classes").get<std::vector<int>>();
    clf.features_ = j.at("features").get<int>();
    clf.hyper_ = ForestHyper::from_json(j.at("hyper"));
    if (!j.at("test_accuracy").is_null()) clf.test_accuracy_ = j["test_accuracy"].get<double>();
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<float>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto dist = t.at("distribution").get<std::vector<std::vector<double>>>();
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n || dist.size() != n) {
        throw DataError("forest tree arrays differ in length");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const bool leaf = feature[i] < 0;
        const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
        if (leaf ? dist[i].size() != clf.classes_.size()
                 : (feature[i] >= clf.features_ || !in_range(left[i]) || !in_range(right[i]))) {
          throw DataError("malformed forest node");
        }
        tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], dist[i]});
      }
      if (tree.nodes.empty()) throw DataError("empty forest tree");
      clf.trees_.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad forest file: ") + e.what());
  }
  if (clf.trees_.empty()) throw DataError("forest has no trees");
  return clf;
}

void ForestClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

ForestClassifier ForestClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ForestClassifier train_forest(const std::vector<Segment>& segments, const std::vector<int>& labels,
                              std::size_t vocab_size, const ForestHyper& hyper) {
  return ForestClassifier::train(segment_features(segments, vocab_size), labels, hyper);
}

std::vector<double> predict_percentages(const ForestClassifier& clf,
                                        const std::vector<Segment>& segments,
                                        std::size_t vocab_size) {
  if (segments.empty()) throw EmptySet("no segments to classify");
  const FeatureMatrix x = segment_features(segments, vocab_size);
  std::vector<int> counts(clf.classes().size(), 0);
  for (int i = 0; i < x.samples; ++i) ++counts[static_cast<std::size_t>(clf.predict_index(x, i))];
  std::vector<double> p(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) p[c] = 100.0 * counts[c] / x.samples;
  return p;
}

}  // namespace gameblend
