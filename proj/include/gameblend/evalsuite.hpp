#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/agent.hpp"
#include "gameblend/blender.hpp"
#include "gameblend/corpus.hpp"
#include "gameblend/genmodels.hpp"
#include "gameblend/mechanics.hpp"

namespace gameblend {

// Random forest ------------------------------------------------------------

// Column-per-feature storage; values are floats, usually 0/1 one-hot bits.
struct FeatureMatrix {
  int samples = 0;
  int features = 0;
  std::vector<float> data;  // feature-major: data[f * samples + i]

  float at(int i, int f) const { return data[static_cast<std::size_t>(f) * samples + i]; }
  FeatureMatrix rows(const std::vector<int>& indices) const;
};

// Flattened one-hot tiles, 240 * vocab_size features per segment.
FeatureMatrix segment_features(const std::vector<Segment>& segments, std::size_t vocab_size);

struct ForestHyper {
  int trees = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ForestHyper from_json(const nlohmann::json& j);
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  float threshold = 0.0f;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  std::vector<double> distribution;  // class fractions, leaves only
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at 0
  const std::vector<double>& leaf(const FeatureMatrix& x, int sample) const;
};

class ForestClassifier {
 public:
  // Trains on a seeded 80/20 split and records the held-out accuracy.
  static ForestClassifier train(const FeatureMatrix& x, const std::vector<int>& labels,
                                const ForestHyper& hyper);
  // Trains on every sample; no held-out accuracy.
  static ForestClassifier fit(const FeatureMatrix& x, const std::vector<int>& labels,
                              const ForestHyper& hyper);

  // External label values, ascending. Internal class i is classes()[i].
  const std::vector<int>& classes() const { return classes_; }
  std::optional<double> test_accuracy() const { return test_accuracy_; }
  const ForestHyper& hyper() const { return hyper_; }
  int features() const { return features_; }
  std::size_t tree_count() const { return trees_.size(); }

  std::vector<double> predict_proba(const FeatureMatrix& x, int sample) const;
  // Argmax of averaged leaf distributions; ties go to the lowest class index.
  int predict_index(const FeatureMatrix& x, int sample) const;
  std::vector<int> predict(const FeatureMatrix& x) const;  // external labels

  nlohmann::json to_json() const;
  static ForestClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ForestClassifier load(const std::filesystem::path& path);

 private:
  std::vector<int> classes_;
  std::vector<DecisionTree> trees_;
  ForestHyper hyper_;
  int features_ = 0;
  std::optional<double> test_accuracy_;

  static ForestClassifier fit_indices(const FeatureMatrix& x, const std::vector<int>& labels,
                                      const std::vector<int>& rows, const ForestHyper& hyper);
};

ForestClassifier train_forest(const std::vector<Segment>& segments, const std::vector<int>& labels,
                              std::size_t vocab_size, const ForestHyper& hyper);

// Share of segments predicted as each class, in classes() order; sums to 100.
std::vector<double> predict_percentages(const ForestClassifier& clf,
                                        const std::vector<Segment>& segments,
                                        std::size_t vocab_size);

// Blend score -----------------------------------------------------------

struct BlendScore {
  double s = 0.0;
  std::vector<double> w;
  std::vector<double> p;
  double factor = 100.0;
};

// S = sum_i (w_i f - p_i)^2; f = 100 / #ones for binary weights, 100 otherwise.
BlendScore blend_score(const BlendWeights& w, const std::vector<double>& p);

// Tile-pattern KL ---------------------------------------------------------

struct TpklOptions {
  std::vector<int> windows = {2, 3, 4};
  double eps = 1e-5;
};

// Counts of every stride-1 s x s pattern, keyed by the tile ids in row-major order.
std::map<std::vector<TileId>, int> count_patterns(const std::vector<Segment>& set, int size);

// KL(P_gen || Q'_ref) averaged over window sizes, with
// q' = (1 - eps) q + eps / |support(P) u support(Q)|.
double tpkldiv(const std::vector<Segment>& gen, const std::vector<Segment>& ref,
               const TpklOptions& options = {});

// Directional match ---------------------------------------------------------

enum class MatchVerdict { kExact, kAdmissibleOnly, kInadmissible };
std::string_view to_string(MatchVerdict v);

MatchVerdict directional_match(const DirLabel& cond, const DirLabel& pred);

// Experiments ---------------------------------------------------------------

// The 2^k - 1 non-zero binary vectors, counting up with game 1 as the high bit.
std::vector<BlendWeights> binary_weights(int k);
// Fractional vectors used in the experiments for k = 4 (platformers) and k = 3 (dungeons).
std::vector<BlendWeights> default_fractional_weights(int k);

struct ExperimentSpec {
  const ModelCheckpoint* model = nullptr;
  const ForestClassifier* classifier = nullptr;      // game classifier
  const ForestClassifier* dir_classifier = nullptr;  // directional families
  std::vector<std::vector<Segment>> references;      // original segments per game
  std::vector<JumpModel> jumps;                      // per game; empty skips playability
  std::vector<BlendWeights> weights;
  int samples = 1000;
  int dir_samples = 1000;  // per directional label
  TpklOptions tpkl;
  std::uint64_t seed = 0;
  // Label for cgmvae/ccvae sampling in the classification tables.
  std::optional<DirLabel> sample_dir;
};

struct WeightRow {
  std::string weights;            // BlendWeights::label()
  std::vector<double> percentages;  // per game
  double score = 0.0;
  std::optional<double> playable;   // percent
  std::vector<double> tpkldiv;      // per game
  std::optional<double> exact;      // percent, averaged over the 15 labels
  std::optional<double> admissible;
  std::optional<double> inadmissible;
  bool operator==(const WeightRow&) const = default;
};

struct Report {
  std::string family;
  int k = 0;
  std::vector<std::string> games;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<WeightRow> rows;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  // One delimiter-separated table per evaluation.
  std::string classification_csv() const;
  std::string playability_csv() const;
  std::string tpkldiv_csv() const;
  std::string directional_csv() const;
  // report.json plus one .csv per table.
  void write(const std::filesystem::path& dir) const;
  bool operator==(const Report&) const = default;
};

Report run_experiment(const ExperimentSpec& spec);

}  // namespace gameblend
