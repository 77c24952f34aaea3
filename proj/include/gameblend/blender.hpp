#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gameblend/corpus.hpp"
#include "gameblend/genmodels.hpp"
#include "gameblend/numerics.hpp"

namespace gameblend {

enum class WeightKind { kBinary, kFractional };

// Per-game blend proportions. Never all zero; binary weights are 0/1.
class BlendWeights {
 public:
  // Kind is binary when every entry is 0 or 1.
  explicit BlendWeights(std::vector<double> w);
  BlendWeights(std::vector<double> w, WeightKind kind);

  // "0,0,0,1" or "0.5,0.3,0.2,0"
  static BlendWeights parse(std::string_view text);

  const std::vector<double>& values() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  int size() const { return static_cast<int>(w_.size()); }
  WeightKind kind() const { return kind_; }
  double sum() const;
  int ones() const;

  // Table label: "1010" for binary, "0.5,0.3,0.2,0" otherwise.
  std::string label() const;

  bool operator==(const BlendWeights&) const = default;

 private:
  std::vector<double> w_;
  WeightKind kind_;
};

struct BlendOptions {
  bool normalize = false;  // divide weights by their sum first
};

// mean = sum_i w_i mu_i, var = sum_i w_i^2 sigma_i^2.
DiagGaussian blend_components(const ComponentSet& set, const BlendWeights& w,
                              const BlendOptions& options = {});

// Samples n segments from the blended mixture of a gmvae/cgmvae checkpoint.
// `dir` is required for cgmvae and rejected for gmvae.
std::vector<Segment> sample_blend_gm(const ModelCheckpoint& model, const BlendWeights& w, int n,
                                     const std::optional<DirLabel>& dir, Rng& rng,
                                     const BlendOptions& options = {});

// Samples n segments from a cvae/ccvae checkpoint: z ~ N(0, I) decoded with
// the weights as the game label (followed by `dir` for ccvae).
std::vector<Segment> sample_blend_conditional(const ModelCheckpoint& model, const BlendWeights& w,
                                              int n, const std::optional<DirLabel>& dir, Rng& rng);

// Dispatches on the checkpoint family.
std::vector<Segment> sample_blend(const ModelCheckpoint& model, const BlendWeights& w, int n,
                                  const std::optional<DirLabel>& dir, Rng& rng);

}  // namespace gameblend
