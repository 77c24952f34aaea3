#include <cmath>
#include <set>

#include "gameblend/errors.hpp"
#include "gameblend/evalsuite.hpp"

namespace gameblend {

BlendScore blend_score(const BlendWeights& w, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != w.size()) {
    throw BadLength("blend score needs " + std::to_string(w.size()) + " percentages, got " +
                    std::to_string(p.size()));
  }
  BlendScore out;
  out.w = w.values();
  out.p = p;
  out.factor = w.kind() == WeightKind::kBinary ? 100.0 / w.ones() : 100.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = w[i] * out.factor - p[i];
    out.s += d * d;
  }
  return out;
}

std::map<std::vector<TileId>, int> count_patterns(const std::vector<Segment>& set, int size) {
  std::map<std::vector<TileId>, int> counts;
  std::vector<TileId> key(static_cast<std::size_t>(size) * size);
  for (const Segment& s : set) {
    const TileGrid& g = s.grid;
    for (int r = 0; r + size <= g.rows; ++r) {
      for (int c = 0; c + size <= g.cols; ++c) {
        std::size_t k = 0;
        for (int dr = 0; dr < size; ++dr) {
          for (int dc = 0; dc < size; ++dc) key[k++] = g.at(r + dr, c + dc);
        }
        ++counts[key];
      }
    }
  }
  return counts;
}

double tpkldiv(const std::vector<Segment>& gen, const std::vector<Segment>& ref,
               const TpklOptions& options) {
  if (gen.empty() || ref.empty()) throw EmptySet("tpkldiv needs two non-empty segment sets");
  if (options.windows.empty()) throw UsageError("tpkldiv needs at least one window size");
  if (!(options.eps > 0.0 && options.eps < 1.0)) throw UsageError("tpkldiv eps must be in (0, 1)");
  double total = 0.0;
  for (int size : options.windows) {
    const auto p = count_patterns(gen, size);
    const auto q = count_patterns(ref, size);
    if (p.empty() || q.empty()) throw EmptySet("window larger than the segments");
    double np = 0.0, nq = 0.0;
    for (const auto& [k, n] : p) np += n;
    for (const auto& [k, n] : q) nq += n;
    std::size_t support = q.size();
    for (const auto& [k, n] : p) support += !q.contains(k);
    double kl = 0.0;
    for (const auto& [k, n] : p) {
      const double pk = n / np;
      auto it = q.find(k);
      const double qk = it == q.end() ? 0.0 : it->second / nq;
      const double smoothed = (1.0 - options.eps) * qk + options.eps / static_cast<double>(support);
      kl += pk * std::log(pk / smoothed);
    }
    total += kl;
  }
  return total / static_cast<double>(options.windows.size());
}

std::string_view to_string(MatchVerdict v) {
  switch (v) {
    case MatchVerdict::kExact: return "exact";
    case MatchVerdict::kAdmissibleOnly: return "admissible-only";
    case MatchVerdict::kInadmissible: return "inadmissible";
  }
  return "?";
}

MatchVerdict directional_match(const DirLabel& cond, const DirLabel& pred) {
  if (cond == pred) return MatchVerdict::kExact;
  for (std::size_t i = 0; i < cond.size(); ++i) {
    if (cond[i] && !pred[i]) return MatchVerdict::kInadmissible;
  }
  return MatchVerdict::kAdmissibleOnly;
}

std::vector<BlendWeights> binary_weights(int k) {
  if (k < 1 || k > 16) throw UsageError("binary weights need 1 <= k <= 16");
  std::vector<BlendWeights> out;
  for (int bits = 1; bits < (1 << k); ++bits) {
    std::vector<double> w(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] = (bits >> (k - 1 - i)) & 1;
    out.emplace_back(std::move(w), WeightKind::kBinary);
  }
  return out;
}

std::vector<BlendWeights> default_fractional_weights(int k) {
  auto make = [](std::vector<double> w) { return BlendWeights(std::move(w), WeightKind::kFractional); };
  if (k == 4) {
    return {make({0.5, 0.3, 0.2, 0.0}), make({0.1, 0.1, 0.1, 0.7}), make({0.1, 0.6, 0.2, 0.1}),
            make({0.0, 0.2, 0.3, 0.5})};
  }
  if (k == 3) return {make({0.5, 0.3, 0.2}), make({0.2, 0.5, 0.3}), make({0.3, 0.2, 0.5})};
  throw UsageError("no default fractional weights for k = " + std::to_string(k));
}

}  // namespace gameblend
