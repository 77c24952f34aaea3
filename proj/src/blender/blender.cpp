#include <cmath>
#include <cstdio>
#include <sstream>

#include "gameblend/blender.hpp"
#include "gameblend/errors.hpp"

namespace gameblend {

namespace {

bool is_bit(double x) { return x == 0.0 || x == 1.0; }

void check_weights(const std::vector<double>& w) {
  if (w.empty()) throw BadLength("blend weights are empty");
  bool any = false;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw UsageError("blend weights must be finite and >= 0");
    any = any || x > 0.0;
  }
  if (!any) throw AllZeroWeights();
}

std::string format_weight(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

BlendWeights::BlendWeights(std::vector<double> w) : w_(std::move(w)), kind_(WeightKind::kBinary) {
  check_weights(w_);
  for (double x : w_) {
    if (!is_bit(x)) kind_ = WeightKind::kFractional;
  }
}

BlendWeights::BlendWeights(std::vector<double> w, WeightKind kind) : w_(std::move(w)), kind_(kind) {
  check_weights(w_);
  if (kind_ == WeightKind::kBinary) {
    for (double x : w_) {
      if (!is_bit(x)) throw UsageError("binary blend weights must be 0 or 1");
    }
  }
}

BlendWeights BlendWeights::parse(std::string_view text) {
  std::vector<double> w;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad blend weight '" + item + "'");
    }
  }
  return BlendWeights(std::move(w));
}

double BlendWeights::sum() const {
  double s = 0.0;
  for (double x : w_) s += x;
  return s;
}

int BlendWeights::ones() const {
  int n = 0;
  for (double x : w_) n += x == 1.0;
  return n;
}

std::string BlendWeights::label() const {
  std::string out;
  if (kind_ == WeightKind::kBinary) {
    for (double x : w_) out.push_back(x == 1.0 ? '1' : '0');
    return out;
  }
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (i) out.push_back(',');
    out += format_weight(w_[i]);
  }
  return out;
}

DiagGaussian blend_components(const ComponentSet& set, const BlendWeights& w,
                              const BlendOptions& options) {
  if (w.size() != set.size()) {
    throw BadLength("expected " + std::to_string(set.size()) + " weights, got " +
                    std::to_string(w.size()));
  }
  const double scale = options.normalize ? 1.0 / w.sum() : 1.0;
  const Eigen::Index z = set.means.front().size();
  DiagGaussian out{Eigen::VectorXd::Zero(z), Eigen::VectorXd::Zero(z)};
  for (int i = 0; i < set.size(); ++i) {
    const double wi = w[static_cast<std::size_t>(i)] * scale;
    if (wi == 0.0) continue;
    out.mean += wi * set.means[static_cast<std::size_t>(i)];
    out.var += (wi * wi) * set.vars[static_cast<std::size_t>(i)];
  }
  return out;
}

namespace {

Eigen::MatrixXd direction_rows(const std::optional<DirLabel>& dir, int n) {
  Eigen::MatrixXd rows(4, n);
  for (int d = 0; d < 4; ++d) rows.row(d).setConstant((*dir)[static_cast<std::size_t>(d)]);
  return rows;
}

std::vector<Segment> decode_segments(const ModelCheckpoint& model, const Eigen::MatrixXd& latents,
                                     const Eigen::MatrixXd& labels,
                                     const std::optional<DirLabel>& dir) {
  const Eigen::MatrixXd logits = decode_logits(model, latents, labels);
  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Segment s;
    s.grid = decode_argmax(std::span<const double>(logits.col(j).data(),
                                                   static_cast<std::size_t>(logits.rows())),
                           static_cast<std::size_t>(model.vocab_size()));
    s.dir = dir;
    out.push_back(std::move(s));
  }
  return out;
}

void check_direction(const ModelCheckpoint& model, const std::optional<DirLabel>& dir) {
  if (is_directional(model.config.family)) {
    if (!dir) throw MissingDirection();
  } else if (dir) {
    throw FamilyMismatch("model family " + std::string(to_string(model.config.family)) +
                         " takes no directional label");
  }
}

}  // namespace

std::vector<Segment> sample_blend_gm(const ModelCheckpoint& model, const BlendWeights& w, int n,
                                     const std::optional<DirLabel>& dir, Rng& rng,
                                     const BlendOptions& options) {
  if (!uses_mixture_prior(model.config.family)) {
    throw FamilyMismatch("sample_blend_gm needs a gmvae or cgmvae checkpoint");
  }
  check_direction(model, dir);
  if (w.size() != model.config.k) throw BadLength("weight count does not match the model's k");
  if (n <= 0) return {};
  const ComponentSet components = model.components ? *model.components : model.evaluate_components();
  const DiagGaussian blend = blend_components(components, w, options);
  Eigen::MatrixXd latents(model.config.z, n);
  for (int j = 0; j < n; ++j) latents.col(j) = sample_gaussian(blend, rng);
  Eigen::MatrixXd labels(model.labels().width(), n);
  if (dir) labels = direction_rows(dir, n);
  return decode_segments(model, latents, labels, dir);
}

std::vector<Segment> sample_blend_conditional(const ModelCheckpoint& model, const BlendWeights& w,
                                              int n, const std::optional<DirLabel>& dir, Rng& rng) {
  if (uses_mixture_prior(model.config.family)) {
    throw FamilyMismatch("sample_blend_conditional needs a cvae or ccvae checkpoint");
  }
  check_direction(model, dir);
  if (w.size() != model.config.k) throw BadLength("weight count does not match the model's k");
  if (n <= 0) return {};
  const Eigen::MatrixXd latents = standard_normal(model.config.z, n, rng);
  const LabelLayout layout = model.labels();
  Eigen::MatrixXd labels(layout.width(), n);
  for (int i = 0; i < model.config.k; ++i) labels.row(i).setConstant(w[static_cast<std::size_t>(i)]);
  if (dir) labels.bottomRows(4) = direction_rows(dir, n);
  return decode_segments(model, latents, labels, dir);
}

std::vector<Segment> sample_blend(const ModelCheckpoint& model, const BlendWeights& w, int n,
                                  const std::optional<DirLabel>& dir, Rng& rng) {
  return uses_mixture_prior(model.config.family) ? sample_blend_gm(model, w, n, dir, rng)
                                                 : sample_blend_conditional(model, w, n, dir, rng);
}

}  // namespace gameblend
