// Checkpoint container, all integers little-endian:
//
//   8 bytes   magic "GBLENDCK"
//   u32       format version
//   u64       header length H
//   H bytes   JSON header: config, vocabulary, label layout, loss history,
//             provenance, net shapes (name, input_dim, per-layer rows/cols/
//             activation) and the component count
//   payload   per net and layer: weight then bias, row-major f64; then the
//             mean and variance of each component when present
//   u64       FNV-1a of everything above
#include <bit>
#include <cstring>
#include <fstream>

#include "gameblend/errors.hpp"
#include "gameblend/genmodels.hpp"

namespace gameblend {

namespace {

constexpr char kMagic[8] = {'G', 'B', 'L', 'E', 'N', 'D', 'C', 'K'};
const char* const kNetNames[] = {"encoder", "mean_head", "var_head",
                                 "decoder", "prior_mean", "prior_var"};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double value) {
  put_le(out, std::bit_cast<std::uint64_t>(value));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CorruptCheckpoint("checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSoftplus: return "softplus";
    case Activation::kIdentity: break;
  }
  return "identity";
}

Activation activation_from_name(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "softplus") return Activation::kSoftplus;
  if (s == "identity") return Activation::kIdentity;
  throw CorruptCheckpoint("unknown activation '" + std::string(s) + "'");
}

void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

Eigen::MatrixXd get_matrix(Reader& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.get_f64();
  }
  return m;
}

}  // namespace

std::string serialize_checkpoint(const ModelCheckpoint& model) {
  nlohmann::json nets = nlohmann::json::array();
  std::string payload;
  const auto all = model.nets();
  for (std::size_t i = 0; i < all.size(); ++i) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : all[i]->layers()) {
      layers.push_back({{"rows", layer.weight.rows()},
                        {"cols", layer.weight.cols()},
                        {"activation", std::string(activation_name(layer.activation))}});
      put_matrix(payload, layer.weight);
      put_matrix(payload, layer.bias);
    }
    nets.push_back({{"name", kNetNames[i]}, {"input_dim", all[i]->input_dim()}, {"layers", layers}});
  }
  nlohmann::json components = nullptr;
  if (model.components) {
    components = {{"count", model.components->size()}, {"z", model.config.z}};
    for (int i = 0; i < model.components->size(); ++i) {
      put_matrix(payload, model.components->means[static_cast<std::size_t>(i)]);
      put_matrix(payload, model.components->vars[static_cast<std::size_t>(i)]);
    }
  }
  const LabelLayout labels = model.labels();
  const nlohmann::json header = {
      {"format", "gameblend-checkpoint"},
      {"config", model.config.to_json()},
      {"vocab", model.vocab.to_json()},
      {"label_layout", {{"game_bits", labels.game_bits}, {"dir_bits", labels.dir_bits}}},
      {"loss_history", model.loss_history},
      {"provenance", model.provenance},
      {"nets", nets},
      {"components", components}};
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  out += payload;
  put_le<std::uint64_t>(out, fnv1a(out.data(), out.size()));
  return out;
}

ModelCheckpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw CorruptCheckpoint("not a gameblend checkpoint");
  }
  const auto version = in.get_le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  const auto header_len = in.get_le<std::uint64_t>();
  if (header_len > bytes.size()) throw CorruptCheckpoint("checkpoint is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.take(static_cast<std::size_t>(header_len)));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint header: ") + e.what());
  }

  ModelCheckpoint model;
  try {
    model.config = ModelConfig::from_json(header.at("config"));
    model.vocab = TileVocab::from_json(header.at("vocab"));
    model.loss_history = header.at("loss_history").get<std::vector<double>>();
    model.provenance = header.value("provenance", nlohmann::json::object());
    const auto all = model.nets();
    const auto& nets = header.at("nets");
    if (nets.size() != all.size()) throw CorruptCheckpoint("unexpected network count");
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& jn = nets[i];
      DenseNet net;
      std::vector<int> widths;
      std::vector<Activation> acts;
      for (const auto& jl : jn.at("layers")) {
        widths.push_back(jl.at("rows").get<int>());
        acts.push_back(activation_from_name(jl.at("activation").get<std::string>()));
      }
      Rng unused(0);
      net = DenseNet(jn.at("input_dim").get<int>(), widths, acts, unused);
      for (auto& layer : net.layers()) {
        layer.weight = get_matrix(in, layer.weight.rows(), layer.weight.cols());
        layer.bias = get_matrix(in, layer.bias.size(), 1);
      }
      *all[i] = std::move(net);
    }
    if (!header.at("components").is_null()) {
      ComponentSet stored;
      const int count = header["components"].at("count").get<int>();
      const int z = header["components"].at("z").get<int>();
      for (int i = 0; i < count; ++i) {
        stored.means.emplace_back(get_matrix(in, z, 1).col(0));
        stored.vars.emplace_back(get_matrix(in, z, 1).col(0));
      }
      model.components = stored;
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint header: ") + e.what());
  } catch (const UsageError& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint config: ") + e.what());
  }

  const std::size_t body = in.position();
  const auto checksum = in.get_le<std::uint64_t>();
  if (checksum != fnv1a(bytes.data(), body)) throw CorruptCheckpoint("checksum mismatch");
  if (in.position() != bytes.size()) throw CorruptCheckpoint("trailing bytes after checkpoint");

  // Shape checks against the config.
  const LabelLayout labels = model.labels();
  if (model.decoder.input_dim() != model.config.z + labels.width() ||
      model.decoder.output_dim() != model.input_dim() ||
      model.encoder.input_dim() != model.input_dim() + labels.width()) {
    throw CorruptCheckpoint("network shapes do not match the config");
  }
  if (uses_mixture_prior(model.config.family)) {
    if (!model.components || model.components->size() != model.config.k) {
      throw CorruptCheckpoint("component count does not match k");
    }
    const ComponentSet fresh = model.evaluate_components();
    for (int i = 0; i < model.config.k; ++i) {
      if (fresh.means[static_cast<std::size_t>(i)] != model.components->means[static_cast<std::size_t>(i)] ||
          fresh.vars[static_cast<std::size_t>(i)] != model.components->vars[static_cast<std::size_t>(i)]) {
        throw CorruptCheckpoint("stored components disagree with the prior network");
      }
    }
  }
  return model;
}

void save_checkpoint(const ModelCheckpoint& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_text_file(path));
}

}  // namespace gameblend
