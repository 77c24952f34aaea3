#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/evalsuite.hpp"
#include "gameblend/genmodels.hpp"
#include "gameblend/mechanics.hpp"

namespace gameblend {

inline constexpr const char* kToolVersion = "0.1.0";

// Run configuration ----------------------------------------------------------

struct ExperimentConfig {
  bool binary = true;
  bool fractional = true;
  int samples = 1000;
  int dir_samples = 1000;
  TpklOptions tpkl;
};

// JSON (comments allowed). Relative paths resolve against the config file.
struct RunConfig {
  std::filesystem::path source;  // the config file itself, empty when built in code
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> vocab;
  std::vector<GameSource> games;
  std::optional<SyntheticOptions> synthetic;  // used instead of `games`
  std::optional<std::filesystem::path> dataset;  // cached corpus from `ingest`
  ModelConfig model;
  std::optional<std::filesystem::path> jumps;
  ForestHyper forest;
  ExperimentConfig experiment;
  std::filesystem::path output = "out";
  std::string hash;  // FNV-1a of the canonical config text

  static RunConfig parse(const nlohmann::json& j, const std::filesystem::path& base);
  static RunConfig load(const std::filesystem::path& path);
  // Paths must exist; a corpus source (games, synthetic or dataset) must be set.
  void validate() const;
  // Provenance block embedded in every artifact.
  nlohmann::json provenance() const;
};

std::string config_hash(const nlohmann::json& canonical);
nlohmann::json parse_json_text(std::string_view text, const std::string& what);
nlohmann::json load_json_file(const std::filesystem::path& path);

// Loads the corpus named by the config: dataset cache, synthetic fixtures or level files.
Corpus load_corpus(const RunConfig& config);

// Encoded dataset cache -----------------------------------------------------

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);

// Game and directional classifiers trained on a corpus.
ForestClassifier train_game_classifier(const Corpus& corpus, const ForestHyper& hyper);
ForestClassifier train_dir_classifier(const Corpus& corpus, const ForestHyper& hyper);

// Jump parameters for the model's games, looked up by game name.
std::vector<JumpModel> jumps_for(const JumpTable& table, const TileVocab& vocab);

// Tile-id grids as nested arrays.
nlohmann::json grid_to_json(const TileGrid& grid);
TileGrid grid_from_json(const nlohmann::json& j, std::size_t vocab_size);

// HTTP service ---------------------------------------------------------------

struct LoadedModel {
  ModelCheckpoint checkpoint;
  std::optional<ForestClassifier> classifier;
  std::optional<std::vector<JumpModel>> jumps;
};

// Immutable after construction; safe to share between request threads.
struct Session {
  std::map<std::string, LoadedModel> models;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(std::shared_ptr<const Session> session);

  // Dispatches on method and path; body is the raw request text.
  Response handle(const std::string& method, const std::string& path, const std::string& body,
                  const std::map<std::string, std::string>& query = {}) const;

  Response models() const;
  Response vocab(const std::map<std::string, std::string>& query) const;
  Response sample(const nlohmann::json& request) const;
  Response layout(const nlohmann::json& request) const;
  Response playability(const nlohmann::json& request) const;

 private:
  std::shared_ptr<const Session> session_;
  const LoadedModel& model(const nlohmann::json& request) const;
};

class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds `port`, or any free port when 0; returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gameblend
