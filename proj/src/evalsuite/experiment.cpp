#include <fstream>
#include <sstream>

#include "gameblend/errors.hpp"
#include "gameblend/evalsuite.hpp"

namespace gameblend {

namespace {

// Percentages in class order spread onto game slots 0..k-1.
std::vector<double> per_game(const ForestClassifier& clf, const std::vector<double>& p, int k) {
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (std::size_t c = 0; c < p.size(); ++c) {
    const int g = clf.classes()[c];
    if (g >= 0 && g < k) out[static_cast<std::size_t>(g)] = p[c];
  }
  return out;
}

std::vector<Segment> sample_for_row(const ExperimentSpec& spec, const BlendWeights& w, Rng& rng) {
  const ModelCheckpoint& model = *spec.model;
  if (!is_directional(model.config.family)) return sample_blend(model, w, spec.samples, std::nullopt, rng);
  if (spec.sample_dir) return sample_blend(model, w, spec.samples, spec.sample_dir, rng);
  // no fixed label: spread the draws over the 15 non-zero labels
  std::vector<Segment> out;
  for (int i = 0; i < spec.samples; ++i) {
    const DirLabel dir = dir_from_index(1 + i % 15);
    auto s = sample_blend(model, w, 1, dir, rng);
    out.push_back(std::move(s.front()));
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

Report run_experiment(const ExperimentSpec& spec) {
  if (!spec.model || !spec.classifier) throw UsageError("experiment needs a model and a classifier");
  const ModelCheckpoint& model = *spec.model;
  const int k = model.config.k;
  if (!spec.references.empty() && static_cast<int>(spec.references.size()) != k) {
    throw BadLength("need one reference set per game");
  }
  if (!spec.jumps.empty() && static_cast<int>(spec.jumps.size()) != k) {
    throw BadLength("need one jump model per game");
  }
  Report report;
  report.family = std::string(to_string(model.config.family));
  report.k = k;
  for (int g = 0; g < k && g < model.vocab.game_count(); ++g) report.games.push_back(model.vocab.game(g).name);
  report.provenance = {{"seed", spec.seed},
                       {"samples", spec.samples},
                       {"classifier", spec.classifier->hyper().to_json()},
                       {"classifier_features", "flattened one-hot tiles"},
                       {"tpkl_windows", spec.tpkl.windows},
                       {"tpkl_eps", spec.tpkl.eps},
                       {"tie_break", "lowest class index"}};
  if (!model.provenance.empty()) report.provenance["model"] = model.provenance;

  const std::size_t vocab = model.vocab.size();
  for (std::size_t row = 0; row < spec.weights.size(); ++row) {
    const BlendWeights& w = spec.weights[row];
    Rng rng = derive_rng(spec.seed, row);
    WeightRow out;
    out.weights = w.label();
    const std::vector<Segment> segments = sample_for_row(spec, w, rng);
    if (!segments.empty()) {
      out.percentages = per_game(*spec.classifier, predict_percentages(*spec.classifier, segments, vocab), k);
      out.score = blend_score(w, out.percentages).s;
      if (!spec.jumps.empty()) {
        const std::vector<JumpArc> arcs = jump_arcs(blend_jump(spec.jumps, w));
        int playable = 0;
        for (const Segment& s : segments) playable += playability(s.grid, model.vocab, arcs);
        out.playable = 100.0 * playable / static_cast<double>(segments.size());
      }
      for (const auto& ref : spec.references) out.tpkldiv.push_back(tpkldiv(segments, ref, spec.tpkl));
    }
    if (is_directional(model.config.family) && spec.dir_classifier && spec.dir_samples > 0) {
      double exact = 0.0, admissible = 0.0, inadmissible = 0.0;
      for (int label = 1; label < 16; ++label) {
        const DirLabel cond = dir_from_index(label);
        const auto gen = sample_blend(model, w, spec.dir_samples, cond, rng);
        const std::vector<int> pred = spec.dir_classifier->predict(segment_features(gen, vocab));
        int e = 0, a = 0, x = 0;
        for (int p : pred) {
          switch (directional_match(cond, dir_from_index(p))) {
            case MatchVerdict::kExact: ++e; ++a; break;
            case MatchVerdict::kAdmissibleOnly: ++a; break;
            case MatchVerdict::kInadmissible: ++x; break;
          }
        }
        const double n = static_cast<double>(pred.size());
        exact += 100.0 * e / n;
        admissible += 100.0 * a / n;
        inadmissible += 100.0 * x / n;
      }
      out.exact = exact / 15.0;
      out.admissible = admissible / 15.0;
      out.inadmissible = inadmissible / 15.0;
    }
    report.rows.push_back(std::move(out));
  }
  return report;
}

nlohmann::json Report::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const WeightRow& r : rows) {
    rows_json.push_back({{"weights", r.weights},
                         {"percentages", r.percentages},
                         {"score", r.score},
                         {"playable", opt_json(r.playable)},
                         {"tpkldiv", r.tpkldiv},
                         {"exact", opt_json(r.exact)},
                         {"admissible", opt_json(r.admissible)},
                         {"inadmissible", opt_json(r.inadmissible)}});
  }
  return {{"format", "gameblend-report"}, {"family", family}, {"k", k}, {"games", games},
          {"provenance", provenance}, {"rows", rows_json}};
}

Report Report::from_json(const nlohmann::json& j) {
  Report r;
  try {
    r.family = j.at("family").get<std::string>();
    r.k = j.at("k").get<int>();
    r.games = j.at("games").get<std::vector<std::string>>();
    r.provenance = j.at("provenance");
    for (const auto& row : j.at("rows")) {
      WeightRow w;
      w.weights = row.at("weights").get<std::string>();
      w.percentages = row.at("percentages").get<std::vector<double>>();
      w.score = row.at("score").get<double>();
      w.playable = opt_from(row, "playable");
      w.tpkldiv = row.at("tpkldiv").get<std::vector<double>>();
      w.exact = opt_from(row, "exact");
      w.admissible = opt_from(row, "admissible");
      w.inadmissible = opt_from(row, "inadmissible");
      r.rows.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad report: ") + e.what());
  }
  return r;
}

std::string Report::classification_csv() const {
  std::string out = "weights";
  for (int g = 0; g < k; ++g) out += "," + csv_field(g < int(games.size()) ? games[g] : "game" + std::to_string(g + 1));
  out += ",score\n";
  for (const WeightRow& r : rows) {
    out += csv_field(r.weights);
    for (double p : r.percentages) out += "," + num(p);
    out += "," + num(r.score) + "\n";
  }
  return out;
}

std::string Report::playability_csv() const {
  std::string out = "weights,playable\n";
  for (const WeightRow& r : rows) out += csv_field(r.weights) + "," + opt_num(r.playable) + "\n";
  return out;
}

std::string Report::tpkldiv_csv() const {
  std::string out = "weights";
  for (int g = 0; g < k; ++g) out += "," + csv_field(g < int(games.size()) ? games[g] : "game" + std::to_string(g + 1));
  out += "\n";
  for (const WeightRow& r : rows) {
    out += csv_field(r.weights);
    for (double v : r.tpkldiv) out += "," + num(v);
    out += "\n";
  }
  return out;
}

std::string Report::directional_csv() const {
  std::string out = "weights,exact,admissible,inadmissible\n";
  for (const WeightRow& r : rows) {
    out += csv_field(r.weights) + "," + opt_num(r.exact) + "," + opt_num(r.admissible) + "," +
           opt_num(r.inadmissible) + "\n";
  }
  return out;
}

void Report::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    out << text;
  };
  put("report.json", to_json().dump(2) + "\n");
  put("classification.csv", classification_csv());
  put("playability.csv", playability_csv());
  put("tpkldiv.csv", tpkldiv_csv());
  put("directional.csv", directional_csv());
}

}  // namespace gameblend
