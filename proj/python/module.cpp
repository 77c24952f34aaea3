#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gameblend/errors.hpp"
#include "gameblend/evalsuite.hpp"
#include "gameblend/layout.hpp"
#include "gameblend/workbench.hpp"

namespace py = pybind11;
using namespace gameblend;
using json = nlohmann::json;

namespace {

using GridArray = py::array_t<TileId, py::array::c_style | py::array::forcecast>;

GridArray to_array(const std::vector<Segment>& segs) {
  GridArray out({static_cast<py::ssize_t>(segs.size()), py::ssize_t{kSegmentRows}, py::ssize_t{kSegmentCols}});
  TileId* p = out.mutable_data();
  for (const Segment& s : segs) p = std::copy(s.grid.cells.begin(), s.grid.cells.end(), p);
  return out;
}

TileGrid grid_from(const GridArray& a) {
  if (a.ndim() != 2) throw DimMismatch("grid must be 2-d");
  TileGrid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), g.cells.begin());
  return g;
}

std::vector<Segment> segments_from(const GridArray& a) {
  if (a.ndim() != 3 || a.shape(1) != kSegmentRows || a.shape(2) != kSegmentCols)
    throw DimMismatch("segments must have shape (n, 15, 16)");
  std::vector<Segment> out(static_cast<std::size_t>(a.shape(0)));
  const TileId* p = a.data();
  for (Segment& s : out) {
    s.grid = TileGrid(kSegmentRows, kSegmentCols);
    std::copy(p, p + kSegmentCells, s.grid.cells.begin());
    p += kSegmentCells;
  }
  return out;
}

std::optional<DirLabel> dir_arg(const std::optional<std::string>& d) {
  if (!d) return std::nullopt;
  return dir_from_string(*d);
}

}  // namespace

PYBIND11_MODULE(_gameblend, m) {
  m.doc() = "Level blending core: corpora, models, sampling, agent and metrics.";
  m.attr("__version__") = kToolVersion;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<TileVocab>(m, "Vocab")
      .def_static("load", &TileVocab::load)
      .def_static("from_json", [](const std::string& s) { return TileVocab::from_json(json::parse(s)); })
      .def("to_json", [](const TileVocab& v) { return v.to_json().dump(); })
      .def("__len__", &TileVocab::size)
      .def("lookup", &TileVocab::lookup, py::arg("game"), py::arg("symbol"))
      .def_property_readonly("games", [](const TileVocab& v) {
        std::vector<std::string> names;
        for (int g = 0; g < v.game_count(); ++g) names.push_back(v.game(g).name);
        return names;
      })
      .def("render", [](const TileVocab& v, const GridArray& grid) { return render_glyphs(grid_from(grid), v); })
      .def("parse", [](const TileVocab& v, const std::string& text) {
        const TileGrid g = parse_glyphs(text, v);
        GridArray out({g.rows, g.cols});
        std::copy(g.cells.begin(), g.cells.end(), out.mutable_data());
        return out;
      });

  py::class_<Corpus>(m, "Corpus")
      .def_static("synthetic",
                  [](int games, int per_game, bool directional, std::uint64_t seed) {
                    return make_synthetic_corpus({games, per_game, directional, seed});
                  },
                  py::arg("games") = 4, py::arg("per_game") = 40, py::arg("directional") = false,
                  py::arg("seed") = 1)
      .def_static("from_config", [](const std::filesystem::path& p) { return load_corpus(RunConfig::load(p)); })
      .def_static("from_json", [](const std::string& s) { return corpus_from_json(json::parse(s)); })
      .def("to_json", [](const Corpus& c) { return corpus_to_json(c).dump(); })
      .def("__len__", [](const Corpus& c) { return c.segments.size(); })
      .def_readonly("vocab", &Corpus::vocab)
      .def_property_readonly("segments", [](const Corpus& c) { return to_array(c.segments); })
      .def_property_readonly("games", [](const Corpus& c) {
        std::vector<int> out;
        for (const Segment& s : c.segments) out.push_back(s.game.value_or(-1));
        return out;
      })
      .def_property_readonly("dirs", [](const Corpus& c) {
        std::vector<std::optional<std::string>> out;
        for (const Segment& s : c.segments)
          out.push_back(s.dir ? std::optional(dir_to_string(*s.dir)) : std::nullopt);
        return out;
      })
      .def("game_segments", [](const Corpus& c, int g) { return to_array(c.game_segments(g)); });

  py::class_<ModelCheckpoint>(m, "Checkpoint")
      .def_static("load", &load_checkpoint)
      .def("save", [](const ModelCheckpoint& c, const std::filesystem::path& p) { save_checkpoint(c, p); })
      .def_property_readonly("family", [](const ModelCheckpoint& c) { return std::string(to_string(c.config.family)); })
      .def_property_readonly("k", [](const ModelCheckpoint& c) { return c.config.k; })
      .def_property_readonly("z", [](const ModelCheckpoint& c) { return c.config.z; })
      .def_property_readonly("config", [](const ModelCheckpoint& c) { return c.config.to_json().dump(); })
      .def_readonly("vocab", &ModelCheckpoint::vocab)
      .def_readonly("loss_history", &ModelCheckpoint::loss_history);

  m.def("train",
        [](const Corpus& corpus, const std::string& config) {
          const ModelConfig c = ModelConfig::from_json(json::parse(config));
          py::gil_scoped_release release;
          return train_model(corpus, c);
        },
        py::arg("corpus"), py::arg("config"), "Trains a model; config is ModelConfig JSON text.");

  m.def("sample",
        [](const ModelCheckpoint& model, const std::vector<double>& weights, int n, std::uint64_t seed,
           const std::optional<std::string>& dir) {
          Rng rng(seed);
          return to_array(sample_blend(model, BlendWeights(weights), n, dir_arg(dir), rng));
        },
        py::arg("model"), py::arg("weights"), py::arg("n") = 1, py::arg("seed") = 0, py::arg("dir") = py::none());

  m.def("layout",
        [](const ModelCheckpoint& model, const std::vector<double>& weights, const std::string& kind, int n,
           std::uint64_t seed) {
          Rng rng(seed);
          const Layout l = layout_kind_from_string(kind) == LayoutKind::kDungeon ? gen_dungeon_layout(n, rng)
                                                                                  : gen_platformer_layout(n, rng);
          const WholeLevel w = assemble(l, model, BlendWeights(weights), rng);
          GridArray grid({w.grid.rows, w.grid.cols});
          std::copy(w.grid.cells.begin(), w.grid.cells.end(), grid.mutable_data());
          return py::make_tuple(grid, w.sidecar().dump());
        },
        py::arg("model"), py::arg("weights"), py::arg("kind") = "dungeon", py::arg("n") = 4, py::arg("seed") = 0,
        "Returns (grid, sidecar JSON text).");

  m.def("blend_score", [](const std::vector<double>& w, const std::vector<double>& p) {
    return blend_score(BlendWeights(w), p).s;
  });
  m.def("binary_weights", [](int k) {
    std::vector<std::vector<double>> out;
    for (const auto& w : binary_weights(k)) out.push_back(w.values());
    return out;
  });
  m.def("fractional_weights", [](int k) {
    std::vector<std::vector<double>> out;
    for (const auto& w : default_fractional_weights(k)) out.push_back(w.values());
    return out;
  });

  m.def("tpkldiv",
        [](const GridArray& gen, const GridArray& ref, std::vector<int> windows, double eps) {
          return tpkldiv(segments_from(gen), segments_from(ref), {std::move(windows), eps});
        },
        py::arg("gen"), py::arg("ref"), py::arg("windows") = std::vector<int>{2, 3, 4}, py::arg("eps") = 1e-5);

  m.def("directional_match", [](const std::string& cond, const std::string& pred) {
    return std::string(to_string(directional_match(dir_from_string(cond), dir_from_string(pred))));
  });

  m.def("jump_arcs", [](const std::string& jump) {
    std::vector<std::vector<std::pair<int, int>>> out;
    for (const JumpArc& a : jump_arcs(JumpModel::from_json(json::parse(jump)))) {
      auto& o = out.emplace_back();
      for (const JumpOffset& s : a) o.emplace_back(s.dx, s.dy);
    }
    return out;
  });

  m.def("playability",
        [](const GridArray& grid, const TileVocab& vocab, const std::string& jump) {
          const Playability p = evaluate_playability(to_affordances(grid_from(grid), vocab),
                                                     jump_arcs(JumpModel::from_json(json::parse(jump))));
          return json{{"playable", p.playable()},
                      {"left_to_right", p.left_to_right.to_json()},
                      {"bottom_to_top", p.bottom_to_top.to_json()}}
              .dump();
        },
        py::arg("grid"), py::arg("vocab"), py::arg("jump"), "Returns the verdict and paths as JSON text.");

  py::class_<Service>(m, "Service")
      .def(py::init([](const std::map<std::string, std::filesystem::path>& checkpoints,
                       const std::optional<std::filesystem::path>& jumps) {
             auto s = std::make_shared<Session>();
             std::optional<JumpTable> table;
             if (jumps) table = JumpTable::load(*jumps);
             for (const auto& [id, path] : checkpoints) {
               ModelCheckpoint c = load_checkpoint(path);
               std::optional<std::vector<JumpModel>> j;
               if (table) j = jumps_for(*table, c.vocab);
               s->models.emplace(id, LoadedModel{std::move(c), std::nullopt, std::move(j)});
             }
             return Service(s);
           }),
           py::arg("checkpoints"), py::arg("jumps") = py::none())
      .def("handle",
           [](const Service& s, const std::string& method, const std::string& path, const std::string& body,
              const std::map<std::string, std::string>& query) {
             const Response r = s.handle(method, path, body, query);
             return py::make_tuple(r.status, r.body.dump());
           },
           py::arg("method"), py::arg("path"), py::arg("body") = "",
           py::arg("query") = std::map<std::string, std::string>{});
}
