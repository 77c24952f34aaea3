#include <thread>

#include "doctest.h"
#include "gameblend/errors.hpp"
#include "gameblend/workbench.hpp"
#include "helpers.hpp"

#include <httplib.h>  // after Eigen, see server.cpp

using namespace gameblend;
using json = nlohmann::json;

namespace {

ModelCheckpoint small_model(Family f, const Corpus& corpus) {
  ModelConfig c = ModelConfig::defaults(f, 2, 3);
  c.encoder_hidden = {6};
  c.decoder_hidden = {6};
  c.epochs = 2;
  c.seed = 5;
  return train_model(corpus, c);
}

const Corpus& corpus() {
  static const Corpus c = make_synthetic_corpus({2, 8, true, 3});
  return c;
}

std::shared_ptr<const Session> make_session() {
  auto s = std::make_shared<Session>();
  const JumpTable table = JumpTable::load(GAMEBLEND_DATA_DIR "/jump_params.json");
  ForestHyper h;
  h.trees = 5;
  LoadedModel gm{small_model(Family::kGmvae, corpus()), train_game_classifier(corpus(), h),
                 jumps_for(table, corpus().vocab)};
  LoadedModel cg{small_model(Family::kCgmvae, corpus()), std::nullopt, jumps_for(table, corpus().vocab)};
  LoadedModel bare{small_model(Family::kCvae, corpus()), std::nullopt, std::nullopt};
  s->models.emplace("gm", std::move(gm));
  s->models.emplace("cg", std::move(cg));
  s->models.emplace("cv", std::move(bare));
  return s;
}

const Service& service() {
  static const Service s(make_session());
  return s;
}

Response post(const std::string& path, const json& body) { return service().handle("POST", path, body.dump()); }

json flat_grid() {
  const TileVocab& v = corpus().vocab;
  TileGrid g(15, 16, v.game(0).background);
  for (int c = 0; c < 16; ++c) g.at(14, c) = *v.lookup(0, 'X');
  return grid_to_json(g);
}

}  // namespace

TEST_CASE("config parsing resolves paths and hashes the text") {
  const auto dir = testing::temp_dir("config");
  testing::write_file(dir / "run.json", R"({
    // comment
    "seed": 3,
    "synthetic": {"games": 2, "per_game": 4},
    "model": {"family": "cvae", "z": 4},
    "jumps": "jumps.json",
    "output": "out"
  })");
  const RunConfig c = RunConfig::load(dir / "run.json");
  CHECK(c.seed == 3);
  CHECK(c.model.k == 2);
  CHECK(c.model.seed == 3);
  CHECK(c.model.family == Family::kCvae);
  CHECK(c.jumps == dir / "jumps.json");
  CHECK(c.output == dir / "out");
  CHECK(c.hash.size() == 16);
  CHECK_THROWS_AS(c.validate(), DataError);  // jumps.json is missing
  CHECK(c.provenance()["config_hash"] == c.hash);

  // whitespace and comments do not change the hash
  const RunConfig same = RunConfig::parse(
      parse_json_text(R"({"seed":3,"synthetic":{"games":2,"per_game":4},"model":{"family":"cvae","z":4},
                         "jumps":"jumps.json","output":"out"})", "x"), dir);
  CHECK(same.hash == c.hash);

  CHECK_THROWS_AS(RunConfig::parse(json{{"synthetic", {{"games", 2}}}}, dir), UsageError);
  CHECK_THROWS_AS(RunConfig::parse(json{{"seed", 1}, {"model", {{"family", "vae"}}}}, dir), UsageError);
  CHECK_THROWS_AS(RunConfig::parse(json{{"seed", 1}}, dir).validate(), UsageError);
  CHECK_THROWS_AS(RunConfig::load(dir / "missing.json"), DataError);
  testing::write_file(dir / "bad.json", "{ nope");
  CHECK_THROWS_AS(RunConfig::load(dir / "bad.json"), DataError);
}

TEST_CASE("dataset cache round trip") {
  const json j = corpus_to_json(corpus());
  const Corpus back = corpus_from_json(j);
  CHECK(back.segments == corpus().segments);
  CHECK(back.vocab == corpus().vocab);
  CHECK(back.counts_after == corpus().counts_after);
  json bad = j;
  bad["version"] = 2;
  CHECK_THROWS_AS(corpus_from_json(bad), VersionMismatch);
  bad = j;
  bad["segments"][0]["tiles"][0] = 60000;
  CHECK_THROWS_AS(corpus_from_json(bad), DataError);
}

TEST_CASE("GET /models and /vocab") {
  const Response r = service().handle("GET", "/models", "");
  REQUIRE(r.status == 200);
  REQUIRE(r.body["models"].size() == 3);
  const json& cg = r.body["models"][0];
  CHECK(cg["id"] == "cg");
  CHECK(cg["family"] == "cgmvae");
  CHECK(cg["k"] == 2);
  CHECK(cg["z"] == 3);

  const Response v = service().handle("GET", "/vocab", "", {{"model", "gm"}});
  REQUIRE(v.status == 200);
  CHECK(v.body["tiles"].size() == corpus().vocab.size());
  CHECK(v.body["tiles"][0].contains("affordance"));
  CHECK(v.body["tiles"][0]["color"].get<std::string>().front() == '#');
  CHECK(service().handle("GET", "/vocab", "", {{"model", "zzz"}}).status == 404);
  CHECK(service().handle("POST", "/models", "").status == 405);
  CHECK(service().handle("GET", "/nothing", "").status == 404);
}

TEST_CASE("POST /sample") {
  const Response r = post("/sample", {{"model", "gm"}, {"weights", {1, 0}}, {"count", 3}, {"seed", 9}});
  REQUIRE(r.status == 200);
  REQUIRE(r.body["segments"].size() == 3);
  const json& s = r.body["segments"][0];
  CHECK(s["tiles"].size() == 15);
  CHECK(s["tiles"][0].size() == 16);
  REQUIRE(s["percentages"].size() == 2);
  CHECK(s["percentages"][0].get<double>() + s["percentages"][1].get<double>() == doctest::Approx(100.0));
  // same request, same response
  CHECK(post("/sample", {{"model", "gm"}, {"weights", {1, 0}}, {"count", 3}, {"seed", 9}}).body == r.body);
  CHECK(post("/sample", {{"model", "gm"}, {"weights", {1, 0}}, {"count", 3}, {"seed", 10}}).body != r.body);

  const Response empty = post("/sample", {{"model", "gm"}, {"weights", {1, 0}}, {"count", 0}});
  CHECK(empty.status == 200);
  CHECK(empty.body["segments"].empty());

  CHECK(post("/sample", {{"model", "gm"}, {"weights", {0, 0}}}).status == 400);
  CHECK(post("/sample", {{"model", "gm"}, {"weights", {1, 0, 0}}}).status == 400);
  CHECK(post("/sample", {{"model", "gm"}, {"weights", "1,0"}}).status == 400);
  CHECK(post("/sample", {{"model", "gm"}, {"weights", {1, -1}}}).status == 400);
  CHECK(post("/sample", {{"model", "nope"}, {"weights", {1, 0}}}).status == 404);
  CHECK(post("/sample", {{"model", "gm"}, {"weights", {1, 0}}, {"dir", "1010"}}).status == 422);
  CHECK(post("/sample", {{"model", "cg"}, {"weights", {1, 0}}}).status == 422);
  CHECK(post("/sample", {{"model", "cg"}, {"weights", {1, 0}}, {"dir", "10x0"}}).status == 400);
  const Response d = post("/sample", {{"model", "cg"}, {"weights", {1, 0}}, {"dir", {0, 1, 1, 0}}, {"count", 2}});
  CHECK(d.status == 200);
  CHECK(d.body["dir"] == "0110");
  CHECK(d.body["segments"][0]["percentages"].is_null());
  CHECK(service().handle("POST", "/sample", "{not json").status == 400);
  CHECK(service().handle("POST", "/sample", "[1,2]").status == 400);
}

TEST_CASE("POST /layout") {
  const Response r = post("/layout", {{"model", "cg"}, {"kind", "platformer"}, {"n", 3}, {"weights", {1, 1}}, {"seed", 2}});
  REQUIRE(r.status == 200);
  CHECK(r.body["rooms"].size() == 3);
  CHECK(r.body["rooms"][0]["playable"].is_boolean());
  CHECK(r.body["layout"]["locations"].size() == 3);
  const std::size_t rows = r.body["grid"].size();
  CHECK(rows % 15 == 0);
  CHECK(r.body["grid"][0].size() % 16 == 0);
  CHECK(post("/layout", {{"model", "cg"}, {"kind", "platformer"}, {"n", 3}, {"weights", {1, 1}}, {"seed", 2}}).body ==
        r.body);
  CHECK(post("/layout", {{"model", "gm"}, {"n", 3}, {"weights", {1, 1}}}).status == 422);
  CHECK(post("/layout", {{"model", "cg"}, {"n", 0}, {"weights", {1, 1}}}).status == 400);
  CHECK(post("/layout", {{"model", "cg"}, {"kind", "maze"}, {"weights", {1, 1}}}).status == 400);
}

TEST_CASE("POST /playability") {
  const Response r = post("/playability", {{"model", "gm"}, {"grid", flat_grid()}, {"weights", {1, 1}}});
  REQUIRE(r.status == 200);
  CHECK(r.body["playable"] == true);
  CHECK(r.body["left_to_right"]["playable"] == true);
  CHECK_FALSE(r.body["left_to_right"]["path"].empty());
  CHECK(post("/playability", {{"model", "gm"}, {"grid", {{1, 2}, {3}}}, {"weights", {1, 1}}}).status == 400);
  CHECK(post("/playability", {{"model", "gm"}, {"grid", {{9999}}}, {"weights", {1, 1}}}).status == 400);
  CHECK(post("/playability", {{"model", "gm"}, {"weights", {1, 1}}}).status == 400);
  CHECK(post("/playability", {{"model", "cv"}, {"grid", flat_grid()}, {"weights", {1, 1}}}).status == 422);
}

TEST_CASE("service over a real socket") {
  HttpServer server(service());
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread t([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto models = client.Get("/models");
  REQUIRE(models);
  CHECK(models->status == 200);
  CHECK(json::parse(models->body)["models"].size() == 3);
  auto bad = client.Post("/sample", R"({"model":"gm","weights":[0,0]})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  auto vocab = client.Get("/vocab?model=cv");
  REQUIRE(vocab);
  CHECK(vocab->status == 200);
  server.stop();
  t.join();
}
