#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "doctest.h"
#include "gameblend/errors.hpp"
#include "gameblend/evalsuite.hpp"
#include "helpers.hpp"

using namespace gameblend;

namespace {

// Pattern counts keyed by a printable string; independent of count_patterns.
std::map<std::string, double> brute_patterns(const std::vector<Segment>& set, int s) {
  std::map<std::string, double> out;
  double total = 0.0;
  for (const Segment& seg : set) {
    for (int r = 0; r + s <= seg.grid.rows; ++r) {
      for (int c = 0; c + s <= seg.grid.cols; ++c) {
        std::string key;
        for (int i = 0; i < s * s; ++i) key += std::to_string(seg.grid.at(r + i / s, c + i % s)) + ",";
        out[key] += 1.0;
        total += 1.0;
      }
    }
  }
  for (auto& [k, v] : out) v /= total;
  return out;
}

double brute_kl(const std::vector<Segment>& gen, const std::vector<Segment>& ref, int s, double eps) {
  const auto p = brute_patterns(gen, s);
  const auto q = brute_patterns(ref, s);
  std::map<std::string, int> uni;
  for (const auto& [k, v] : p) uni[k] = 1;
  for (const auto& [k, v] : q) uni[k] = 1;
  double kl = 0.0;
  for (const auto& [k, pk] : p) {
    const double qk = q.count(k) ? q.at(k) : 0.0;
    kl += pk * std::log(pk / ((1.0 - eps) * qk + eps / static_cast<double>(uni.size())));
  }
  return kl;
}

Segment filled(int rows, int cols, TileId t) { return Segment{TileGrid(rows, cols, t), std::nullopt, std::nullopt}; }

FeatureMatrix separable(int n, Rng& rng, std::vector<int>& labels) {
  FeatureMatrix x;
  x.samples = n;
  x.features = 12;
  x.data.assign(static_cast<std::size_t>(n) * 12, 0.0f);
  std::bernoulli_distribution coin(0.5);
  labels.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int y = coin(rng) ? 7 : 3;
    labels[static_cast<std::size_t>(i)] = y;
    for (int f = 0; f < 12; ++f) {
      const float v = f < 6 ? (y == 7 ? 1.0f : 0.0f) : (coin(rng) ? 1.0f : 0.0f);
      x.data[static_cast<std::size_t>(f) * n + i] = v;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("scores from the published tables") {
  CHECK(blend_score(BlendWeights({1, 0, 0, 0}), {94.6, 3.8, 1.6, 0}).s == doctest::Approx(46.16));
  CHECK(blend_score(BlendWeights({0, 0, 0, 1}), {0.1, 0, 0, 99.9}).s == doctest::Approx(0.02));
  CHECK(blend_score(BlendWeights({0.5, 0.3, 0.2, 0}), {74.4, 18.6, 7, 0}).s == doctest::Approx(894.32));
  // dungeon row <011>, f = 50
  CHECK(blend_score(BlendWeights({0, 1, 1}), {0.3, 57.8, 41.9}).s == doctest::Approx(126.54));
  CHECK(blend_score(BlendWeights({1, 0, 1, 0}), {50, 0, 50, 0}).s == 0.0);
  CHECK(blend_score(BlendWeights({1, 0, 1, 0}), {50, 0, 50, 0}).factor == 50.0);
  CHECK_THROWS_AS(blend_score(BlendWeights({1, 0}), {1, 2, 3}), BadLength);
}

TEST_CASE("score is zero exactly on target and permutation invariant") {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w = {u(rng), u(rng), u(rng), u(rng) + 0.01};
    std::vector<double> p = {u(rng) * 100, u(rng) * 100, u(rng) * 100, u(rng) * 100};
    const double s = blend_score(BlendWeights(w, WeightKind::kFractional), p).s;
    CHECK(s >= 0.0);
    std::vector<double> wr(w.rbegin(), w.rend()), pr(p.rbegin(), p.rend());
    CHECK(blend_score(BlendWeights(wr, WeightKind::kFractional), pr).s == doctest::Approx(s));
    std::vector<double> exact;
    for (double x : w) exact.push_back(100.0 * x);
    CHECK(blend_score(BlendWeights(w, WeightKind::kFractional), exact).s == doctest::Approx(0.0));
  }
}

TEST_CASE("forest separates a separable problem") {
  Rng rng(3);
  std::vector<int> labels;
  const FeatureMatrix x = separable(200, rng, labels);
  ForestHyper h;
  h.trees = 25;
  h.seed = 4;
  const ForestClassifier clf = ForestClassifier::train(x, labels, h);
  REQUIRE(clf.test_accuracy());
  CHECK(*clf.test_accuracy() == 1.0);
  CHECK(clf.classes() == std::vector<int>{3, 7});
  CHECK(clf.predict(x) == labels);
  for (int i = 0; i < 5; ++i) {
    const auto pr = clf.predict_proba(x, i);
    CHECK(pr[0] + pr[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("forest edge cases") {
  FeatureMatrix x;
  x.samples = 4;
  x.features = 2;
  x.data = {0, 1, 0, 1, 1, 1, 0, 0};
  CHECK_THROWS_AS(ForestClassifier::fit(x, {1, 1, 1, 1}, {}), SingleClass);
  CHECK_THROWS_AS(ForestClassifier::fit(x, {1, 2}, {}), DimMismatch);
}

TEST_CASE("forest is deterministic and round trips") {
  Rng rng(8);
  std::vector<int> labels;
  const FeatureMatrix x = separable(80, rng, labels);
  ForestHyper h;
  h.trees = 10;
  h.seed = 12;
  const ForestClassifier a = ForestClassifier::train(x, labels, h);
  const ForestClassifier b = ForestClassifier::train(x, labels, h);
  CHECK(a.to_json() == b.to_json());
  const ForestClassifier back = ForestClassifier::from_json(a.to_json());
  CHECK(back.to_json() == a.to_json());
  CHECK(back.predict(x) == a.predict(x));
  const auto dir = testing::temp_dir("forest");
  a.save(dir / "f.json");
  CHECK(ForestClassifier::load(dir / "f.json").to_json() == a.to_json());
  nlohmann::json broken = a.to_json();
  broken["trees"] = nlohmann::json::array();
  CHECK_THROWS_AS(ForestClassifier::from_json(broken), DataError);
}

TEST_CASE("percentages sum to 100 and ignore order") {
  SyntheticOptions o;
  o.games = 3;
  o.per_game = 12;
  o.seed = 2;
  const Corpus c = make_synthetic_corpus(o);
  std::vector<int> labels;
  for (const auto& s : c.segments) labels.push_back(static_cast<int>(*s.game));
  ForestHyper h;
  h.trees = 15;
  h.seed = 1;
  const ForestClassifier clf = train_forest(c.segments, labels, c.vocab.size(), h);
  const auto p = predict_percentages(clf, c.segments, c.vocab.size());
  REQUIRE(p.size() == 3);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(100.0));
  std::vector<Segment> rev(c.segments.rbegin(), c.segments.rend());
  CHECK(predict_percentages(clf, rev, c.vocab.size()) == p);
  const std::vector<Segment> same(10, c.segments[0]);
  const auto one = predict_percentages(clf, same, c.vocab.size());
  CHECK(*std::max_element(one.begin(), one.end()) == 100.0);
  CHECK_THROWS_AS(predict_percentages(clf, {}, c.vocab.size()), EmptySet);
}

TEST_CASE("tpkldiv of a set with itself is near zero") {
  const Corpus c = make_synthetic_corpus({2, 10, false, 3});
  CHECK(tpkldiv(c.segments, c.segments) < 1e-6);
  CHECK(tpkldiv(c.segments, c.segments) >= 0.0);
  CHECK_THROWS_AS(tpkldiv({}, c.segments), EmptySet);
}

TEST_CASE("tpkldiv of disjoint single-pattern sets") {
  const std::vector<Segment> a = {filled(3, 3, 1)};
  const std::vector<Segment> b = {filled(3, 3, 2)};
  TpklOptions o;
  o.windows = {2};
  const double expect = brute_kl(a, b, 2, o.eps);
  CHECK(expect == doctest::Approx(std::log(2.0 / o.eps)));
  CHECK(tpkldiv(a, b, o) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("tpkldiv matches brute-force counting on random grids") {
  Rng rng(21);
  std::uniform_int_distribution<int> tile(0, 3);
  auto random_set = [&](int n) {
    std::vector<Segment> out;
    for (int i = 0; i < n; ++i) {
      Segment s = filled(5, 6, 0);
      for (auto& t : s.grid.cells) t = static_cast<TileId>(tile(rng));
      out.push_back(s);
    }
    return out;
  };
  for (int t = 0; t < 10; ++t) {
    const auto g = random_set(3), r = random_set(4);
    const double expect = (brute_kl(g, r, 2, 1e-5) + brute_kl(g, r, 3, 1e-5) + brute_kl(g, r, 4, 1e-5)) / 3.0;
    CHECK(tpkldiv(g, r) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(tpkldiv(g, r) >= 0.0);
  }
}

TEST_CASE("directional verdicts") {
  CHECK(directional_match(dir_from_string("1100"), dir_from_string("1100")) == MatchVerdict::kExact);
  CHECK(directional_match(dir_from_string("1000"), dir_from_string("1100")) == MatchVerdict::kAdmissibleOnly);
  CHECK(directional_match(dir_from_string("1100"), dir_from_string("1000")) == MatchVerdict::kInadmissible);
  int exact = 0, admissible = 0, inadmissible = 0;
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      const DirLabel c = dir_from_index(a), p = dir_from_index(b);
      const MatchVerdict v = directional_match(c, p);
      bool subset = true;
      for (int i = 0; i < 4; ++i) subset = subset && (!c[i] || p[i]);
      CHECK((v == MatchVerdict::kExact) == (a == b));
      CHECK((v != MatchVerdict::kInadmissible) == subset);
      exact += v == MatchVerdict::kExact;
      admissible += v == MatchVerdict::kAdmissibleOnly;
      inadmissible += v == MatchVerdict::kInadmissible;
    }
  }
  CHECK(exact + admissible + inadmissible == 256);
  CHECK(exact == 16);
  CHECK(exact + admissible == 81);  // 3^4 subset pairs
}

TEST_CASE("weight sets") {
  const auto b = binary_weights(4);
  REQUIRE(b.size() == 15);
  CHECK(b.front().label() == "0001");
  CHECK(b.back().label() == "1111");
  CHECK(b[7].label() == "1000");
  const auto f = default_fractional_weights(4);
  REQUIRE(f.size() == 4);
  CHECK(f[0].values() == std::vector<double>{0.5, 0.3, 0.2, 0.0});
  CHECK(f[1].values() == std::vector<double>{0.1, 0.1, 0.1, 0.7});
  CHECK(f[2].values() == std::vector<double>{0.1, 0.6, 0.2, 0.1});
  CHECK(f[3].values() == std::vector<double>{0.0, 0.2, 0.3, 0.5});
  CHECK(default_fractional_weights(3).size() == 3);
  CHECK(binary_weights(3).size() == 7);
}

TEST_CASE("experiment rows and report round trip") {
  SyntheticOptions o;
  o.games = 2;
  o.per_game = 10;
  o.directional = true;
  o.seed = 4;
  const Corpus c = make_synthetic_corpus(o);
  ModelConfig mc = ModelConfig::defaults(Family::kCgmvae, 2, 3);
  mc.encoder_hidden = {6};
  mc.decoder_hidden = {6};
  mc.epochs = 2;
  const ModelCheckpoint m = train_model(c, mc);

  std::vector<int> games, dirs;
  for (const auto& s : c.segments) {
    games.push_back(static_cast<int>(*s.game));
    dirs.push_back(dir_to_index(*s.dir));
  }
  ForestHyper h;
  h.trees = 5;
  const ForestClassifier gc = train_forest(c.segments, games, c.vocab.size(), h);
  const ForestClassifier dc = train_forest(c.segments, dirs, c.vocab.size(), h);

  ExperimentSpec spec;
  spec.model = &m;
  spec.classifier = &gc;
  spec.dir_classifier = &dc;
  spec.references = {{c.segments.begin(), c.segments.begin() + 10}, {c.segments.begin() + 10, c.segments.end()}};
  spec.jumps = {{1.0, 0.25, 0.5, 2, 1.0}, {0.8, 0.2, 0.3, 2, 0.8}};
  spec.weights = binary_weights(2);
  spec.weights.push_back(BlendWeights({0.3, 0.7}));
  spec.samples = 6;
  spec.dir_samples = 2;
  spec.seed = 5;
  const Report r = run_experiment(spec);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK(row.percentages.size() == 2);
    CHECK(row.percentages[0] + row.percentages[1] == doctest::Approx(100.0));
    CHECK(row.playable.has_value());
    CHECK(row.tpkldiv.size() == 2);
    REQUIRE(row.exact.has_value());
    CHECK(*row.exact <= *row.admissible + 1e-9);
    CHECK(*row.admissible + *row.inadmissible == doctest::Approx(100.0));
  }
  CHECK(run_experiment(spec) == r);
  CHECK(Report::from_json(r.to_json()) == r);

  const auto dir = testing::temp_dir("report");
  r.write(dir);
  for (const char* f : {"report.json", "classification.csv", "playability.csv", "tpkldiv.csv", "directional.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(r.classification_csv().find("weights") != std::string::npos);
}
