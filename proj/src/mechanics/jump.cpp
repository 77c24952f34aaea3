#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "gameblend/errors.hpp"
#include "gameblend/mechanics.hpp"

namespace gameblend {

void JumpModel::validate() const {
  if (!(initial_velocity > 0.0)) throw DataError("jump initial_velocity must be > 0");
  if (!(rise_gravity > 0.0) || !(fall_gravity > 0.0)) throw DataError("jump gravities must be > 0");
  if (max_hold_frames < 0) throw DataError("jump max_hold_frames must be >= 0");
  if (!std::isfinite(horizontal_speed)) throw DataError("jump horizontal_speed must be finite");
}

nlohmann::json JumpModel::to_json() const {
  return {{"initial_velocity", initial_velocity}, {"rise_gravity", rise_gravity},
          {"fall_gravity", fall_gravity},         {"max_hold_frames", max_hold_frames},
          {"horizontal_speed", horizontal_speed}};
}

JumpModel JumpModel::from_json(const nlohmann::json& j) {
  JumpModel m;
  try {
    m.initial_velocity = j.at("initial_velocity").get<double>();
    m.rise_gravity = j.at("rise_gravity").get<double>();
    m.fall_gravity = j.at("fall_gravity").get<double>();
    m.max_hold_frames = j.value("max_hold_frames", 0);
    m.horizontal_speed = j.at("horizontal_speed").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad jump model: ") + e.what());
  }
  m.validate();
  return m;
}

JumpModel blend_jump(const std::vector<JumpModel>& models, const BlendWeights& w) {
  if (static_cast<int>(models.size()) != w.size()) {
    throw BadLength("expected " + std::to_string(models.size()) + " jump weights");
  }
  const double total = w.sum();
  double hold = 0.0;
  JumpModel out{0.0, 0.0, 0.0, 0, 0.0};
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double wi = w[i] / total;
    if (wi == 0.0) continue;
    out.initial_velocity += wi * models[i].initial_velocity;
    out.rise_gravity += wi * models[i].rise_gravity;
    out.fall_gravity += wi * models[i].fall_gravity;
    out.horizontal_speed += wi * models[i].horizontal_speed;
    hold += wi * models[i].max_hold_frames;
  }
  // hold frames are discrete; a one-hot blend must stay exact
  out.max_hold_frames = static_cast<int>(std::lround(hold));
  return out;
}

std::vector<ArcPoint> simulate_jump(const JumpModel& model) {
  model.validate();
  std::vector<ArcPoint> out;
  double x = 0.0, y = 0.0, vy = model.initial_velocity;
  for (int frame = 0; frame < kMaxJumpFrames; ++frame) {
    x += model.horizontal_speed;
    y += vy;
    if (y <= 0.0) {
      out.push_back({x, 0.0});
      return out;
    }
    out.push_back({x, y});
    if (frame < model.max_hold_frames) continue;
    vy -= vy > 0.0 ? model.rise_gravity : model.fall_gravity;
  }
  throw NonTerminating("jump did not land within " + std::to_string(kMaxJumpFrames) + " frames");
}

JumpArc derive_arc(const JumpModel& model) {
  JumpArc arc;
  for (const ArcPoint& p : simulate_jump(model)) {
    arc.push_back({static_cast<int>(std::lround(p.dx)), static_cast<int>(std::lround(p.dy))});
  }
  return arc;
}

std::vector<JumpArc> jump_arcs(const JumpModel& model) {
  std::vector<JumpArc> out;
  for (int hold = 0; hold <= model.max_hold_frames; ++hold) {
    JumpModel m = model;
    m.max_hold_frames = hold;
    JumpArc arc = derive_arc(m);
    if (std::find(out.begin(), out.end(), arc) == out.end()) out.push_back(std::move(arc));
  }
  return out;
}

ImpulseGravity fit_impulse_gravity(const JumpArc& arc) {
  if (arc.size() < 3) throw DegenerateArc("need at least 3 frames to fit a jump");
  bool flat = true;
  for (const JumpOffset& o : arc) flat = flat && o.dy == arc.front().dy;
  if (flat) throw DegenerateArc("all dy values are equal");
  const Eigen::Index n = static_cast<Eigen::Index>(arc.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1);
    a(i, 0) = t;
    a(i, 1) = -0.5 * t * t;
    b(i) = arc[static_cast<std::size_t>(i)].dy;
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
  return {sol(0), sol(1)};
}

JumpTable JumpTable::from_json(const nlohmann::json& j) {
  JumpTable t;
  if (!j.contains("games") || !j["games"].is_array()) throw DataError("jump table needs a games array");
  for (const auto& g : j["games"]) {
    t.names.push_back(g.at("name").get<std::string>());
    t.models.push_back(JumpModel::from_json(g));
  }
  return t;
}

JumpTable JumpTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in, nullptr, true, true));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

nlohmann::json JumpTable::to_json() const {
  nlohmann::json games = nlohmann::json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    nlohmann::json g = models[i].to_json();
    g["name"] = names[i];
    games.push_back(std::move(g));
  }
  return {{"games", games}};
}

std::vector<JumpModel> JumpTable::select(const std::vector<std::string>& games) const {
  std::vector<JumpModel> out;
  for (const std::string& name : games) {
    std::size_t i = 0;
    while (i < names.size() && names[i] != name) ++i;
    if (i == names.size()) throw DataError("no jump parameters for game '" + name + "'");
    out.push_back(models[i]);
  }
  return out;
}

}  // namespace gameblend
