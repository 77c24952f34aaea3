#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gameblend/blender.hpp"

namespace gameblend {

// Five-parameter summary of a platformer jump. Units are tiles and frames.
struct JumpModel {
  double initial_velocity = 1.0;
  double rise_gravity = 1.0;
  double fall_gravity = 1.0;
  int max_hold_frames = 0;  // frames at the start with no gravity applied
  double horizontal_speed = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static JumpModel from_json(const nlohmann::json& j);
  bool operator==(const JumpModel&) const = default;
};

struct ArcPoint {
  double dx = 0.0;
  double dy = 0.0;  // up is positive
};

struct JumpOffset {
  int dx = 0;
  int dy = 0;
  bool operator==(const JumpOffset&) const = default;
};

// Per-frame tile offsets from takeoff to landing height. The last entry has dy 0.
using JumpArc = std::vector<JumpOffset>;

struct ImpulseGravity {
  double impulse = 0.0;
  double gravity = 0.0;
};

inline constexpr int kMaxJumpFrames = 1000;

// Convex combination: weights are normalized by their sum.
JumpModel blend_jump(const std::vector<JumpModel>& models, const BlendWeights& w);

// Unrounded trajectory. Each frame moves by the current velocity, then
// updates vy: unchanged while holding, minus rise gravity while vy > 0,
// minus fall gravity after. Stops on the frame y returns to <= 0.
std::vector<ArcPoint> simulate_jump(const JumpModel& model);
JumpArc derive_arc(const JumpModel& model);
// One arc per hold length 0..max_hold_frames (short hops through full
// jumps), duplicates removed. This is the agent's jump repertoire.
std::vector<JumpArc> jump_arcs(const JumpModel& model);

// Least squares for dy(t) = impulse * t - gravity * t^2 / 2, t = 1..n.
ImpulseGravity fit_impulse_gravity(const JumpArc& arc);

// Per-game parameter file: {"games": [{"name": ..., <JumpModel fields>}]}.
struct JumpTable {
  std::vector<std::string> names;
  std::vector<JumpModel> models;

  static JumpTable load(const std::filesystem::path& path);
  static JumpTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // Models in the order of `games`; throws DataError for a missing name.
  std::vector<JumpModel> select(const std::vector<std::string>& games) const;
};

}  // namespace gameblend
