#pragma once

// Planar synthetic trajectories built from motion primitives, with an
// estimate derived from the ground truth by per-step noise and a uniform
// scale drift on the step translations.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/trajectory.hpp"

namespace bevodom::io {

struct MotionPrimitive {
  enum class Kind { straight, arc, stop };
  Kind kind = Kind::straight;
  double duration_s = 1.0;
  double speed_mps = 0.0;
  double radius_m = 0.0;  // arc only; positive turns left (counter-clockwise)
};

struct SynthSpec {
  std::vector<MotionPrimitive> primitives;
  double rate_hz = 10.0;
  double trans_sigma_m = 0.0;   // per-step translation noise, each planar axis
  double yaw_sigma_rad = 0.0;   // per-step yaw noise
  double scale_drift = 1.0;     // est step translation = scale_drift * gt step
  std::uint64_t seed = 0;
};

namespace detail {

/// Composes a body-frame step (forward dx, left dy, dyaw) onto a planar state.
inline void advance(double& x, double& y, double& yaw, double dx, double dy, double dyaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  x += c * dx - s * dy;
  y += s * dx + c * dy;
  yaw = wrap_angle(yaw + dyaw);
}

}  // namespace detail

/// Returns (gt, est). Frame k has timestamp k / rate_hz; frame 0 is the
/// identity. Deterministic for a given seed.
inline std::pair<Trajectory, Trajectory> synth_trajectory(const SynthSpec& spec) {
  if (!(spec.rate_hz > 0.0)) throw Error("synth: rate_hz must be positive");
  if (!(spec.trans_sigma_m >= 0.0) || !(spec.yaw_sigma_rad >= 0.0)) {
    throw Error("synth: noise sigmas must be >= 0");
  }
  if (!(spec.scale_drift > 0.0)) throw Error("synth: scale_drift must be positive");
  const double dt = 1.0 / spec.rate_hz;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Trajectory gt;
  Trajectory est;
  double gx = 0, gy = 0, gyaw = 0;
  double ex = 0, ey = 0, eyaw = 0;
  std::int64_t frame = 0;
  gt.push_back(0.0, Pose3());
  est.push_back(0.0, Pose3());

  for (const auto& prim : spec.primitives) {
    if (!(prim.duration_s > 0.0)) throw Error("synth: durations must be positive");
    if (prim.speed_mps < 0.0) throw Error("synth: speeds must be >= 0");
    const auto steps = std::int64_t(std::llround(prim.duration_s * spec.rate_hz));
    if (steps < 1) throw Error("synth: primitive shorter than one sample");
    double dx = 0.0;
    double dy = 0.0;
    double dyaw = 0.0;
    const double ds = prim.speed_mps * dt;
    switch (prim.kind) {
      case MotionPrimitive::Kind::straight:
        dx = ds;
        break;
      case MotionPrimitive::Kind::arc: {
        if (prim.radius_m == 0.0) throw Error("synth: arc radius must be nonzero");
        dyaw = ds / prim.radius_m;
        dx = prim.radius_m * std::sin(dyaw);
        dy = prim.radius_m * (1.0 - std::cos(dyaw));
        break;
      }
      case MotionPrimitive::Kind::stop:
        break;
    }
    for (std::int64_t k = 0; k < steps; ++k) {
      detail::advance(gx, gy, gyaw, dx, dy, dyaw);
      double nx = 0.0, ny = 0.0, nyaw = 0.0;
      if (spec.trans_sigma_m > 0.0) {
        nx = spec.trans_sigma_m * unit(rng);
        ny = spec.trans_sigma_m * unit(rng);
      }
      if (spec.yaw_sigma_rad > 0.0) nyaw = spec.yaw_sigma_rad * unit(rng);
      detail::advance(ex, ey, eyaw, spec.scale_drift * dx + nx,
                      spec.scale_drift * dy + ny, dyaw + nyaw);
      ++frame;
      const double t = double(frame) / spec.rate_hz;
      gt.push_back(t, pose2_to_pose3(Pose2(gyaw, gx, gy)));
      est.push_back(t, pose2_to_pose3(Pose2(eyaw, ex, ey)));
    }
  }
  return {std::move(gt), std::move(est)};
}

/// JSON form:
/// {"rate_hz": 10, "seed": 1, "scale_drift": 1.0,
///  "noise": {"trans_sigma_m": 0.0, "yaw_sigma_rad": 0.0},
///  "primitives": [{"type": "straight", "duration_s": 10, "speed_mps": 5},
///                 {"type": "arc", "duration_s": 5, "speed_mps": 5, "radius_m": 20},
///                 {"type": "stop", "duration_s": 2}]}
inline SynthSpec parse_synth_spec(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("synth spec is not valid JSON: ") + e.what());
  }
  auto reject_unknown = [](const json& obj, std::initializer_list<std::string_view> keys,
                           std::string_view where) {
    if (!obj.is_object()) throw Error(std::string(where) + " must be an object");
    for (const auto& [k, _] : obj.items()) {
      bool ok = false;
      for (auto a : keys) ok = ok || k == a;
      if (!ok) throw Error("synth spec: unknown key '" + std::string(where) + "." + k + "'");
    }
  };
  SynthSpec spec;
  try {
    reject_unknown(doc, {"rate_hz", "seed", "scale_drift", "noise", "primitives"}, "spec");
    spec.rate_hz = doc.value("rate_hz", spec.rate_hz);
    spec.seed = doc.value("seed", spec.seed);
    spec.scale_drift = doc.value("scale_drift", spec.scale_drift);
    if (doc.contains("noise")) {
      const json& n = doc["noise"];
      reject_unknown(n, {"trans_sigma_m", "yaw_sigma_rad"}, "noise");
      spec.trans_sigma_m = n.value("trans_sigma_m", 0.0);
      spec.yaw_sigma_rad = n.value("yaw_sigma_rad", 0.0);
    }
    for (const json& p : doc.at("primitives")) {
      reject_unknown(p, {"type", "duration_s", "speed_mps", "radius_m"}, "primitive");
      MotionPrimitive m;
      const std::string type = p.at("type").get<std::string>();
      if (type == "straight") {
        m.kind = MotionPrimitive::Kind::straight;
      } else if (type == "arc") {
        m.kind = MotionPrimitive::Kind::arc;
        m.radius_m = p.at("radius_m").get<double>();
      } else if (type == "stop") {
        m.kind = MotionPrimitive::Kind::stop;
      } else {
        throw Error("synth spec: unknown primitive type '" + type + "'");
      }
      m.duration_s = p.at("duration_s").get<double>();
      m.speed_mps = p.value("speed_mps", 0.0);
      spec.primitives.push_back(m);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("synth spec: ") + e.what());
  }
  return spec;
}

}  // namespace bevodom::io
