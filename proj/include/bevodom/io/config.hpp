#pragma once

// Strict JSON pipeline configuration. Every section is optional and falls
// back to the defaults below; unknown keys anywhere are an error.
//
// {
//   "grid":        {"h": 128, "w": 128, "resolution_m": 0.8, "origin": [ox, oy]},
//   "camera":      {"K": [9 reals, row-major], "E": [12 reals, row-major]},
//   "depth_bins":  {"count": 64, "min_m": 1.0, "max_m": 52.2},
//   "correlation": {"radius_pv": 3, "radius_bev": 5},
//   "sampler":     {"window_s": 60, "max_disp_m": 4, "low_deg": 15,
//                   "high_deg": 45, "high_fraction": 0.7},
//   "loss":        {"alpha": 10, "beta": 10, "lambda1": 1, "lambda2": 1}
// }

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/losses.hpp"
#include "bevodom/lss_projection.hpp"
#include "bevodom/sampler.hpp"

namespace bevodom::io {

using Json = nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DepthBinsConfig {
  int count = 64;
  double min_m = 1.0;
  double max_m = 52.2;

  std::vector<double> bins() const { return uniform_depth_bins(count, min_m, max_m); }
};

struct CorrelationConfig {
  int radius_pv = 3;
  int radius_bev = 5;
};

/// Forward-looking camera, 640 x 480, with the optical axis along vehicle x
/// (camera x -> vehicle -y, camera y -> vehicle -z, camera z -> vehicle x).
inline CameraModel default_camera() {
  Matrix3d k;
  k << 500.0, 0.0, 320.0, 0.0, 500.0, 240.0, 0.0, 0.0, 1.0;
  Eigen::Matrix<double, 3, 4> e;
  e << 0.0, 0.0, 1.0, 0.0,
       -1.0, 0.0, 0.0, 0.0,
       0.0, -1.0, 0.0, 0.0;
  return CameraModel(k, e);
}

struct PipelineConfig {
  BevGridSpec grid = BevGridSpec::centered(128, 128, 0.8);
  CameraModel camera = default_camera();
  DepthBinsConfig depth_bins;
  CorrelationConfig correlation;
  SamplerConfig sampler;
  LossWeights loss;
};

namespace detail {

inline void check_keys(const Json& obj, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + std::string(where) + "." + key + "'");
  }
}

template <typename T>
void read_opt(const Json& obj, const char* key, T& dst, std::string_view where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

inline std::vector<double> read_reals(const Json& obj, const char* key, std::size_t n,
                                      std::string_view where) {
  std::vector<double> v;
  read_opt(obj, key, v, where);
  if (v.size() != n) {
    throw ConfigError(std::string(where) + "." + key + " needs " + std::to_string(n) +
                      " numbers");
  }
  return v;
}

}  // namespace detail

inline PipelineConfig parse_config(const Json& doc) {
  using detail::check_keys;
  using detail::read_opt;
  PipelineConfig cfg;
  check_keys(doc, "config", {"grid", "camera", "depth_bins", "correlation", "sampler", "loss"});
  try {
    if (doc.contains("grid")) {
      const Json& g = doc["grid"];
      check_keys(g, "grid", {"h", "w", "resolution_m", "origin"});
      int h = cfg.grid.height_px;
      int w = cfg.grid.width_px;
      double r = cfg.grid.resolution_m;
      read_opt(g, "h", h, "grid");
      read_opt(g, "w", w, "grid");
      read_opt(g, "resolution_m", r, "grid");
      if (g.contains("origin")) {
        const auto o = detail::read_reals(g, "origin", 2, "grid");
        cfg.grid = BevGridSpec::with_origin(h, w, r, o[0], o[1]);
      } else {
        cfg.grid = BevGridSpec::centered(h, w, r);
      }
    }
    if (doc.contains("camera")) {
      const Json& c = doc["camera"];
      check_keys(c, "camera", {"K", "E"});
      Matrix3d k = cfg.camera.intrinsics();
      Eigen::Matrix<double, 3, 4> e = cfg.camera.extrinsics();
      if (c.contains("K")) {
        const auto v = detail::read_reals(c, "K", 9, "camera");
        for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = v[std::size_t(i)];
      }
      if (c.contains("E")) {
        const auto v = detail::read_reals(c, "E", 12, "camera");
        for (int i = 0; i < 12; ++i) e(i / 4, i % 4) = v[std::size_t(i)];
      }
      cfg.camera = CameraModel(k, e);
    }
    if (doc.contains("depth_bins")) {
      const Json& d = doc["depth_bins"];
      check_keys(d, "depth_bins", {"count", "min_m", "max_m"});
      read_opt(d, "count", cfg.depth_bins.count, "depth_bins");
      read_opt(d, "min_m", cfg.depth_bins.min_m, "depth_bins");
      read_opt(d, "max_m", cfg.depth_bins.max_m, "depth_bins");
      (void)cfg.depth_bins.bins();
    }
    if (doc.contains("correlation")) {
      const Json& c = doc["correlation"];
      check_keys(c, "correlation", {"radius_pv", "radius_bev"});
      read_opt(c, "radius_pv", cfg.correlation.radius_pv, "correlation");
      read_opt(c, "radius_bev", cfg.correlation.radius_bev, "correlation");
      if (cfg.correlation.radius_pv < 0 || cfg.correlation.radius_bev < 0) {
        throw ConfigError("correlation radii must be >= 0");
      }
    }
    if (doc.contains("sampler")) {
      const Json& s = doc["sampler"];
      check_keys(s, "sampler", {"window_s", "max_disp_m", "low_deg", "high_deg", "high_fraction"});
      read_opt(s, "window_s", cfg.sampler.window_s, "sampler");
      read_opt(s, "max_disp_m", cfg.sampler.max_disp_m, "sampler");
      read_opt(s, "low_deg", cfg.sampler.low_deg, "sampler");
      read_opt(s, "high_deg", cfg.sampler.high_deg, "sampler");
      read_opt(s, "high_fraction", cfg.sampler.high_fraction, "sampler");
      cfg.sampler.validate();
    }
    if (doc.contains("loss")) {
      const Json& l = doc["loss"];
      check_keys(l, "loss", {"alpha", "beta", "lambda1", "lambda2"});
      read_opt(l, "alpha", cfg.loss.alpha, "loss");
      read_opt(l, "beta", cfg.loss.beta, "loss");
      read_opt(l, "lambda1", cfg.loss.lambda1, "loss");
      read_opt(l, "lambda2", cfg.loss.lambda2, "loss");
      cfg.loss.validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

inline PipelineConfig parse_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline PipelineConfig parse_config(const std::string& text) {
  return parse_config(std::string_view(text));
}

inline PipelineConfig parse_config(const char* text) {
  return parse_config(std::string_view(text));
}

}  // namespace bevodom::io
