#pragma once

// JSON configuration: array, region, analysis, scene and evaluation settings.
//
// {
//   "array":  {"fs": 44100, "c": 343, "mics": [[x, y, z], ...]},
//   "region": {"origin": [x, y, z], "extent": [gx, gy, gz], "delta": 0.1, "dim": 2},
//   "alpha": 1, "mu": 0, "backend": "gsg", "restrict_sensitivity": null, "normalize": false,
//   "framing": {"length": 4096, "hop": 1024, "window": "rectangular", "smoothing": 0},
//   "scene": {"room": [...], "source": [...], "reflection_order": 0, "absorption": 0.5,
//             "snr_db": null, "seed": 1, "seconds": 0.5, "burst": 0.25, "gap": 0.05},
//   "evaluation": {"trials": 100, "seed": 1, "threshold": 0.2, "clearance": 0.1,
//                  "placement": "uniform", "backends": ["urg", "gsg"],
//                  "zones": [{"label": "A", "lo": [...], "hi": [...]}]}
// }
//
// Every key is optional except array.mics, array.fs and the region. A null
// snr_db means noiseless.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsg/error.hpp"
#include "gsg/eval.hpp"
#include "gsg/geometry.hpp"
#include "gsg/sim.hpp"
#include "gsg/srp.hpp"

namespace gsg {

struct SceneSettings {
  Vec3 room{4.0, 3.0, 3.0};
  Vec3 source{2.0, 1.5, 1.5};
  int reflection_order = 0;
  double absorption = 0.5;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  double seconds = 0.5;
  double burst = 0.25;
  double gap = 0.05;
};

struct EvalSettings {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double threshold = 0.2;
  double clearance = 0.1;
  Placement placement = Placement::uniform;
  std::vector<Backend> backends{Backend::urg, Backend::gsg};
  std::vector<Zone> zones;
};

struct Config {
  std::vector<Vec3> mics;
  double fs = 44100.0;
  double c = kDefaultSpeedOfSound;
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 extent{1.0, 1.0, 1.0};
  double delta = 0.1;
  int dim = 2;
  int alpha = 1;
  std::uint32_t mu = 0;
  Backend backend = Backend::gsg;
  std::optional<std::uint32_t> restrict_sensitivity;
  bool normalize = false;
  FramingOptions framing{};
  double smoothing = 0.0;
  SceneSettings scene{};
  EvalSettings evaluation{};

  MicArray array() const { return MicArray(mics, fs, c); }
  SearchRegion region() const { return SearchRegion(origin, extent, delta, dim); }

  LocalizerOptions localizer() const {
    LocalizerOptions o;
    o.alpha = alpha;
    o.framing = framing;
    o.gcc.smoothing = smoothing;
    o.srp.normalize_by_delta = normalize;
    o.restrict_threshold = restrict_sensitivity;
    o.mu = mu;
    return o;
  }

  SimScene sim_scene(std::vector<double> signal) const {
    SimScene s;
    s.room = scene.room;
    s.source = scene.source;
    s.signal = std::move(signal);
    s.reflection_order = scene.reflection_order;
    s.absorption = scene.absorption;
    s.snr_db = scene.snr_db;
    s.seed = scene.seed;
    return s;
  }

  EvalConfig eval_config() const {
    EvalConfig e(array(), region());
    e.room = scene.room;
    e.zones = evaluation.zones;
    if (e.zones.empty()) e.zones.push_back(Zone{"all", origin, origin + extent});
    e.backends = evaluation.backends;
    e.localizer = localizer();
    e.trials = evaluation.trials;
    e.seed = evaluation.seed;
    e.snr_db = scene.snr_db;
    e.reflection_order = scene.reflection_order;
    e.absorption = scene.absorption;
    e.signal_seconds = scene.seconds;
    e.burst_seconds = scene.burst;
    e.gap_seconds = scene.gap;
    e.threshold = evaluation.threshold;
    e.clearance = evaluation.clearance;
    e.placement = evaluation.placement;
    return e;
  }
};

namespace detail {

using nlohmann::json;

inline Vec3 vec3(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) throw ConfigError(key + " must be a list of 2 or 3 numbers");
  Vec3 v{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < j.size(); ++a) {
    if (!j[a].is_number()) throw ConfigError(key + " must contain numbers");
    v[static_cast<int>(a)] = j[a].get<double>();
  }
  return v;
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

inline Window parse_window(const std::string& s) {
  if (s == "rectangular") return Window::rectangular;
  if (s == "hann") return Window::hann;
  throw ConfigError("unknown window '" + s + "'");
}

}  // namespace detail

inline Config parse_config(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Config cfg;
  try {
    if (!j.contains("array")) throw ConfigError("missing 'array' section");
    const auto& a = j["array"];
    if (!a.contains("mics") || !a["mics"].is_array()) throw ConfigError("array.mics must be a list");
    for (std::size_t m = 0; m < a["mics"].size(); ++m) {
      cfg.mics.push_back(detail::vec3(a["mics"][m], "array.mics[" + std::to_string(m) + "]"));
    }
    if (!a.contains("fs")) throw ConfigError("missing array.fs");
    cfg.fs = a["fs"].get<double>();
    detail::read_opt(a, "c", cfg.c);

    if (!j.contains("region")) throw ConfigError("missing 'region' section");
    const auto& r = j["region"];
    if (r.contains("origin")) cfg.origin = detail::vec3(r["origin"], "region.origin");
    if (!r.contains("extent")) throw ConfigError("missing region.extent");
    cfg.extent = detail::vec3(r["extent"], "region.extent");
    detail::read_opt(r, "delta", cfg.delta);
    detail::read_opt(r, "dim", cfg.dim);

    detail::read_opt(j, "alpha", cfg.alpha);
    detail::read_opt(j, "mu", cfg.mu);
    if (j.contains("backend")) cfg.backend = parse_backend(j["backend"].get<std::string>());
    if (j.contains("restrict_sensitivity") && !j["restrict_sensitivity"].is_null()) {
      cfg.restrict_sensitivity = j["restrict_sensitivity"].get<std::uint32_t>();
    }
    detail::read_opt(j, "normalize", cfg.normalize);

    if (j.contains("framing")) {
      const auto& f = j["framing"];
      detail::read_opt(f, "length", cfg.framing.length);
      detail::read_opt(f, "hop", cfg.framing.hop);
      if (f.contains("window")) cfg.framing.window = detail::parse_window(f["window"].get<std::string>());
      detail::read_opt(f, "smoothing", cfg.smoothing);
    }

    if (j.contains("scene")) {
      const auto& s = j["scene"];
      if (s.contains("room")) cfg.scene.room = detail::vec3(s["room"], "scene.room");
      if (s.contains("source")) cfg.scene.source = detail::vec3(s["source"], "scene.source");
      detail::read_opt(s, "reflection_order", cfg.scene.reflection_order);
      detail::read_opt(s, "absorption", cfg.scene.absorption);
      detail::read_opt(s, "snr_db", cfg.scene.snr_db);
      detail::read_opt(s, "seed", cfg.scene.seed);
      detail::read_opt(s, "seconds", cfg.scene.seconds);
      detail::read_opt(s, "burst", cfg.scene.burst);
      detail::read_opt(s, "gap", cfg.scene.gap);
    }

    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      detail::read_opt(e, "trials", cfg.evaluation.trials);
      detail::read_opt(e, "seed", cfg.evaluation.seed);
      detail::read_opt(e, "threshold", cfg.evaluation.threshold);
      detail::read_opt(e, "clearance", cfg.evaluation.clearance);
      if (e.contains("placement")) cfg.evaluation.placement = parse_placement(e["placement"].get<std::string>());
      if (e.contains("backends")) {
        cfg.evaluation.backends.clear();
        for (const auto& b : e["backends"]) cfg.evaluation.backends.push_back(parse_backend(b.get<std::string>()));
      }
      if (e.contains("zones")) {
        for (const auto& z : e["zones"]) {
          Zone zone;
          detail::read_opt(z, "label", zone.label);
          zone.lo = detail::vec3(z.at("lo"), "zone.lo");
          zone.hi = detail::vec3(z.at("hi"), "zone.hi");
          cfg.evaluation.zones.push_back(zone);
        }
      }
    }
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  // Construct once so invalid geometry is reported at load time.
  (void)cfg.array();
  (void)cfg.region();
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Doubles are written in shortest round-trip form (up to 17 significant digits).
inline std::string to_json(const Config& cfg) {
  using detail::json;
  json j;
  json mics = json::array();
  for (const auto& m : cfg.mics) mics.push_back(detail::vec3_json(m));
  j["array"] = {{"fs", cfg.fs}, {"c", cfg.c}, {"mics", mics}};
  j["region"] = {{"origin", detail::vec3_json(cfg.origin)},
                 {"extent", detail::vec3_json(cfg.extent)},
                 {"delta", cfg.delta},
                 {"dim", cfg.dim}};
  j["alpha"] = cfg.alpha;
  j["mu"] = cfg.mu;
  j["backend"] = to_string(cfg.backend);
  j["restrict_sensitivity"] = cfg.restrict_sensitivity ? json(*cfg.restrict_sensitivity) : json(nullptr);
  j["normalize"] = cfg.normalize;
  j["framing"] = {{"length", cfg.framing.length},
                  {"hop", cfg.framing.hop},
                  {"window", cfg.framing.window == Window::hann ? "hann" : "rectangular"},
                  {"smoothing", cfg.smoothing}};
  j["scene"] = {{"room", detail::vec3_json(cfg.scene.room)},
                {"source", detail::vec3_json(cfg.scene.source)},
                {"reflection_order", cfg.scene.reflection_order},
                {"absorption", cfg.scene.absorption},
                {"snr_db", std::isfinite(cfg.scene.snr_db) ? json(cfg.scene.snr_db) : json(nullptr)},
                {"seed", cfg.scene.seed},
                {"seconds", cfg.scene.seconds},
                {"burst", cfg.scene.burst},
                {"gap", cfg.scene.gap}};
  json backends = json::array();
  for (Backend b : cfg.evaluation.backends) backends.push_back(to_string(b));
  json zones = json::array();
  for (const auto& z : cfg.evaluation.zones) {
    zones.push_back({{"label", z.label}, {"lo", detail::vec3_json(z.lo)}, {"hi", detail::vec3_json(z.hi)}});
  }
  j["evaluation"] = {{"trials", cfg.evaluation.trials},       {"seed", cfg.evaluation.seed},
                     {"threshold", cfg.evaluation.threshold}, {"clearance", cfg.evaluation.clearance},
                     {"placement", to_string(cfg.evaluation.placement)},
                     {"backends", backends},                  {"zones", zones}};
  return j.dump(2) + "\n";
}

}  // namespace gsg
