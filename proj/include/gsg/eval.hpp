#pragma once

// Frame-by-frame localization over a multichannel stream, accuracy metrics,
// and the seeded Monte Carlo evaluation harness.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/gcc_phat.hpp"
#include "gsg/geometry.hpp"
#include "gsg/grid.hpp"
#include "gsg/sim.hpp"
#include "gsg/srp.hpp"

namespace gsg {

struct Metrics {
  double rms = 0.0;
  double ar = 0.0;  // percent of errors strictly below the threshold
};

// nullopt for an empty error list.
inline std::optional<Metrics> metrics(const std::vector<double>& errors, double threshold = 0.2) {
  if (errors.empty()) return std::nullopt;
  double sq = 0.0;
  std::size_t hits = 0;
  for (double e : errors) {
    sq += e * e;
    if (e < threshold) ++hits;
  }
  const auto n = static_cast<double>(errors.size());
  return Metrics{std::sqrt(sq / n), 100.0 * static_cast<double>(hits) / n};
}

struct LocalizerOptions {
  int alpha = 1;
  FramingOptions framing{};
  GccPhat::Options gcc{};
  GsgSrpOptions srp{};
  std::optional<std::uint32_t> restrict_threshold;  // search only cells with delta >= threshold
  std::uint32_t mu = 0;                             // 0: dimension default
};

struct FrameEstimate {
  std::size_t frame = 0;
  double time = 0.0;  // seconds, frame start
  LocationEstimate estimate;
  bool fallback = false;  // restriction was empty, searched the full map instead
};

// Owns the grid tables of both backends (built on first use) and a GCC engine.
class Localizer {
 public:
  Localizer(MicArray array, SearchRegion region, LocalizerOptions options = {})
      : array_(std::move(array)), region_(std::move(region)), options_(options) {
    if (options_.alpha < 1) throw ConfigError("interpolation factor must be >= 1");
  }

  const MicArray& array() const { return array_; }
  const SearchRegion& region() const { return region_; }
  const LocalizerOptions& options() const { return options_; }

  const UrgTable& urg() {
    if (!urg_) urg_ = std::make_unique<UrgTable>(build_urg(region_, array_, options_.alpha));
    return *urg_;
  }

  const GsgTables& gsg() {
    if (!gsg_) {
      gsg_ = std::make_unique<GsgTables>(build_gsg(region_, array_, GsgOptions{options_.alpha, options_.mu}));
      accumulator_ = std::make_unique<GsgAccumulator>(gsg_->lut, gsg_->grid);
    }
    return *gsg_;
  }

  std::vector<GccSet> gcc_frames(const MultiChannel& signal) {
    if (signal.channel_count() != array_.size()) {
      throw ConfigError("signal has " + std::to_string(signal.channel_count()) + " channels, array has " +
                        std::to_string(array_.size()) + " microphones");
    }
    const auto framing = frame_stream(signal, options_.framing);
    if (!engine_) engine_ = std::make_unique<GccPhat>(options_.framing.length, options_.alpha, options_.gcc);
    engine_->reset();
    std::vector<GccSet> out;
    out.reserve(framing.frames.size());
    for (const auto& f : framing.frames) out.push_back(engine_->all_pairs(f, array_));
    return out;
  }

  SrpResult power_map(const GccSet& gcc, Backend backend, std::size_t frame = 0) {
    if (backend == Backend::urg) return srp_urg(gcc, urg(), region_, frame);
    gsg();
    return accumulator_->run(gcc, region_, frame, options_.srp);
  }

  FrameEstimate estimate(const GccSet& gcc, Backend backend, std::size_t frame = 0) {
    FrameEstimate out;
    out.frame = frame;
    out.time = static_cast<double>(frame * options_.framing.hop) / array_.fs();
    auto result = power_map(gcc, backend, frame);
    out.estimate = result.estimate;
    if (options_.restrict_threshold && out.estimate.ok()) {
      const auto restricted = restrict_to_sensitivity(result.map, gsg().sensitivity, *options_.restrict_threshold);
      if (restricted) {
        out.estimate = locate(*restricted, region_);
      } else {
        out.fallback = true;
      }
    }
    return out;
  }

  std::vector<FrameEstimate> run(const MultiChannel& signal, Backend backend) {
    std::vector<FrameEstimate> out;
    const auto sets = gcc_frames(signal);
    for (std::size_t k = 0; k < sets.size(); ++k) out.push_back(estimate(sets[k], backend, k));
    return out;
  }

 private:
  MicArray array_;
  SearchRegion region_;
  LocalizerOptions options_;
  std::unique_ptr<UrgTable> urg_;
  std::unique_ptr<GsgTables> gsg_;
  std::unique_ptr<GsgAccumulator> accumulator_;
  std::unique_ptr<GccPhat> engine_;
};

struct Zone {
  std::string label = "all";
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};
};

enum class Placement {
  uniform,           // continuous position inside the zone
  lattice,           // a lattice point inside the zone
  lattice_coherent,  // a lattice point of the coherent grid inside the zone
};

inline const char* to_string(Placement p) {
  switch (p) {
    case Placement::uniform: return "uniform";
    case Placement::lattice: return "lattice";
    case Placement::lattice_coherent: return "lattice-coherent";
  }
  return "?";
}

inline Placement parse_placement(const std::string& s) {
  if (s == "uniform") return Placement::uniform;
  if (s == "lattice") return Placement::lattice;
  if (s == "lattice-coherent") return Placement::lattice_coherent;
  throw ConfigError("unknown placement '" + s + "'");
}

struct EvalConfig {
  EvalConfig(MicArray a, SearchRegion r) : array(std::move(a)), region(std::move(r)) {}

  MicArray array;
  SearchRegion region;
  Vec3 room{4.0, 3.0, 3.0};
  std::vector<Zone> zones;
  std::vector<Backend> backends{Backend::urg, Backend::gsg};
  LocalizerOptions localizer{};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double snr_db = std::numeric_limits<double>::infinity();
  int reflection_order = 0;
  double absorption = 0.5;
  double signal_seconds = 0.5;
  double burst_seconds = 0.25;
  double gap_seconds = 0.05;
  double threshold = 0.2;
  double clearance = 0.1;
  Placement placement = Placement::uniform;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t frame = 0;
  Vec3 truth{0.0, 0.0, 0.0};
  std::optional<Vec3> estimate;
  EstimateStatus status = EstimateStatus::ok;
  double squared_error = 0.0;
  double peak = 0.0;
  std::size_t ties = 0;
};

struct EvalReport {
  std::string zone;
  Backend backend = Backend::gsg;
  std::size_t trials = 0;
  std::vector<TrialRecord> records;
  std::size_t estimates = 0;  // records with an estimate
  double rms = std::numeric_limits<double>::quiet_NaN();
  double ar = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline bool admissible(const Vec3& p, const EvalConfig& cfg) {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < cfg.clearance || p[a] > cfg.room[a] - cfg.clearance) return false;
  }
  for (const auto& m : cfg.array.mics()) {
    if ((p - m).norm() < cfg.clearance) return false;
  }
  return true;
}

inline bool in_zone(const Vec3& p, const Zone& z, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (p[a] < z.lo[a] || p[a] > z.hi[a]) return false;
  }
  return true;
}

inline std::vector<CellIndex> lattice_candidates(const EvalConfig& cfg, const Zone& zone,
                                                 const SensitivityMap* sens) {
  std::vector<CellIndex> out;
  for (std::size_t g = 0; g < cfg.region.cell_count(); ++g) {
    const auto cell = static_cast<CellIndex>(g);
    const Vec3 p = cfg.region.point(cell);
    if (!in_zone(p, zone, cfg.region.dim()) || !admissible(p, cfg)) continue;
    if (sens != nullptr && sens->delta[cell] == 0) continue;
    out.push_back(cell);
  }
  return out;
}

class SourceSampler {
 public:
  SourceSampler(const EvalConfig& cfg, const Zone& zone, const SensitivityMap* sens) : cfg_(&cfg), zone_(zone) {
    if (cfg.placement == Placement::uniform) {
      for (int a = 0; a < 3; ++a) {
        lo_[a] = std::max(zone.lo[a], cfg.clearance);
        hi_[a] = std::min(zone.hi[a], cfg.room[a] - cfg.clearance);
      }
      if (cfg.region.dim() == 2) lo_.z() = hi_.z() = cfg.region.origin().z();
      for (int a = 0; a < 3; ++a) {
        if (lo_[a] > hi_[a]) throw ConfigError("zone '" + zone.label + "' has no admissible placement");
      }
    } else {
      cells_ = lattice_candidates(cfg, zone, cfg.placement == Placement::lattice_coherent ? sens : nullptr);
      if (cells_.empty()) throw ConfigError("zone '" + zone.label + "' has no admissible placement");
    }
  }

  Vec3 draw(std::mt19937_64& rng) const {
    if (!cells_.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, cells_.size() - 1);
      return cfg_->region.point(cells_[pick(rng)]);
    }
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) {
        std::uniform_real_distribution<double> u(lo_[a], hi_[a]);
        p[a] = lo_[a] == hi_[a] ? lo_[a] : u(rng);
      }
      if (admissible(p, *cfg_)) return p;
    }
    throw ConfigError("zone '" + zone_.label + "' has no admissible placement");
  }

 private:
  const EvalConfig* cfg_;
  Zone zone_;
  Vec3 lo_{0.0, 0.0, 0.0};
  Vec3 hi_{0.0, 0.0, 0.0};
  std::vector<CellIndex> cells_;
};

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t zone, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(zone), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

}  // namespace detail

// One report per (zone, backend). Every backend sees the same scenes, and
// every non-silent frame of every trial counts equally.
inline std::vector<EvalReport> evaluate(const EvalConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.zones.empty()) throw ConfigError("at least one evaluation zone is required");
  if (cfg.backends.empty()) throw ConfigError("at least one backend is required");
  if (!(cfg.threshold > 0.0)) throw ConfigError("accuracy threshold must be positive");

  Localizer localizer(cfg.array, cfg.region, cfg.localizer);
  const SensitivityMap* sens = nullptr;
  if (cfg.placement == Placement::lattice_coherent) sens = &localizer.gsg().sensitivity;

  std::vector<EvalReport> reports;
  for (std::size_t z = 0; z < cfg.zones.size(); ++z) {
    const detail::SourceSampler sampler(cfg, cfg.zones[z], sens);
    const std::size_t first = reports.size();
    for (Backend b : cfg.backends) {
      EvalReport r;
      r.zone = cfg.zones[z].label;
      r.backend = b;
      r.trials = cfg.trials;
      reports.push_back(std::move(r));
    }
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      auto rng = detail::trial_rng(cfg.seed, z, t);
      SimScene scene;
      scene.room = cfg.room;
      scene.source = sampler.draw(rng);
      scene.reflection_order = cfg.reflection_order;
      scene.absorption = cfg.absorption;
      scene.snr_db = cfg.snr_db;
      scene.seed = rng();
      scene.signal = noise_bursts(cfg.array.fs(), cfg.signal_seconds, rng(), cfg.burst_seconds, cfg.gap_seconds);
      const auto signal = synthesize(scene, cfg.array);
      const auto sets = localizer.gcc_frames(signal);
      for (std::size_t bi = 0; bi < cfg.backends.size(); ++bi) {
        auto& report = reports[first + bi];
        for (std::size_t k = 0; k < sets.size(); ++k) {
          const auto fe = localizer.estimate(sets[k], cfg.backends[bi], k);
          TrialRecord rec;
          rec.trial = t;
          rec.frame = k;
          rec.truth = scene.source;
          rec.status = fe.estimate.status;
          rec.peak = fe.estimate.peak;
          rec.ties = fe.estimate.ties;
          if (fe.estimate.ok()) {
            rec.estimate = fe.estimate.position;
            rec.squared_error = (*fe.estimate.position - scene.source).squaredNorm();
          }
          report.records.push_back(rec);
        }
      }
    }
    for (std::size_t bi = 0; bi < cfg.backends.size(); ++bi) {
      auto& report = reports[first + bi];
      std::vector<double> errors;
      for (const auto& rec : report.records) {
        if (rec.estimate) errors.push_back(std::sqrt(rec.squared_error));
      }
      report.estimates = errors.size();
      if (const auto m = metrics(errors, cfg.threshold)) {
        report.rms = m->rms;
        report.ar = m->ar;
      }
    }
  }
  return reports;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

inline std::string report_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "zone,backend,trials,estimates,rms_m,ar_percent\n";
  for (const auto& r : reports) {
    out << r.zone << ',' << to_string(r.backend) << ',' << r.trials << ',' << r.estimates << ','
        << detail::fmt(r.rms) << ',' << detail::fmt(r.ar) << '\n';
  }
  return out.str();
}

inline std::string trials_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "zone,backend,trial,frame,true_x,true_y,true_z,est_x,est_y,est_z,squared_error,peak,status,ties\n";
  for (const auto& r : reports) {
    for (const auto& rec : r.records) {
      out << r.zone << ',' << to_string(r.backend) << ',' << rec.trial << ',' << rec.frame;
      for (int a = 0; a < 3; ++a) out << ',' << detail::fmt(rec.truth[a]);
      for (int a = 0; a < 3; ++a) out << ',' << (rec.estimate ? detail::fmt((*rec.estimate)[a]) : "");
      out << ',' << detail::fmt(rec.squared_error) << ',' << detail::fmt(rec.peak) << ',' << to_string(rec.status)
          << ',' << rec.ties << '\n';
    }
  }
  return out.str();
}

inline std::string estimates_csv(const std::vector<FrameEstimate>& frames) {
  std::ostringstream out;
  out << "frame,time_s,x,y,z,peak,status,ties,fallback\n";
  for (const auto& f : frames) {
    out << f.frame << ',' << detail::fmt(f.time);
    for (int a = 0; a < 3; ++a) {
      out << ',' << (f.estimate.position ? detail::fmt((*f.estimate.position)[a]) : "");
    }
    out << ',' << detail::fmt(f.estimate.peak) << ',' << to_string(f.estimate.status) << ',' << f.estimate.ties
        << ',' << (f.fallback ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace gsg
