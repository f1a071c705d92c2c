#pragma once

// Array and search-region representation shared by both grid backends:
// sensor-pair enumeration, integer TDOA evaluation and the per-pair local
// frame in which the constant-TDOA hyperboloids are axis aligned.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gsg/error.hpp"

namespace gsg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CellIndex = std::uint32_t;
using PairIndex = std::uint32_t;

inline constexpr double kDefaultSpeedOfSound = 343.0;

// round(): half away from zero.
inline std::int64_t round_half_away(double v) { return static_cast<std::int64_t>(std::llround(v)); }

// fix(): toward zero.
inline std::int64_t round_toward_zero(double v) { return static_cast<std::int64_t>(std::trunc(v)); }

// Nearest integer with exact halves going to the lower index.
inline std::int64_t snap_index(double v) { return static_cast<std::int64_t>(std::ceil(v - 0.5)); }

struct SensorPair {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const SensorPair&, const SensorPair&) = default;
};

// All M(M-1)/2 pairs (i < j), lexicographic.
inline std::vector<SensorPair> enumerate_pairs(std::size_t mic_count) {
  if (mic_count < 2) {
    throw ConfigError("at least two microphones are required to form a pair, got " +
                      std::to_string(mic_count));
  }
  std::vector<SensorPair> pairs;
  pairs.reserve(mic_count * (mic_count - 1) / 2);
  for (std::size_t i = 0; i + 1 < mic_count; ++i) {
    for (std::size_t j = i + 1; j < mic_count; ++j) pairs.push_back({i, j});
  }
  return pairs;
}

// T_n = fix(d fs / c), in units of 1/alpha samples when alpha > 1.
inline std::int64_t max_tdoa_samples(double distance, double fs, double c, int alpha = 1) {
  if (!(fs > 0.0) || !(c > 0.0)) throw ConfigError("fs and c must be positive");
  if (alpha < 1) throw ConfigError("interpolation factor must be >= 1");
  return alpha * round_toward_zero(distance * fs / c);
}

class MicArray {
 public:
  MicArray(std::vector<Vec3> mics, double fs, double c = kDefaultSpeedOfSound)
      : mics_(std::move(mics)), fs_(fs), c_(c) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw ConfigError("sampling frequency must be positive");
    if (!(c_ > 0.0) || !std::isfinite(c_)) throw ConfigError("speed of sound must be positive");
    pairs_ = enumerate_pairs(mics_.size());
    for (std::size_t m = 0; m < mics_.size(); ++m) {
      if (!mics_[m].allFinite()) {
        throw ConfigError("microphone " + std::to_string(m) + " has a non-finite position");
      }
    }
    for (const auto& p : pairs_) {
      if (!((mics_[p.i] - mics_[p.j]).norm() > 0.0)) {
        throw ConfigError("microphones " + std::to_string(p.i) + " and " + std::to_string(p.j) +
                          " coincide");
      }
    }
  }

  const std::vector<Vec3>& mics() const { return mics_; }
  const Vec3& mic(std::size_t m) const { return mics_.at(m); }
  const std::vector<SensorPair>& pairs() const { return pairs_; }
  const SensorPair& pair(std::size_t n) const { return pairs_.at(n); }
  std::size_t size() const { return mics_.size(); }
  std::size_t pair_count() const { return pairs_.size(); }
  double fs() const { return fs_; }
  double c() const { return c_; }

  double pair_distance(std::size_t n) const {
    const auto& p = pairs_.at(n);
    return (mics_[p.i] - mics_[p.j]).norm();
  }

  std::int64_t max_tdoa(std::size_t n, int alpha = 1) const {
    return max_tdoa_samples(pair_distance(n), fs_, c_, alpha);
  }

 private:
  std::vector<Vec3> mics_;
  std::vector<SensorPair> pairs_;
  double fs_;
  double c_;
};

// Axis-aligned search volume discretized at points origin + i*delta on a
// half-open lattice. In 2D mode there is a single z plane at origin.z.
class SearchRegion {
 public:
  SearchRegion(Vec3 origin, Vec3 extent, double delta, int dim = 2)
      : origin_(std::move(origin)), extent_(std::move(extent)), delta_(delta), dim_(dim) {
    if (dim_ != 2 && dim_ != 3) throw ConfigError("region dim must be 2 or 3");
    if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw ConfigError("region delta must be positive");
    if (!origin_.allFinite() || !extent_.allFinite()) throw ConfigError("region bounds must be finite");
    const int active = dim_;
    for (int a = 0; a < 3; ++a) {
      if (a >= active) {
        counts_[a] = 1;
        continue;
      }
      const double n = std::floor(extent_[a] / delta_ + 1e-9);
      if (!(n >= 1.0)) throw ConfigError("region extent is smaller than one delta step");
      if (n > 1e7) throw ConfigError("region has too many lattice points per axis");
      counts_[a] = static_cast<std::size_t>(n);
    }
    const double total = static_cast<double>(counts_[0]) * counts_[1] * counts_[2];
    if (total > static_cast<double>(std::numeric_limits<CellIndex>::max())) {
      throw ConfigError("region lattice exceeds the cell index range");
    }
  }

  const Vec3& origin() const { return origin_; }
  const Vec3& extent() const { return extent_; }
  double delta() const { return delta_; }
  int dim() const { return dim_; }
  const std::array<std::size_t, 3>& counts() const { return counts_; }
  std::size_t cell_count() const { return counts_[0] * counts_[1] * counts_[2]; }

  CellIndex index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return static_cast<CellIndex>(ix + counts_[0] * (iy + counts_[1] * iz));
  }

  std::array<std::size_t, 3> coords(CellIndex cell) const {
    const std::size_t ix = cell % counts_[0];
    const std::size_t rest = cell / counts_[0];
    return {ix, rest % counts_[1], rest / counts_[1]};
  }

  Vec3 point(CellIndex cell) const {
    const auto ijk = coords(cell);
    return {origin_.x() + static_cast<double>(ijk[0]) * delta_,
            origin_.y() + static_cast<double>(ijk[1]) * delta_,
            origin_.z() + static_cast<double>(ijk[2]) * delta_};
  }

  // Nearest lattice cell, or nullopt when the point snaps outside.
  std::optional<CellIndex> cell_of(const Vec3& p) const {
    std::array<std::size_t, 3> ijk{};
    for (int a = 0; a < 3; ++a) {
      const std::int64_t i = snap_index((p[a] - origin_[a]) / delta_);
      if (i < 0 || i >= static_cast<std::int64_t>(counts_[a])) return std::nullopt;
      ijk[a] = static_cast<std::size_t>(i);
    }
    return index(ijk[0], ijk[1], ijk[2]);
  }

  // Corners of the sampled volume (the 2D plane has four distinct corners).
  std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> out;
    const Vec3 hi{origin_.x() + (counts_[0] - 1) * delta_, origin_.y() + (counts_[1] - 1) * delta_,
                  origin_.z() + (counts_[2] - 1) * delta_};
    for (int k = 0; k < 8; ++k) {
      out[k] = {(k & 1) ? hi.x() : origin_.x(), (k & 2) ? hi.y() : origin_.y(),
                (k & 4) ? hi.z() : origin_.z()};
    }
    return out;
  }

 private:
  Vec3 origin_;
  Vec3 extent_;
  double delta_;
  int dim_;
  std::array<std::size_t, 3> counts_{1, 1, 1};
};

// Local frame of one sensor pair: origin at the baseline midpoint, x axis
// from mic i to mic j. local = rotation * (global - translation).
struct PairFrame {
  SensorPair pair;
  Vec3 translation;
  Mat3 rotation;  // rows are the local x, y, z axes in global coordinates
  double half_baseline = 0.0;

  Vec3 to_local(const Vec3& p) const { return rotation * (p - translation); }
  Vec3 to_global(const Vec3& q) const { return rotation.transpose() * q + translation; }
  Vec3 axis() const { return rotation.row(0).transpose(); }
  Vec3 mic_i() const { return translation - half_baseline * axis(); }
  Vec3 mic_j() const { return translation + half_baseline * axis(); }
  double distance() const { return 2.0 * half_baseline; }
};

inline PairFrame make_pair_frame(const MicArray& array, std::size_t n) {
  const SensorPair p = array.pair(n);
  const Vec3& ri = array.mic(p.i);
  const Vec3& rj = array.mic(p.j);
  const Vec3 baseline = rj - ri;
  const double d = baseline.norm();
  const Vec3 ex = baseline / d;
  // Local z is global z made orthogonal to the baseline, so planar arrays in
  // z = const keep their plane as the local (x, y) plane.
  Vec3 up = Vec3::UnitZ();
  if (std::abs(ex.dot(up)) > 0.9) up = Vec3::UnitX();
  const Vec3 ez = (up - up.dot(ex) * ex).normalized();
  const Vec3 ey = ez.cross(ex);
  PairFrame frame;
  frame.pair = p;
  frame.translation = 0.5 * (ri + rj);
  frame.rotation.row(0) = ex.transpose();
  frame.rotation.row(1) = ey.transpose();
  frame.rotation.row(2) = ez.transpose();
  frame.half_baseline = 0.5 * d;
  return frame;
}

inline std::vector<PairFrame> make_pair_frames(const MicArray& array) {
  std::vector<PairFrame> frames;
  frames.reserve(array.pair_count());
  for (std::size_t n = 0; n < array.pair_count(); ++n) frames.push_back(make_pair_frame(array, n));
  return frames;
}

inline std::int64_t max_tdoa_samples(const PairFrame& frame, double fs, double c, int alpha = 1) {
  return max_tdoa_samples(frame.distance(), fs, c, alpha);
}

// Range difference ||p - r_i|| - ||p - r_j|| in meters.
inline double range_difference(const Vec3& p, const Vec3& ri, const Vec3& rj) {
  return (p - ri).norm() - (p - rj).norm();
}

inline double range_difference(const Vec3& p, const PairFrame& frame) {
  return range_difference(p, frame.mic_i(), frame.mic_j());
}

// Integer TDOA (units of 1/alpha samples) of a point for one pair, clamped to
// the admissible range [-alpha*T_n, alpha*T_n].
inline std::int64_t tdoa_at(const Vec3& point, const PairFrame& frame, double fs, double c,
                            int alpha = 1) {
  const std::int64_t limit = max_tdoa_samples(frame, fs, c, alpha);
  const std::int64_t tau = round_half_away(range_difference(point, frame) * alpha * fs / c);
  return std::clamp(tau, -limit, limit);
}

inline std::int64_t tdoa_at(const Vec3& point, const MicArray& array, std::size_t n, int alpha = 1) {
  const auto& p = array.pair(n);
  const std::int64_t limit = array.max_tdoa(n, alpha);
  const std::int64_t tau = round_half_away(range_difference(point, array.mic(p.i), array.mic(p.j)) *
                                           alpha * array.fs() / array.c());
  return std::clamp(tau, -limit, limit);
}

}  // namespace gsg
