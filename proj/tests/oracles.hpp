#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's transform, tracing or accumulation code.

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "gsg/geometry.hpp"

namespace oracle {

using gsg::Vec3;

// Normalized circular cross-correlation: sum_k a[k] b[k - lag] / (|a| |b|).
inline double xcorr(const std::vector<double>& a, const std::vector<double>& b, std::int64_t lag) {
  const auto n = static_cast<std::int64_t>(a.size());
  double s = 0.0, ea = 0.0, eb = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    s += a[k] * b[((k - lag) % n + n) % n];
    ea += a[k] * a[k];
    eb += b[k] * b[k];
  }
  return s / std::sqrt(ea * eb);
}

inline std::int64_t xcorr_peak(const std::vector<double>& a, const std::vector<double>& b, std::int64_t max_lag) {
  std::int64_t best = -max_lag;
  double v = -1e300;
  for (std::int64_t l = -max_lag; l <= max_lag; ++l) {
    const double c = xcorr(a, b, l);
    if (c > v) {
      v = c;
      best = l;
    }
  }
  return best;
}

// Circular shift: out[k] = in[k - d].
inline std::vector<double> delayed(const std::vector<double>& in, std::int64_t d) {
  const auto n = static_cast<std::int64_t>(in.size());
  std::vector<double> out(in.size());
  for (std::int64_t k = 0; k < n; ++k) out[k] = in[((k - d) % n + n) % n];
  return out;
}

inline std::vector<double> white(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// TDOA by direct evaluation of the range difference, no clamping.
inline double exact_tdoa(const Vec3& p, const Vec3& ri, const Vec3& rj, double fs, double c, int alpha = 1) {
  return ((p - ri).norm() - (p - rj).norm()) * alpha * fs / c;
}

// Every lattice cell whose rounded TDOA equals tau.
inline std::set<gsg::CellIndex> exhaustive_cells(const gsg::SearchRegion& region, const Vec3& ri, const Vec3& rj,
                                                 double fs, double c, std::int64_t tau) {
  std::set<gsg::CellIndex> out;
  for (std::size_t g = 0; g < region.cell_count(); ++g) {
    const auto cell = static_cast<gsg::CellIndex>(g);
    const double t = exact_tdoa(region.point(cell), ri, rj, fs, c);
    if (static_cast<std::int64_t>(std::llround(t)) == tau) out.insert(cell);
  }
  return out;
}

// The six first-order images of a source in the box [0, L].
inline std::vector<Vec3> first_order_images(const Vec3& room, const Vec3& s) {
  return {
      {-s.x(), s.y(), s.z()}, {2 * room.x() - s.x(), s.y(), s.z()},
      {s.x(), -s.y(), s.z()}, {s.x(), 2 * room.y() - s.y(), s.z()},
      {s.x(), s.y(), -s.z()}, {s.x(), s.y(), 2 * room.z() - s.z()},
  };
}

}  // namespace oracle
