#pragma once

// Spatial grid construction.
//
// The uniform regular grid (URG) stores one rounded TDOA per lattice cell and
// pair. The geometrically sampled grid (GSG) goes the other way: every
// admissible TDOA of every pair is drawn as a discrete hyperboloid on the
// lattice, which yields the look-up tables (cell, pair, tau), the per-cell
// count of intersecting hyperboloids (sensitivity map) and the coherent grid
// of cells crossed by at least mu surfaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/geometry.hpp"

namespace gsg {

struct UrgTable {
  std::size_t cell_count = 0;
  std::size_t pair_count = 0;
  int alpha = 1;
  std::vector<std::int32_t> chi;  // row-major [cell][pair], units of 1/alpha samples

  std::int32_t at(CellIndex cell, std::size_t n) const { return chi[cell * pair_count + n]; }
};

inline UrgTable build_urg(const SearchRegion& region, const MicArray& array, int alpha = 1) {
  if (alpha < 1) throw ConfigError("interpolation factor must be >= 1");
  UrgTable table;
  table.cell_count = region.cell_count();
  table.pair_count = array.pair_count();
  table.alpha = alpha;
  table.chi.resize(table.cell_count * table.pair_count);
  for (std::size_t g = 0; g < table.cell_count; ++g) {
    const Vec3 p = region.point(static_cast<CellIndex>(g));
    for (std::size_t n = 0; n < table.pair_count; ++n) {
      table.chi[g * table.pair_count + n] = static_cast<std::int32_t>(tdoa_at(p, array, n, alpha));
    }
  }
  return table;
}

namespace detail {

// Keeps the first occurrence of each value, preserving order.
inline void dedupe_stable(std::vector<CellIndex>& cells) {
  if (cells.size() < 2) return;
  std::vector<std::pair<CellIndex, std::uint32_t>> keyed(cells.size());
  for (std::uint32_t k = 0; k < cells.size(); ++k) keyed[k] = {cells[k], k};
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint32_t> keep;
  keep.reserve(keyed.size());
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first != keyed[k - 1].first) keep.push_back(keyed[k].second);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<CellIndex> out;
  out.reserve(keep.size());
  for (auto k : keep) out.push_back(cells[k]);
  cells = std::move(out);
}

// Sampling ranges of the region expressed in one pair's local frame.
struct LocalBounds {
  double x_min, x_max, y_min, y_max, z_min, z_max;
  double radius_max;  // largest distance of the region from the local x axis
  bool planar;        // 2D region whose plane is a local z = const plane
  double plane_z;
};

inline LocalBounds local_bounds(const PairFrame& frame, const SearchRegion& region) {
  LocalBounds b{};
  b.x_min = b.y_min = b.z_min = std::numeric_limits<double>::infinity();
  b.x_max = b.y_max = b.z_max = -std::numeric_limits<double>::infinity();
  b.radius_max = 0.0;
  for (const Vec3& corner : region.corners()) {
    const Vec3 q = frame.to_local(corner);
    b.x_min = std::min(b.x_min, q.x());
    b.x_max = std::max(b.x_max, q.x());
    b.y_min = std::min(b.y_min, q.y());
    b.y_max = std::max(b.y_max, q.y());
    b.z_min = std::min(b.z_min, q.z());
    b.z_max = std::max(b.z_max, q.z());
    b.radius_max = std::max(b.radius_max, std::hypot(q.y(), q.z()));
  }
  const double ez_z = frame.rotation(2, 2);
  b.planar = region.dim() == 2 && std::abs(std::abs(ez_z) - 1.0) < 1e-12;
  b.plane_z = frame.to_local(region.origin()).z();
  return b;
}

inline std::int64_t step_floor(double v, double delta) {
  return static_cast<std::int64_t>(std::floor(v / delta)) - 1;
}
inline std::int64_t step_ceil(double v, double delta) {
  return static_cast<std::int64_t>(std::ceil(v / delta)) + 1;
}

}  // namespace detail

// Cells of the discrete hyperboloid tau (units of 1/alpha samples) of one
// pair. Surface points are generated exactly in the local frame by two
// sweeps: stepping the radius at delta and solving for x, then stepping x at
// delta and solving for the radius. Each (x, radius) is revolved about the
// baseline, mapped back to global coordinates and snapped to the nearest
// lattice cell. Points on the baseline axis itself (radius zero at delta
// resolution) are not emitted, except for the degenerate ray |tau| = d*fs/c.
inline std::vector<CellIndex> trace_hyperboloid(const PairFrame& frame, std::int64_t tau,
                                                const SearchRegion& region, double fs, double c,
                                                int alpha = 1) {
  const std::int64_t limit = max_tdoa_samples(frame, fs, c, alpha);
  if (tau > limit || tau < -limit) {
    throw DomainError("tdoa " + std::to_string(tau) + " outside admissible range +/-" +
                      std::to_string(limit));
  }
  const double delta = region.delta();
  const detail::LocalBounds b = detail::local_bounds(frame, region);

  std::vector<CellIndex> cells;
  auto emit = [&](double x, double y, double z) {
    if (auto cell = region.cell_of(frame.to_global(Vec3{x, y, z}))) cells.push_back(*cell);
  };
  const double x_lo = b.x_min - delta;
  const double x_hi = b.x_max + delta;
  const double r_hi = b.radius_max + delta;
  const std::int64_t iy_lo = detail::step_floor(b.y_min, delta);
  const std::int64_t iy_hi = detail::step_ceil(b.y_max, delta);
  const std::int64_t iz_lo = detail::step_floor(b.z_min, delta);
  const std::int64_t iz_hi = detail::step_ceil(b.z_max, delta);

  // Circle of the given radius around the local x axis at abscissa x.
  auto revolve = [&](double x, double radius) {
    if (b.planar) {
      const double z = b.plane_z;
      if (radius * radius < z * z) return;
      const double y = std::sqrt(radius * radius - z * z);
      emit(x, y, z);
      if (y > 0.0) emit(x, -y, z);
      return;
    }
    for (std::int64_t k = iz_lo; k <= iz_hi; ++k) {
      const double z = static_cast<double>(k) * delta;
      if (std::abs(z) > radius) continue;
      const double y = std::sqrt(radius * radius - z * z);
      emit(x, y, z);
      if (y > 0.0) emit(x, -y, z);
    }
    for (std::int64_t k = iy_lo; k <= iy_hi; ++k) {
      const double y = static_cast<double>(k) * delta;
      if (std::abs(y) > radius) continue;
      const double z = std::sqrt(radius * radius - y * y);
      emit(x, y, z);
      if (z > 0.0) emit(x, y, -z);
    }
  };

  const double half = frame.half_baseline;
  if (tau == 0) {
    // Perpendicular bisector plane x = 0.
    if (b.planar) {
      for (std::int64_t k = iy_lo; k <= iy_hi; ++k) {
        const double y = static_cast<double>(k) * delta;
        if (std::hypot(y, b.plane_z) < 0.5 * delta) continue;
        emit(0.0, y, b.plane_z);
      }
    } else {
      for (std::int64_t j = iy_lo; j <= iy_hi; ++j) {
        for (std::int64_t k = iz_lo; k <= iz_hi; ++k) {
          if (j == 0 && k == 0) continue;
          emit(0.0, static_cast<double>(j) * delta, static_cast<double>(k) * delta);
        }
      }
    }
    detail::dedupe_stable(cells);
    return cells;
  }

  const double sheet = tau > 0 ? 1.0 : -1.0;
  const double a1 = c * static_cast<double>(std::abs(tau)) / (2.0 * alpha * fs);
  const double a2_sq = half * half - a1 * a1;
  const std::int64_t ix_lo = detail::step_floor(b.x_min, delta);
  const std::int64_t ix_hi = detail::step_ceil(b.x_max, delta);

  if (a2_sq <= 1e-24 * half * half) {
    // Range difference equals the baseline: the locus is the ray beyond mic j
    // (tau > 0) or mic i (tau < 0).
    for (std::int64_t i = ix_lo; i <= ix_hi; ++i) {
      const double x = static_cast<double>(i) * delta;
      if (sheet * x >= half) emit(x, 0.0, 0.0);
    }
    detail::dedupe_stable(cells);
    return cells;
  }
  const double a2 = std::sqrt(a2_sq);

  // Radius stepped at delta, x from the hyperbola.
  const auto ir_hi = static_cast<std::int64_t>(std::ceil(r_hi / delta));
  for (std::int64_t i = 1; i <= ir_hi; ++i) {
    const double r = static_cast<double>(i) * delta;
    const double x = sheet * a1 * std::sqrt(1.0 + (r * r) / (a2 * a2));
    if (x < x_lo || x > x_hi) continue;
    revolve(x, r);
  }
  // x stepped at delta, radius from the hyperbola.
  for (std::int64_t i = ix_lo; i <= ix_hi; ++i) {
    const double x = static_cast<double>(i) * delta;
    if (sheet * x <= a1) continue;
    const double r = a2 * std::sqrt((x * x) / (a1 * a1) - 1.0);
    if (r < 0.5 * delta || r > r_hi) continue;
    revolve(x, r);
  }
  detail::dedupe_stable(cells);
  return cells;
}

// Look-up tables of the discrete hyperboloid points: entry q links cell
// gamma_r[q] to pair gamma_n[q] and TDOA gamma_tau[q] (units of 1/alpha
// samples). Stored grouped by pair, then tau ascending, then trace order.
struct TdoaLut {
  std::vector<CellIndex> gamma_r;
  std::vector<PairIndex> gamma_n;
  std::vector<std::int32_t> gamma_tau;
  std::size_t q_raw = 0;    // entries before the consistency constraint (Q')
  std::size_t removed = 0;  // entries discarded by the constraint (T)
  int alpha = 1;

  std::size_t size() const { return gamma_r.size(); }  // Q
};

struct SensitivityMap {
  std::vector<std::uint32_t> raw;    // hyperboloids per cell before the constraint
  std::vector<std::uint32_t> delta;  // after the constraint
  std::uint32_t mu = 2;
};

struct CoherentGrid {
  std::vector<CellIndex> cells;  // sorted, unique
};

struct GsgTables {
  TdoaLut lut;
  SensitivityMap sensitivity;
  CoherentGrid grid;
};

inline std::uint32_t default_mu(int dim) { return dim == 3 ? 3u : 2u; }

// Zeroes delta below mu and removes the matching LUT entries. Returns the
// number of entries removed by this call.
inline std::size_t apply_consistency_constraint(TdoaLut& lut, SensitivityMap& sens) {
  for (auto& d : sens.delta) {
    if (d < sens.mu) d = 0;
  }
  std::size_t write = 0;
  for (std::size_t q = 0; q < lut.gamma_r.size(); ++q) {
    if (sens.delta[lut.gamma_r[q]] == 0) continue;
    lut.gamma_r[write] = lut.gamma_r[q];
    lut.gamma_n[write] = lut.gamma_n[q];
    lut.gamma_tau[write] = lut.gamma_tau[q];
    ++write;
  }
  const std::size_t dropped = lut.gamma_r.size() - write;
  lut.gamma_r.resize(write);
  lut.gamma_n.resize(write);
  lut.gamma_tau.resize(write);
  lut.removed += dropped;
  return dropped;
}

inline CoherentGrid coherent_grid(const TdoaLut& lut) {
  CoherentGrid grid;
  grid.cells = lut.gamma_r;
  std::sort(grid.cells.begin(), grid.cells.end());
  grid.cells.erase(std::unique(grid.cells.begin(), grid.cells.end()), grid.cells.end());
  return grid;
}

struct GsgOptions {
  int alpha = 1;
  std::uint32_t mu = 0;  // 0: 3 in 3D, 2 in 2D
};

inline GsgTables build_gsg(const SearchRegion& region, const MicArray& array, GsgOptions options = {}) {
  if (options.alpha < 1) throw ConfigError("interpolation factor must be >= 1");
  GsgTables out;
  TdoaLut& lut = out.lut;
  SensitivityMap& sens = out.sensitivity;
  lut.alpha = options.alpha;
  sens.mu = options.mu != 0 ? options.mu : default_mu(region.dim());
  sens.raw.assign(region.cell_count(), 0);

  for (std::size_t n = 0; n < array.pair_count(); ++n) {
    const PairFrame frame = make_pair_frame(array, n);
    const std::int64_t limit = array.max_tdoa(n, options.alpha);
    for (std::int64_t tau = -limit; tau <= limit; ++tau) {
      const auto cells = trace_hyperboloid(frame, tau, region, array.fs(), array.c(), options.alpha);
      for (CellIndex cell : cells) {
        lut.gamma_r.push_back(cell);
        lut.gamma_n.push_back(static_cast<PairIndex>(n));
        lut.gamma_tau.push_back(static_cast<std::int32_t>(tau));
        ++sens.raw[cell];
      }
    }
  }
  lut.q_raw = lut.gamma_r.size();
  sens.delta = sens.raw;
  apply_consistency_constraint(lut, sens);
  out.grid = coherent_grid(lut);
  return out;
}

inline GsgTables build_gsg(const SearchRegion& region, const MicArray& array, int alpha) {
  return build_gsg(region, array, GsgOptions{alpha, 0});
}

struct SensitivityStats {
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  double mean = 0.0;
  std::size_t nonzero = 0;
  std::vector<CellIndex> high;  // cells with count >= threshold (nonzero only)
};

inline SensitivityStats sensitivity_stats(std::span<const std::uint32_t> counts, std::uint32_t threshold) {
  SensitivityStats s;
  double sum = 0.0;
  for (std::size_t g = 0; g < counts.size(); ++g) {
    const auto d = counts[g];
    if (d == 0) continue;
    if (s.nonzero == 0 || d < s.min) s.min = d;
    s.max = std::max(s.max, d);
    sum += d;
    ++s.nonzero;
    if (d >= threshold) s.high.push_back(static_cast<CellIndex>(g));
  }
  if (s.nonzero > 0) s.mean = sum / static_cast<double>(s.nonzero);
  return s;
}

inline SensitivityStats sensitivity_stats(const SensitivityMap& map, std::uint32_t threshold) {
  return sensitivity_stats(std::span<const std::uint32_t>(map.delta), threshold);
}

}  // namespace gsg
