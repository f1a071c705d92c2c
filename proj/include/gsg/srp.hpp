#pragma once

// Steered response power accumulation on either grid backend and source
// position estimation by maximizing the power map.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/gcc_phat.hpp"
#include "gsg/geometry.hpp"
#include "gsg/grid.hpp"

namespace gsg {

enum class Backend { urg, gsg };

inline const char* to_string(Backend b) { return b == Backend::urg ? "urg" : "gsg"; }

inline Backend parse_backend(const std::string& s) {
  if (s == "urg") return Backend::urg;
  if (s == "gsg") return Backend::gsg;
  throw ConfigError("unknown backend '" + s + "' (expected urg or gsg)");
}

// Power values on a set of cells. For URG the support is every lattice cell
// in index order; for GSG it is the coherent grid.
struct PowerMap {
  Backend backend = Backend::urg;
  std::size_t frame = 0;
  std::vector<CellIndex> cells;  // sorted ascending
  std::vector<double> values;

  std::size_t size() const { return cells.size(); }

  std::optional<double> value_at(CellIndex cell) const {
    const auto it = std::lower_bound(cells.begin(), cells.end(), cell);
    if (it == cells.end() || *it != cell) return std::nullopt;
    return values[static_cast<std::size_t>(it - cells.begin())];
  }
};

enum class EstimateStatus { ok, silent, empty_grid };

inline const char* to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::ok: return "ok";
    case EstimateStatus::silent: return "silent";
    case EstimateStatus::empty_grid: return "empty-grid";
  }
  return "?";
}

struct LocationEstimate {
  EstimateStatus status = EstimateStatus::ok;
  std::optional<CellIndex> cell;
  std::optional<Vec3> position;
  double peak = 0.0;
  std::size_t ties = 0;

  bool ok() const { return status == EstimateStatus::ok; }
};

// Maximum of the map; ties go to the smallest cell index and are counted.
inline LocationEstimate argmax_policy(const PowerMap& map) {
  if (map.cells.empty()) throw ConfigError("argmax of an empty power map");
  std::size_t best = 0;
  std::size_t ties = 1;
  for (std::size_t k = 1; k < map.values.size(); ++k) {
    if (map.values[k] > map.values[best]) {
      best = k;
      ties = 1;
    } else if (map.values[k] == map.values[best]) {
      ++ties;  // cells are ascending, so the first maximum keeps the lowest index
    }
  }
  LocationEstimate e;
  e.cell = map.cells[best];
  e.peak = map.values[best];
  e.ties = ties;
  return e;
}

inline LocationEstimate locate(const PowerMap& map, const SearchRegion& region) {
  auto e = argmax_policy(map);
  e.position = region.point(*e.cell);
  return e;
}

struct SrpResult {
  PowerMap map;
  LocationEstimate estimate;
};

namespace detail {

inline void check_gcc(const GccSet& gcc, std::size_t pair_count, int alpha) {
  if (gcc.size() != pair_count) {
    throw ConfigError("GCC set has " + std::to_string(gcc.size()) + " pairs, table has " +
                      std::to_string(pair_count));
  }
  if (gcc.alpha != alpha) throw ConfigError("GCC lag units do not match the table's interpolation factor");
}

inline LocationEstimate no_estimate(EstimateStatus status) {
  LocationEstimate e;
  e.status = status;
  return e;
}

}  // namespace detail

// P(cell) = sum_n R_n[chi(cell, n)] over every lattice cell.
inline SrpResult srp_urg(const GccSet& gcc, const UrgTable& chi, const SearchRegion& region,
                         std::size_t frame = 0) {
  detail::check_gcc(gcc, chi.pair_count, chi.alpha);
  SrpResult out;
  out.map.backend = Backend::urg;
  out.map.frame = frame;
  out.map.cells.resize(chi.cell_count);
  out.map.values.assign(chi.cell_count, 0.0);
  for (std::size_t g = 0; g < chi.cell_count; ++g) {
    out.map.cells[g] = static_cast<CellIndex>(g);
    double p = 0.0;
    const std::int32_t* row = chi.chi.data() + g * chi.pair_count;
    for (std::size_t n = 0; n < chi.pair_count; ++n) p += gcc.pairs[n].at(row[n]);
    out.map.values[g] = p;
  }
  if (gcc.silent()) {
    out.estimate = detail::no_estimate(EstimateStatus::silent);
  } else {
    out.estimate = locate(out.map, region);
  }
  return out;
}

struct GsgSrpOptions {
  bool normalize_by_delta = false;  // mean instead of sum per cell
};

// Per-entry accumulation over the look-up tables. The slot of every LUT
// entry in the coherent grid is resolved once at construction.
class GsgAccumulator {
 public:
  GsgAccumulator(const TdoaLut& lut, const CoherentGrid& grid) : lut_(&lut), grid_(&grid) {
    slots_.resize(lut.size());
    counts_.assign(grid.cells.size(), 0);
    for (std::size_t q = 0; q < lut.size(); ++q) {
      const auto it = std::lower_bound(grid.cells.begin(), grid.cells.end(), lut.gamma_r[q]);
      if (it == grid.cells.end() || *it != lut.gamma_r[q]) {
        throw ConfigError("look-up table entry outside the coherent grid");
      }
      slots_[q] = static_cast<std::uint32_t>(it - grid.cells.begin());
      ++counts_[slots_[q]];
    }
  }

  SrpResult run(const GccSet& gcc, const SearchRegion& region, std::size_t frame = 0,
                GsgSrpOptions options = {}) const {
    SrpResult out;
    out.map.backend = Backend::gsg;
    out.map.frame = frame;
    out.map.cells = grid_->cells;
    out.map.values.assign(grid_->cells.size(), 0.0);
    if (grid_->cells.empty()) {
      out.estimate = detail::no_estimate(EstimateStatus::empty_grid);
      return out;
    }
    detail::check_gcc(gcc, gcc.size(), lut_->alpha);
    const auto& tau = lut_->gamma_tau;
    const auto& pair = lut_->gamma_n;
    for (std::size_t q = 0; q < slots_.size(); ++q) {
      if (pair[q] >= gcc.size()) throw ConfigError("look-up table references a missing pair");
      out.map.values[slots_[q]] += gcc.pairs[pair[q]].at(tau[q]);
    }
    if (options.normalize_by_delta) {
      for (std::size_t k = 0; k < counts_.size(); ++k) {
        if (counts_[k] > 0) out.map.values[k] /= static_cast<double>(counts_[k]);
      }
    }
    if (gcc.silent()) {
      out.estimate = detail::no_estimate(EstimateStatus::silent);
    } else {
      out.estimate = locate(out.map, region);
    }
    return out;
  }

 private:
  const TdoaLut* lut_;
  const CoherentGrid* grid_;
  std::vector<std::uint32_t> slots_;
  std::vector<std::uint32_t> counts_;
};

inline SrpResult srp_gsg(const GccSet& gcc, const TdoaLut& lut, const CoherentGrid& grid,
                         const SearchRegion& region, std::size_t frame = 0, GsgSrpOptions options = {}) {
  return GsgAccumulator(lut, grid).run(gcc, region, frame, options);
}

// Pair-grouped form: P(r) = sum_n sum_{z in Z_{r,n}} R_n[gamma_tau(z)], with
// Z_{r,n} the LUT indices of cell r and pair n (possibly empty).
inline PowerMap srp_gsg_grouped(const GccSet& gcc, const TdoaLut& lut, const CoherentGrid& grid) {
  detail::check_gcc(gcc, gcc.size(), lut.alpha);
  // Bucket LUT indices by (cell slot, pair).
  const std::size_t pairs = gcc.size();
  std::vector<std::vector<std::size_t>> z(grid.cells.size() * pairs);
  for (std::size_t q = 0; q < lut.size(); ++q) {
    const auto it = std::lower_bound(grid.cells.begin(), grid.cells.end(), lut.gamma_r[q]);
    if (it == grid.cells.end() || *it != lut.gamma_r[q]) {
      throw ConfigError("look-up table entry outside the coherent grid");
    }
    const auto slot = static_cast<std::size_t>(it - grid.cells.begin());
    z[slot * pairs + lut.gamma_n[q]].push_back(q);
  }
  PowerMap map;
  map.backend = Backend::gsg;
  map.cells = grid.cells;
  map.values.assign(grid.cells.size(), 0.0);
  for (std::size_t slot = 0; slot < grid.cells.size(); ++slot) {
    double p = 0.0;
    for (std::size_t n = 0; n < pairs; ++n) {
      double inner = 0.0;
      for (std::size_t q : z[slot * pairs + n]) inner += gcc.pairs[n].at(lut.gamma_tau[q]);
      p += inner;
    }
    map.values[slot] = p;
  }
  return map;
}

// Cells with sensitivity >= threshold; nullopt when nothing survives, which
// tells the caller to fall back to the unrestricted search.
inline std::optional<PowerMap> restrict_to_sensitivity(const PowerMap& map, const SensitivityMap& sens,
                                                       std::uint32_t threshold) {
  PowerMap out;
  out.backend = map.backend;
  out.frame = map.frame;
  for (std::size_t k = 0; k < map.cells.size(); ++k) {
    const CellIndex cell = map.cells[k];
    if (cell >= sens.delta.size()) throw ConfigError("power map and sensitivity map regions differ");
    if (sens.delta[cell] >= threshold && sens.delta[cell] > 0) {
      out.cells.push_back(cell);
      out.values.push_back(map.values[k]);
    }
  }
  if (out.cells.empty()) return std::nullopt;
  return out;
}

}  // namespace gsg
