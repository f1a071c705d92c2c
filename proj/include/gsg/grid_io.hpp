#pragma once

// Table persistence and inspection exports.
//
// Binary layout (all integers little-endian):
//   magic "GSGT", u32 version, u32 kind (1 = URG, 2 = GSG), u64 geometry hash,
//   u32 alpha, then the kind-specific payload. Arrays are u64 count + elements.
//   URG: u64 cells, u64 pairs, i32 chi[cells * pairs]
//   GSG: u32 mu, u64 q_raw, u64 removed, [u32 gamma_r], [u32 gamma_n],
//        [i32 gamma_tau], [u32 raw], [u32 delta], [u32 grid]

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/geometry.hpp"
#include "gsg/grid.hpp"
#include "gsg/srp.hpp"

namespace gsg::io {

inline constexpr std::array<char, 4> kMagic{'G', 'S', 'G', 'T'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kKindUrg = 1;
inline constexpr std::uint32_t kKindGsg = 2;

namespace detail {

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }

  template <class T>
  void array(const std::vector<T>& v) {
    u64(v.size());
    for (T x : v) put(static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(x)), sizeof(T));
  }

  std::vector<unsigned char> bytes;

 private:
  void put(std::uint64_t v, int n) {
    for (int k = 0; k < n; ++k) bytes.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xffu));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& b) : bytes_(b) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  template <class T>
  std::vector<T> array() {
    const std::uint64_t n = u64();
    need(n * sizeof(T));
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(static_cast<std::make_unsigned_t<T>>(get(sizeof(T))));
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw FormatError("truncated table file");
  }
  std::uint64_t get(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += n;
    return v;
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

inline std::uint64_t fnv1a(const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void header(Writer& w, std::uint32_t kind, std::uint64_t hash, int alpha) {
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(kind);
  w.u64(hash);
  w.u32(static_cast<std::uint32_t>(alpha));
}

inline int check_header(Reader& r, std::uint32_t kind, std::optional<std::uint64_t> expected_hash) {
  std::array<char, 4> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) throw FormatError("not a grid table file");
  if (const auto v = r.u32(); v != kVersion) throw FormatError("unsupported table version " + std::to_string(v));
  if (r.u32() != kind) throw FormatError("table file holds a different grid kind");
  const std::uint64_t hash = r.u64();
  if (expected_hash && hash != *expected_hash) throw FormatError("table was built for a different array or region");
  return static_cast<int>(r.u32());
}

}  // namespace detail

// Hash of everything the tables depend on: region, array geometry, fs, c, alpha.
inline std::uint64_t geometry_hash(const SearchRegion& region, const MicArray& array, int alpha) {
  detail::Writer w;
  for (int a = 0; a < 3; ++a) w.f64(region.origin()[a]);
  for (int a = 0; a < 3; ++a) w.f64(region.extent()[a]);
  w.f64(region.delta());
  w.u32(static_cast<std::uint32_t>(region.dim()));
  w.f64(array.fs());
  w.f64(array.c());
  w.u64(array.size());
  for (const auto& m : array.mics()) {
    for (int a = 0; a < 3; ++a) w.f64(m[a]);
  }
  w.u32(static_cast<std::uint32_t>(alpha));
  return detail::fnv1a(w.bytes);
}

inline std::vector<unsigned char> encode_urg(const UrgTable& t, std::uint64_t hash) {
  detail::Writer w;
  detail::header(w, kKindUrg, hash, t.alpha);
  w.u64(t.cell_count);
  w.u64(t.pair_count);
  w.array(t.chi);
  return w.bytes;
}

inline UrgTable decode_urg(const std::vector<unsigned char>& bytes, std::optional<std::uint64_t> hash = std::nullopt) {
  detail::Reader r(bytes);
  UrgTable t;
  t.alpha = detail::check_header(r, kKindUrg, hash);
  t.cell_count = r.u64();
  t.pair_count = r.u64();
  t.chi = r.array<std::int32_t>();
  if (t.chi.size() != t.cell_count * t.pair_count) throw FormatError("URG table size mismatch");
  if (!r.done()) throw FormatError("trailing bytes in table file");
  return t;
}

inline std::vector<unsigned char> encode_gsg(const GsgTables& t, std::uint64_t hash) {
  detail::Writer w;
  detail::header(w, kKindGsg, hash, t.lut.alpha);
  w.u32(t.sensitivity.mu);
  w.u64(t.lut.q_raw);
  w.u64(t.lut.removed);
  w.array(t.lut.gamma_r);
  w.array(t.lut.gamma_n);
  w.array(t.lut.gamma_tau);
  w.array(t.sensitivity.raw);
  w.array(t.sensitivity.delta);
  w.array(t.grid.cells);
  return w.bytes;
}

inline GsgTables decode_gsg(const std::vector<unsigned char>& bytes, std::optional<std::uint64_t> hash = std::nullopt) {
  detail::Reader r(bytes);
  GsgTables t;
  t.lut.alpha = detail::check_header(r, kKindGsg, hash);
  t.sensitivity.mu = r.u32();
  t.lut.q_raw = r.u64();
  t.lut.removed = r.u64();
  t.lut.gamma_r = r.array<CellIndex>();
  t.lut.gamma_n = r.array<PairIndex>();
  t.lut.gamma_tau = r.array<std::int32_t>();
  t.sensitivity.raw = r.array<std::uint32_t>();
  t.sensitivity.delta = r.array<std::uint32_t>();
  t.grid.cells = r.array<CellIndex>();
  const std::size_t q = t.lut.gamma_r.size();
  if (t.lut.gamma_n.size() != q || t.lut.gamma_tau.size() != q || t.sensitivity.raw.size() != t.sensitivity.delta.size()) {
    throw FormatError("GSG table size mismatch");
  }
  if (!r.done()) throw FormatError("trailing bytes in table file");
  return t;
}

inline void save_urg(const std::string& path, const UrgTable& t, std::uint64_t hash) {
  detail::write_file(path, encode_urg(t, hash));
}
inline UrgTable load_urg(const std::string& path, std::optional<std::uint64_t> hash = std::nullopt) {
  return decode_urg(detail::read_file(path), hash);
}
inline void save_gsg(const std::string& path, const GsgTables& t, std::uint64_t hash) {
  detail::write_file(path, encode_gsg(t, hash));
}
inline GsgTables load_gsg(const std::string& path, std::optional<std::uint64_t> hash = std::nullopt) {
  return decode_gsg(detail::read_file(path), hash);
}

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void point_columns(std::ostringstream& out, const SearchRegion& region, CellIndex cell) {
  const Vec3 p = region.point(cell);
  out << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z());
}

}  // namespace detail

inline std::string lut_csv(const TdoaLut& lut, const SearchRegion& region) {
  std::ostringstream out;
  out << "q,cell,pair,tau,x,y,z\n";
  for (std::size_t q = 0; q < lut.size(); ++q) {
    out << q << ',' << lut.gamma_r[q] << ',' << lut.gamma_n[q] << ',' << lut.gamma_tau[q];
    detail::point_columns(out, region, lut.gamma_r[q]);
    out << '\n';
  }
  return out.str();
}

inline std::string urg_csv(const UrgTable& t, const SearchRegion& region) {
  std::ostringstream out;
  out << "cell,x,y,z";
  for (std::size_t n = 0; n < t.pair_count; ++n) out << ",tau_" << n;
  out << '\n';
  for (std::size_t g = 0; g < t.cell_count; ++g) {
    out << g;
    detail::point_columns(out, region, static_cast<CellIndex>(g));
    for (std::size_t n = 0; n < t.pair_count; ++n) out << ',' << t.at(g, n);
    out << '\n';
  }
  return out.str();
}

inline std::string sensitivity_csv(const SensitivityMap& sens, const SearchRegion& region) {
  std::ostringstream out;
  out << "cell,x,y,z,raw,delta\n";
  for (std::size_t g = 0; g < sens.delta.size(); ++g) {
    out << g;
    detail::point_columns(out, region, static_cast<CellIndex>(g));
    out << ',' << sens.raw[g] << ',' << sens.delta[g] << '\n';
  }
  return out.str();
}

inline std::string power_map_csv(const PowerMap& map, const SearchRegion& region) {
  std::ostringstream out;
  out << "cell,x,y,z,power\n";
  for (std::size_t k = 0; k < map.cells.size(); ++k) {
    out << map.cells[k];
    detail::point_columns(out, region, map.cells[k]);
    out << ',' << detail::num(map.values[k]) << '\n';
  }
  return out.str();
}

// Binary 16-bit PGM of one z plane; the first row is the largest y.
inline std::vector<unsigned char> pgm16(const std::vector<std::uint16_t>& levels, const SearchRegion& region,
                                        std::size_t iz = 0) {
  const auto& n = region.counts();
  if (iz >= n[2]) throw ConfigError("z plane index outside the region");
  if (levels.size() != region.cell_count()) throw ConfigError("image data does not match the region");
  const std::string head = "P5\n" + std::to_string(n[0]) + " " + std::to_string(n[1]) + "\n65535\n";
  std::vector<unsigned char> out(head.begin(), head.end());
  for (std::size_t row = 0; row < n[1]; ++row) {
    const std::size_t iy = n[1] - 1 - row;
    for (std::size_t ix = 0; ix < n[0]; ++ix) {
      const std::uint16_t v = levels[region.index(ix, iy, iz)];
      out.push_back(static_cast<unsigned char>(v >> 8));
      out.push_back(static_cast<unsigned char>(v & 0xffu));
    }
  }
  return out;
}

// Counts are written as-is (clamped to 65535).
inline std::vector<unsigned char> sensitivity_pgm(const SensitivityMap& sens, const SearchRegion& region,
                                                  std::size_t iz = 0) {
  std::vector<std::uint16_t> levels(sens.delta.size());
  for (std::size_t g = 0; g < levels.size(); ++g) {
    levels[g] = static_cast<std::uint16_t>(std::min<std::uint32_t>(sens.delta[g], 65535u));
  }
  return pgm16(levels, region, iz);
}

// Power linearly rescaled over the map's range; cells outside the support are 0.
inline std::vector<unsigned char> power_map_pgm(const PowerMap& map, const SearchRegion& region, std::size_t iz = 0) {
  std::vector<std::uint16_t> levels(region.cell_count(), 0);
  if (!map.values.empty()) {
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    const double span = *hi - *lo;
    for (std::size_t k = 0; k < map.cells.size(); ++k) {
      const double u = span > 0.0 ? (map.values[k] - *lo) / span : 1.0;
      levels[map.cells[k]] = static_cast<std::uint16_t>(std::lround(1.0 + u * 65534.0));
    }
  }
  return pgm16(levels, region, iz);
}

inline void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  detail::write_file(path, bytes);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

}  // namespace gsg::io
