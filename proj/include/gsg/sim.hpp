#pragma once

// Signal synthesis for controlled experiments: free-field propagation with
// exact fractional delays, and a lightweight image-source model of a
// rectangular room controlled by reflection order and wall absorption.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/geometry.hpp"
#include "gsg/signal.hpp"

namespace gsg {

struct SimScene {
  Vec3 room{4.0, 3.0, 3.0};  // [0, room] along each axis
  Vec3 source{2.0, 1.5, 1.5};
  std::vector<double> signal;  // source samples at the array's fs
  int reflection_order = 0;
  double absorption = 0.0;  // energy lost per reflection, amplitude factor 1 - absorption
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

struct ImageSource {
  Vec3 position;
  int order = 0;  // number of wall reflections
  double gain = 1.0;
};

inline constexpr int kSincHalfWidth = 32;  // 64th-order windowed sinc

namespace detail {

inline bool strictly_inside(const Vec3& p, const Vec3& room) {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] > 0.0 && p[a] < room[a])) return false;
  }
  return true;
}

inline void validate_scene(const SimScene& scene, const MicArray& array) {
  if (!(scene.room.minCoeff() > 0.0) || !scene.room.allFinite()) throw ConfigError("room extent must be positive");
  if (scene.reflection_order < 0) throw ConfigError("reflection order must be >= 0");
  if (!(scene.absorption >= 0.0 && scene.absorption <= 1.0)) {
    throw ConfigError("wall absorption must be in [0, 1], got " + std::to_string(scene.absorption));
  }
  if (!strictly_inside(scene.source, scene.room)) throw ConfigError("source must be strictly inside the room");
  for (std::size_t m = 0; m < array.size(); ++m) {
    if (!strictly_inside(array.mic(m), scene.room)) {
      throw ConfigError("microphone " + std::to_string(m) + " must be strictly inside the room");
    }
    if ((array.mic(m) - scene.source).norm() < 1e-9) {
      throw ConfigError("source coincides with microphone " + std::to_string(m));
    }
  }
  if (std::isnan(scene.snr_db)) throw ConfigError("snr must be a number or +inf");
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman-windowed sinc tap at offset t (samples), support |t| <= half width.
inline double fractional_tap(double t) {
  const double w = static_cast<double>(kSincHalfWidth);
  if (std::abs(t) > w) return 0.0;
  const double u = std::numbers::pi * t / w;
  const double window = 0.42 + 0.5 * std::cos(u) + 0.08 * std::cos(2.0 * u);
  return sinc(t) * window;
}

// out[k] += gain * s(k - delay) with band-limited interpolation.
inline void add_delayed(std::vector<double>& out, const std::vector<double>& s, double delay, double gain) {
  const auto whole = static_cast<std::int64_t>(std::floor(delay));
  const double frac = delay - static_cast<double>(whole);
  std::vector<double> taps;
  std::vector<std::int64_t> offsets;
  for (std::int64_t m = -kSincHalfWidth; m <= kSincHalfWidth + 1; ++m) {
    const double t = static_cast<double>(m) - frac;
    const double h = fractional_tap(t);
    if (h == 0.0) continue;
    taps.push_back(gain * h);
    offsets.push_back(whole + m);
  }
  const auto n = static_cast<std::int64_t>(s.size());
  const auto len = static_cast<std::int64_t>(out.size());
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const std::int64_t shift = offsets[k];
    const std::int64_t lo = std::max<std::int64_t>(0, shift);
    const std::int64_t hi = std::min<std::int64_t>(len, n + shift);
    const double h = taps[k];
    for (std::int64_t i = lo; i < hi; ++i) out[i] += h * s[i - shift];
  }
}

inline double mean_square(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

// Image sources of a rectangular room with at most max_order reflections.
// Along one axis the images of x_s in [0, L] sit at 2kL + x_s (|2k|
// reflections) and 2kL - x_s (|2k - 1| reflections).
inline std::vector<ImageSource> image_sources(const Vec3& room, const Vec3& source, int max_order, double absorption) {
  std::vector<ImageSource> out;
  const double beta = 1.0 - absorption;
  const int k_max = (max_order + 1) / 2 + 1;
  for (int kx = -k_max; kx <= k_max; ++kx) {
    for (int px = 0; px <= 1; ++px) {
      const int ox = std::abs(2 * kx - px);
      if (ox > max_order) continue;
      for (int ky = -k_max; ky <= k_max; ++ky) {
        for (int py = 0; py <= 1; ++py) {
          const int oy = std::abs(2 * ky - py);
          if (ox + oy > max_order) continue;
          for (int kz = -k_max; kz <= k_max; ++kz) {
            for (int pz = 0; pz <= 1; ++pz) {
              const int oz = std::abs(2 * kz - pz);
              const int order = ox + oy + oz;
              if (order > max_order) continue;
              ImageSource img;
              img.position = {2.0 * kx * room.x() + (px ? -source.x() : source.x()),
                              2.0 * ky * room.y() + (py ? -source.y() : source.y()),
                              2.0 * kz * room.z() + (pz ? -source.z() : source.z())};
              img.order = order;
              img.gain = std::pow(beta, order);
              out.push_back(img);
            }
          }
        }
      }
    }
  }
  return out;
}

namespace detail {

inline MultiChannel synthesize(const SimScene& scene, const MicArray& array, int order) {
  validate_scene(scene, array);
  const double fs = array.fs();
  const double c = array.c();
  const auto images = image_sources(scene.room, scene.source, order, scene.absorption);
  MultiChannel out;
  out.fs = fs;
  out.channels.assign(array.size(), std::vector<double>(scene.signal.size(), 0.0));
  std::vector<double> direct_power(array.size(), 0.0);
  for (std::size_t m = 0; m < array.size(); ++m) {
    std::vector<double> direct(scene.signal.size(), 0.0);
    const double dist0 = (array.mic(m) - scene.source).norm();
    add_delayed(direct, scene.signal, dist0 / c * fs, 1.0 / dist0);
    direct_power[m] = mean_square(direct);
    auto& ch = out.channels[m];
    ch = direct;
    for (const auto& img : images) {
      if (img.order == 0 || img.gain == 0.0) continue;
      const double dist = (array.mic(m) - img.position).norm();
      add_delayed(ch, scene.signal, dist / c * fs, img.gain / dist);
    }
  }
  if (std::isfinite(scene.snr_db)) {
    std::seed_seq seq{static_cast<std::uint32_t>(scene.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(scene.seed >> 32), 0x5eed5u};
    std::mt19937_64 rng(seq);
    for (std::size_t m = 0; m < array.size(); ++m) {
      const double sigma = std::sqrt(direct_power[m] / std::pow(10.0, scene.snr_db / 10.0));
      std::normal_distribution<double> noise(0.0, sigma);
      for (double& x : out.channels[m]) x += noise(rng);
    }
  }
  return out;
}

}  // namespace detail

// Direct path only: each channel is the source delayed by distance/c (exact
// fractional delay), scaled by 1/distance, plus independent white Gaussian
// noise at the per-channel direct-path SNR.
inline MultiChannel synth_freefield(const SimScene& scene, const MicArray& array) {
  if (scene.reflection_order != 0) throw ConfigError("free-field synthesis requires reflection order 0");
  return detail::synthesize(scene, array, 0);
}

// Image sources up to the scene's reflection order; order 0 reproduces the
// free-field output exactly.
inline MultiChannel synth_ism_lite(const SimScene& scene, const MicArray& array) {
  return detail::synthesize(scene, array, scene.reflection_order);
}

inline MultiChannel synthesize(const SimScene& scene, const MicArray& array) {
  return scene.reflection_order == 0 ? synth_freefield(scene, array) : synth_ism_lite(scene, array);
}

// Seeded white Gaussian noise bursts separated by silent gaps.
inline std::vector<double> noise_bursts(double fs, double seconds, std::uint64_t seed, double burst_seconds = 0.25,
                                        double gap_seconds = 0.05) {
  if (!(fs > 0.0) || !(seconds > 0.0)) throw ConfigError("noise burst length must be positive");
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  const auto burst = static_cast<std::size_t>(std::llround(burst_seconds * fs));
  const auto gap = static_cast<std::size_t>(std::llround(gap_seconds * fs));
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), 0xb0257u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> dist(0.0, 0.1);
  std::vector<double> s(n, 0.0);
  const std::size_t period = burst + gap;
  for (std::size_t k = 0; k < n; ++k) {
    const bool on = period == 0 || gap == 0 || (k % period) < burst;
    const double v = dist(rng);
    if (on) s[k] = v;
  }
  return s;
}

}  // namespace gsg
