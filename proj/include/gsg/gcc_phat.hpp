#pragma once

// Frame analysis and GCC-PHAT.
//
// R_n[tau] = 1/L * sum_f Psi(f) X_i(f) X_j*(f) e^{j 2 pi f tau / L}
// with Psi = 1 / max(|X_i X_j*|, eps). For an interpolation factor alpha the
// whitened spectrum is zero-padded to alpha*L bins before the inverse
// transform, so lag tau is in units of 1/alpha samples. A source whose range
// difference ||r - r_i|| - ||r - r_j|| equals tau samples peaks at lag +tau.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsg/error.hpp"
#include "gsg/geometry.hpp"
#include "gsg/signal.hpp"

namespace gsg {

enum class Window { rectangular, hann };

// One analysis block of all channels.
struct FrameSet {
  std::size_t index = 0;  // frame number k
  std::size_t start = 0;  // first sample
  std::size_t length = 0;
  std::size_t hop = 0;
  std::vector<std::vector<double>> channels;
};

struct FramingResult {
  std::vector<FrameSet> frames;
  std::optional<std::string> warning;
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline std::vector<double> window_coefficients(Window window, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (window == Window::hann && length > 1) {
    for (std::size_t k = 0; k < length; ++k) {
      w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(length));
    }
  }
  return w;
}

struct FramingOptions {
  std::size_t length = 4096;
  std::size_t hop = 1024;
  Window window = Window::rectangular;
  bool require_power_of_two = true;
};

inline FramingResult frame_stream(const MultiChannel& signal, const FramingOptions& opt) {
  signal.validate();
  if (signal.channel_count() < 2) throw ConfigError("at least two channels are required");
  if (opt.length == 0 || opt.hop == 0) throw ConfigError("frame length and hop must be positive");
  if (opt.require_power_of_two && !is_power_of_two(opt.length)) {
    throw ConfigError("frame length must be a power of two, got " + std::to_string(opt.length));
  }
  FramingResult result;
  const std::size_t len = signal.length();
  if (len < opt.length) {
    result.warning = "stream of " + std::to_string(len) + " samples is shorter than one frame (" +
                     std::to_string(opt.length) + ")";
    return result;
  }
  const std::size_t count = (len - opt.length) / opt.hop + 1;
  const auto w = window_coefficients(opt.window, opt.length);
  result.frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    FrameSet f;
    f.index = k;
    f.start = k * opt.hop;
    f.length = opt.length;
    f.hop = opt.hop;
    f.channels.resize(signal.channel_count());
    for (std::size_t m = 0; m < signal.channel_count(); ++m) {
      const auto& src = signal.channels[m];
      auto& dst = f.channels[m];
      dst.resize(opt.length);
      for (std::size_t t = 0; t < opt.length; ++t) dst[t] = src[f.start + t] * w[t];
    }
    result.frames.push_back(std::move(f));
  }
  return result;
}

inline FramingResult frame_stream(const MultiChannel& signal, std::size_t length, std::size_t hop,
                                  Window window = Window::rectangular) {
  return frame_stream(signal, FramingOptions{length, hop, window, true});
}

// Lag-indexed GCC function on [-max_lag, +max_lag].
struct LagFunction {
  std::int64_t max_lag = 0;
  std::vector<double> values;
  bool silent = false;

  double at(std::int64_t lag) const { return values[static_cast<std::size_t>(lag + max_lag)]; }
  std::int64_t peak_lag() const {
    const auto it = std::max_element(values.begin(), values.end());
    return static_cast<std::int64_t>(it - values.begin()) - max_lag;
  }
};

struct GccSet {
  int alpha = 1;
  std::vector<LagFunction> pairs;

  bool silent() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const LagFunction& f) { return f.silent; });
  }
  std::size_t size() const { return pairs.size(); }
  const LagFunction& operator[](std::size_t n) const { return pairs[n]; }
};

namespace detail {

// FFTW's planner is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

}  // namespace detail

// Reusable GCC-PHAT engine for a fixed frame length and interpolation factor.
class GccPhat {
 public:
  struct Options {
    double floor_ratio = 1e-12;  // PHAT floor relative to the peak cross power
    double smoothing = 0.0;      // exponential cross-spectrum averaging, 0 = single frame
  };

  GccPhat(std::size_t frame_length, int alpha) : GccPhat(frame_length, alpha, Options{}) {}

  GccPhat(std::size_t frame_length, int alpha, Options options)
      : length_(frame_length), alpha_(alpha), options_(options) {
    if (frame_length < 2) throw ConfigError("frame length must be at least 2");
    if (alpha < 1) throw ConfigError("interpolation factor must be >= 1");
    if (!(options_.smoothing >= 0.0 && options_.smoothing < 1.0)) {
      throw ConfigError("smoothing must be in [0, 1)");
    }
    padded_ = length_ * static_cast<std::size_t>(alpha_);
    time_in_ = alloc_real(length_);
    spec_in_ = alloc_complex(length_ / 2 + 1);
    spec_out_ = alloc_complex(padded_ / 2 + 1);
    time_out_ = alloc_real(padded_);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(length_), time_in_.get(), spec_in_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(padded_), spec_out_.get(), time_out_.get(), FFTW_ESTIMATE);
    if (forward_ == nullptr || inverse_ == nullptr) throw ConfigError("FFTW planning failed");
  }

  GccPhat(const GccPhat&) = delete;
  GccPhat& operator=(const GccPhat&) = delete;

  ~GccPhat() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  std::size_t frame_length() const { return length_; }
  int alpha() const { return alpha_; }

  std::vector<std::complex<double>> spectrum(std::span<const double> frame) {
    if (frame.size() != length_) throw ConfigError("frame length mismatch");
    std::copy(frame.begin(), frame.end(), time_in_.get());
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(length_ / 2 + 1);
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = {spec_in_.get()[f][0], spec_in_.get()[f][1]};
    return out;
  }

  // PHAT-whitened cross spectrum X_i X_j* / max(|X_i X_j*|, eps); empty when
  // the cross power is zero everywhere.
  std::vector<std::complex<double>> whiten(std::span<const std::complex<double>> cross) const {
    double peak = 0.0;
    for (const auto& g : cross) peak = std::max(peak, std::abs(g));
    if (!(peak > 0.0)) return {};
    const double eps = options_.floor_ratio * peak;
    std::vector<std::complex<double>> w(cross.size());
    for (std::size_t f = 0; f < cross.size(); ++f) w[f] = cross[f] / std::max(std::abs(cross[f]), eps);
    return w;
  }

  // Inverse transform of a whitened half spectrum, zero-padded to alpha*L,
  // scaled by 1/L and truncated to [-max_lag, max_lag].
  LagFunction lag_function(std::span<const std::complex<double>> whitened, std::int64_t max_lag) {
    check_lag(max_lag);
    LagFunction out;
    out.max_lag = max_lag;
    out.values.assign(static_cast<std::size_t>(2 * max_lag + 1), 0.0);
    if (whitened.empty()) {
      out.silent = true;
      return out;
    }
    auto* spec = spec_out_.get();
    std::fill(spec[0], spec[0] + 2 * (padded_ / 2 + 1), 0.0);
    const std::size_t nyquist = length_ / 2;
    for (std::size_t f = 0; f < whitened.size(); ++f) {
      std::complex<double> v = whitened[f];
      // An even-length Nyquist bin is split between +/- L/2 once padded.
      if (alpha_ > 1 && length_ % 2 == 0 && f == nyquist) v *= 0.5;
      spec[f][0] = v.real();
      spec[f][1] = v.imag();
    }
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(length_);
    const auto n = static_cast<std::int64_t>(padded_);
    for (std::int64_t lag = -max_lag; lag <= max_lag; ++lag) {
      const std::int64_t idx = ((lag % n) + n) % n;
      out.values[static_cast<std::size_t>(lag + max_lag)] = time_out_.get()[idx] * scale;
    }
    return out;
  }

  LagFunction compute(std::span<const double> frame_i, std::span<const double> frame_j, std::int64_t max_lag) {
    if (frame_i.size() != frame_j.size()) throw ConfigError("frames must have equal length");
    const auto xi = spectrum(frame_i);
    const auto xj = spectrum(frame_j);
    std::vector<std::complex<double>> cross(xi.size());
    for (std::size_t f = 0; f < xi.size(); ++f) cross[f] = xi[f] * std::conj(xj[f]);
    return lag_function(whiten(cross), max_lag);
  }

  // One GCC per pair of the array, lag range alpha*T_n. With smoothing > 0
  // the cross spectra are exponentially averaged across successive calls.
  GccSet all_pairs(const FrameSet& frames, const MicArray& array) {
    if (frames.channels.size() != array.size()) {
      throw ConfigError("frame has " + std::to_string(frames.channels.size()) + " channels, array has " +
                        std::to_string(array.size()) + " microphones");
    }
    std::vector<std::vector<std::complex<double>>> spectra;
    spectra.reserve(array.size());
    for (const auto& ch : frames.channels) spectra.push_back(spectrum(ch));
    if (options_.smoothing > 0.0 && averaged_.size() != array.pair_count()) {
      averaged_.assign(array.pair_count(), {});
    }
    GccSet set;
    set.alpha = alpha_;
    set.pairs.reserve(array.pair_count());
    std::vector<std::complex<double>> cross(length_ / 2 + 1);
    for (std::size_t n = 0; n < array.pair_count(); ++n) {
      const auto& p = array.pair(n);
      for (std::size_t f = 0; f < cross.size(); ++f) cross[f] = spectra[p.i][f] * std::conj(spectra[p.j][f]);
      if (options_.smoothing > 0.0) {
        auto& avg = averaged_[n];
        if (avg.empty()) {
          avg = cross;
        } else {
          const double l = options_.smoothing;
          for (std::size_t f = 0; f < cross.size(); ++f) avg[f] = l * avg[f] + (1.0 - l) * cross[f];
        }
        cross = avg;
      }
      set.pairs.push_back(lag_function(whiten(cross), array.max_tdoa(n, alpha_)));
    }
    return set;
  }

  void reset() { averaged_.clear(); }

 private:
  using RealBuffer = std::unique_ptr<double, detail::FftwDeleter<double>>;
  using ComplexBuffer = std::unique_ptr<fftw_complex, detail::FftwDeleter<fftw_complex>>;

  static RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
  static ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

  void check_lag(std::int64_t max_lag) const {
    if (max_lag < 1) throw ConfigError("max lag must be >= 1");
    if (static_cast<std::size_t>(2 * max_lag) >= padded_) {
      throw ConfigError("lag range +/-" + std::to_string(max_lag) + " does not fit a transform of " +
                        std::to_string(padded_) + " points");
    }
  }

  std::size_t length_;
  std::size_t padded_;
  int alpha_;
  Options options_;
  RealBuffer time_in_;
  ComplexBuffer spec_in_;
  ComplexBuffer spec_out_;
  RealBuffer time_out_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
  std::vector<std::vector<std::complex<double>>> averaged_;
};

inline LagFunction gcc_phat(std::span<const double> frame_i, std::span<const double> frame_j,
                            std::int64_t max_lag, int alpha = 1) {
  GccPhat engine(frame_i.size(), alpha);
  return engine.compute(frame_i, frame_j, max_lag);
}

inline GccSet gcc_all_pairs(const FrameSet& frames, const MicArray& array, int alpha = 1) {
  GccPhat engine(frames.length, alpha);
  return engine.all_pairs(frames, array);
}

}  // namespace gsg
