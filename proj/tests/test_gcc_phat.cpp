#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "gsg/gcc_phat.hpp"
#include "gsg/sim.hpp"
#include "oracles.hpp"

using namespace gsg;

namespace {

MultiChannel stream(std::size_t channels, std::size_t len, double fill = 0.0) {
  MultiChannel s;
  s.fs = 16000;
  s.channels.assign(channels, std::vector<double>(len, fill));
  return s;
}

}  // namespace

TEST(FrameStream, FrameCounts) {
  EXPECT_EQ(frame_stream(stream(2, 4096), 4096, 1024).frames.size(), 1u);
  EXPECT_EQ(frame_stream(stream(2, 8192), 4096, 1024).frames.size(), 5u);
  EXPECT_EQ(frame_stream(stream(2, 8191), 4096, 1024).frames.size(), 4u);
}

TEST(FrameStream, ShortStreamWarns) {
  const auto r = frame_stream(stream(3, 100), 4096, 1024);
  EXPECT_TRUE(r.frames.empty());
  EXPECT_TRUE(r.warning.has_value());
}

TEST(FrameStream, ZeroStreamGivesZeroFrames) {
  const auto r = frame_stream(stream(2, 5000), 1024, 512);
  ASSERT_FALSE(r.frames.empty());
  for (const auto& f : r.frames) {
    for (const auto& ch : f.channels) {
      for (double v : ch) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(FrameStream, AlignmentAndWindow) {
  auto s = stream(2, 3000);
  for (std::size_t k = 0; k < 3000; ++k) {
    s.channels[0][k] = static_cast<double>(k);
    s.channels[1][k] = -static_cast<double>(k);
  }
  FramingOptions o;
  o.length = 1024;
  o.hop = 256;
  const auto r = frame_stream(s, o);
  ASSERT_EQ(r.frames.size(), 8u);
  EXPECT_EQ(r.frames[2].start, 512u);
  EXPECT_EQ(r.frames[2].index, 2u);
  EXPECT_EQ(r.frames[2].channels[0][10], 522.0);
  EXPECT_EQ(r.frames[2].channels[1][10], -522.0);

  o.window = Window::hann;
  const auto w = frame_stream(s, o);
  const auto coef = window_coefficients(Window::hann, 1024);
  EXPECT_DOUBLE_EQ(w.frames[1].channels[0][100], 356.0 * coef[100]);
  EXPECT_DOUBLE_EQ(w.frames[1].channels[1][100], -356.0 * coef[100]);
}

TEST(FrameStream, Validation) {
  EXPECT_THROW(frame_stream(stream(1, 5000), 1024, 512), ConfigError);
  EXPECT_THROW(frame_stream(stream(2, 5000), 1000, 500), ConfigError);
  FramingOptions o;
  o.length = 1000;
  o.hop = 500;
  o.require_power_of_two = false;
  EXPECT_EQ(frame_stream(stream(2, 5000), o).frames.size(), 9u);
}

TEST(GccPhat, AutocorrelationPeaksAtZero) {
  const auto x = oracle::white(1024, 1);
  const auto r = gcc_phat(x, x, 20);
  EXPECT_EQ(r.peak_lag(), 0);
  EXPECT_NEAR(r.at(0), 1.0, 1e-9);
}

TEST(GccPhat, ImpulseTrainDelayMatchesBruteForce) {
  std::vector<double> s(512, 0.0);
  for (std::size_t k = 0; k < s.size(); k += 97) s[k] = 1.0;
  s[3] = 0.5;
  const auto xi = oracle::delayed(s, 5);  // mic i hears the source 5 samples later
  const auto r = gcc_phat(xi, s, 16);
  EXPECT_EQ(r.peak_lag(), 5);
  EXPECT_EQ(oracle::xcorr_peak(xi, s, 16), 5);
  EXPECT_NEAR(r.at(5), 1.0, 1e-9);
}

TEST(GccPhat, WhitenedSpectrumHasUnitMagnitude) {
  GccPhat engine(256, 1);
  const auto a = oracle::white(256, 2), b = oracle::white(256, 3);
  const auto xa = engine.spectrum(a), xb = engine.spectrum(b);
  std::vector<std::complex<double>> cross(xa.size());
  for (std::size_t f = 0; f < cross.size(); ++f) cross[f] = xa[f] * std::conj(xb[f]);
  const auto w = engine.whiten(cross);
  for (const auto& v : w) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
}

TEST(GccPhat, SilentFramesFlagged) {
  const std::vector<double> z(512, 0.0);
  const auto r = gcc_phat(z, z, 10);
  EXPECT_TRUE(r.silent);
  for (double v : r.values) EXPECT_EQ(v, 0.0);
}

TEST(GccPhat, BoundedEnergy) {
  const std::size_t L = 512;
  const auto a = oracle::white(L, 4), b = oracle::white(L, 5);
  const auto r = gcc_phat(a, b, 200);
  double e = 0.0;
  for (double v : r.values) e += v * v;
  // Every one of the L full-spectrum bins carries energy, so the bound is L / L.
  EXPECT_LE(e, 1.0 + 1e-9);
  EXPECT_GT(e, 0.0);
}

TEST(GccPhat, InterpolationPreservesIntegerLags) {
  const auto a = oracle::white(1024, 6);
  const auto b = oracle::delayed(a, -7);
  const auto r1 = gcc_phat(a, b, 30, 1);
  for (int alpha : {2, 4}) {
    const auto ra = gcc_phat(a, b, 30 * alpha, alpha);
    for (std::int64_t lag = -30; lag <= 30; ++lag) {
      EXPECT_NEAR(ra.at(lag * alpha), r1.at(lag), 1e-6 * std::max(1.0, std::abs(r1.at(lag))));
    }
    EXPECT_EQ(ra.peak_lag(), 7 * alpha);
  }
}

TEST(GccPhat, RejectsOversizedLagRange) {
  const auto a = oracle::white(64, 1);
  EXPECT_THROW(gcc_phat(a, a, 32), ConfigError);
  EXPECT_THROW(gcc_phat(a, a, 0), ConfigError);
  EXPECT_NO_THROW(gcc_phat(a, a, 31));
}

TEST(GccAllPairs, OneFunctionPerPairWithMatchingSupport) {
  const MicArray a({{0, 0, 0}, {0.3, 0, 0}, {0, 0.4, 0}}, 16000);
  FrameSet f;
  f.length = 1024;
  for (int m = 0; m < 3; ++m) f.channels.push_back(oracle::white(1024, 10 + m));
  for (int alpha : {1, 2}) {
    const auto set = gcc_all_pairs(f, a, alpha);
    ASSERT_EQ(set.size(), 3u);
    for (std::size_t n = 0; n < 3; ++n) {
      EXPECT_EQ(set[n].max_lag, a.max_tdoa(n, alpha));
      EXPECT_EQ(set[n].values.size(), static_cast<std::size_t>(2 * a.max_tdoa(n, alpha) + 1));
      for (double v : set[n].values) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(GccAllPairs, SilentInputFlagged) {
  const MicArray a({{0, 0, 0}, {0.3, 0, 0}, {0, 0.4, 0}}, 16000);
  FrameSet f;
  f.length = 512;
  f.channels.assign(3, std::vector<double>(512, 0.0));
  EXPECT_TRUE(gcc_all_pairs(f, a).silent());
}

TEST(GccAllPairs, FreeFieldPeaksMatchGeometry) {
  const MicArray a({{1.0, 1.0, 1.2}, {1.4, 1.1, 1.2}, {1.1, 1.6, 1.2}, {1.7, 1.5, 1.2}}, 16000);
  SimScene scene;
  scene.room = {4, 3, 2.5};
  scene.source = {2.9, 2.1, 1.2};
  scene.signal = oracle::white(4096, 9);
  const auto sig = synth_freefield(scene, a);
  FrameSet f;
  f.length = 4096;
  f.channels = sig.channels;
  const auto set = gcc_all_pairs(f, a);
  for (std::size_t n = 0; n < a.pair_count(); ++n) {
    EXPECT_LE(std::abs(set[n].peak_lag() - tdoa_at(scene.source, a, n)), 1) << "pair " << n;
  }
}

TEST(GccPhat, SmoothingAveragesAcrossCalls) {
  const MicArray a({{0, 0, 0}, {0.5, 0, 0}}, 16000);
  GccPhat::Options o;
  o.smoothing = 0.5;
  GccPhat engine(256, 1, o);
  FrameSet f;
  f.length = 256;
  f.channels = {oracle::white(256, 1), oracle::white(256, 2)};
  const auto first = engine.all_pairs(f, a);
  const auto again = engine.all_pairs(f, a);
  for (std::size_t k = 0; k < first[0].values.size(); ++k) EXPECT_NEAR(first[0].values[k], again[0].values[k], 1e-12);
  EXPECT_THROW(GccPhat(256, 1, GccPhat::Options{1e-12, 1.0}), ConfigError);
}
