// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero when any selected criterion fails.
//
//   gsg_acceptance              run all criteria
//   gsg_acceptance 3 5          run criteria 3 and 5

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gsg/gsg.hpp"
#include "oracles.hpp"

#ifndef GSG_PROPERTY_BINARY
#define GSG_PROPERTY_BINARY ""
#endif

using namespace gsg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

MicArray ula(int m, double fs) {
  std::vector<Vec3> mics;
  for (int k = 0; k < m; ++k) mics.emplace_back(1.0 + (k - (m - 1) / 2.0) * 0.15, 0.0, 0.0);
  return MicArray(mics, fs);
}

// Coverage percentages for the 0.15 m ULA over a 2 x 2 m region.
constexpr double kReferenceCoverage[3][3][4] = {
    {{1.22, 9.83, 27.14, 50.61}, {16.50, 71.25, 90.38, 94.31}, {46.25, 89.50, 92.50, 93.50}},
    {{9.28, 39.54, 74.27, 92.40}, {80.06, 95.44, 96.25, 97.44}, {93.00, 94.50, 95.00, 95.00}},
    {{30.91, 79.77, 95.90, 97.76}, {94.50, 95.94, 96.75, 97.00}, {93.50, 95.00, 95.00, 95.00}}};
constexpr double kRates[3] = {16000, 44100, 96000};
constexpr double kDeltas[3] = {0.01, 0.05, 0.1};
constexpr std::size_t kUrgCounts[3] = {40000, 1600, 400};

Outcome criterion1() {
  int within = 0, urg_ok = 0;
  double worst = 0.0;
  std::string misses;
  for (int f = 0; f < 3; ++f) {
    for (int d = 0; d < 3; ++d) {
      const SearchRegion region({0, 0, 0}, {2, 2, 0}, kDeltas[d]);
      for (int m = 3; m <= 6; ++m) {
        const auto array = ula(m, kRates[f]);
        if (build_urg(region, array).cell_count == kUrgCounts[d]) ++urg_ok;
        const auto t = build_gsg(region, array);
        const double pct = 100.0 * static_cast<double>(t.grid.cells.size()) / static_cast<double>(region.cell_count());
        const double dev = pct - kReferenceCoverage[f][d][m - 3];
        worst = std::max(worst, std::abs(dev));
        std::printf("  M=%d fs=%-6g delta=%-4g URG=%-5zu GSG=%-5zu coverage=%6.2f%% ref=%6.2f%% dev=%+5.2f\n", m,
                    kRates[f], kDeltas[d], region.cell_count(), t.grid.cells.size(), pct,
                    kReferenceCoverage[f][d][m - 3], dev);
        if (std::abs(dev) <= 3.0) {
          ++within;
        } else {
          misses += format(" M=%d/%gHz/%gm(%+.2fpp)", m, kRates[f], kDeltas[d], dev);
        }
      }
    }
  }
  Outcome o;
  o.pass = within == 36 && urg_ok == 36;
  o.detail = format("URG counts exact %d/36, GSG coverage within 3pp %d/36, worst %.2fpp", urg_ok, within, worst);
  if (!misses.empty()) o.detail += "; out of band:" + misses;
  return o;
}

Outcome criterion2() {
  const SearchRegion region({0, 0, 0}, {2, 2, 0}, 0.01);
  const auto array = ula(5, 96000);
  const auto t = build_gsg(region, array);
  const auto stats = sensitivity_stats(t.sensitivity, 25);
  Outcome o;
  o.pass = stats.max >= 20 && stats.max <= 45 && stats.max > array.pair_count();
  o.detail = format("max delta %u (band [20, 45], URG uses %zu), mean %.2f, cells with delta>=25: %zu", stats.max,
                    array.pair_count(), stats.mean, stats.high.size());
  return o;
}

Outcome criterion3() {
  const MicArray array({{0, 0, 0}, {0.5, 0, 0}}, 48000);
  const std::int64_t T = array.max_tdoa(0);
  const std::size_t L = 1024;
  const auto s = oracle::white(L, 2024);
  GccPhat engine(L, 1);
  int ok = 0, oracle_ok = 0, total = 0;
  for (std::int64_t d = -T; d <= T; ++d) {
    const auto xi = oracle::delayed(s, d);
    const auto r = engine.compute(xi, s, T);
    ++total;
    if (r.peak_lag() == d) ++ok;
    if (oracle::xcorr_peak(xi, s, T) == d) ++oracle_ok;
  }
  Outcome o;
  o.pass = ok == total && oracle_ok == total;
  o.detail = format("T_n=%lld, GCC-PHAT peak exact %d/%d, brute-force oracle agrees %d/%d", static_cast<long long>(T),
                    ok, total, oracle_ok, total);
  return o;
}

Outcome criterion4() {
  const double fs = 44100, delta = 0.05;
  const SearchRegion region({0, 0, 1.5}, {4, 3, 0}, delta);
  int pass = 0;
  double worst = 0.0;
  for (std::uint32_t scene_index = 0; scene_index < 100; ++scene_index) {
    std::seed_seq seq{7u, scene_index};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> ux(0.3, 3.7), uy(0.3, 2.7);
    std::vector<Vec3> mics;
    while (mics.size() < 5) {
      const Vec3 p(ux(rng), uy(rng), 1.5);
      if (std::all_of(mics.begin(), mics.end(), [&](const Vec3& q) { return (p - q).norm() > 0.3; })) {
        mics.push_back(p);
      }
    }
    const MicArray array(mics, fs);
    LocalizerOptions lo;
    lo.framing.length = 4096;
    Localizer loc(array, region, lo);
    const auto& tables = loc.gsg();
    std::vector<CellIndex> candidates;
    for (auto c : tables.grid.cells) {
      const Vec3 p = region.point(c);
      bool ok = p.x() >= 0.1 && p.y() >= 0.1;
      for (const auto& m : mics) ok = ok && (p - m).norm() >= 0.1;
      if (ok) candidates.push_back(c);
    }
    const CellIndex truth = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    SimScene scene;
    scene.room = {4, 3, 3};
    scene.source = region.point(truth);
    scene.signal = noise_bursts(fs, 4096 / fs, rng(), 1.0, 0.0);
    scene.signal.resize(4096);
    const auto est = loc.run(synth_freefield(scene, array), Backend::gsg);
    if (est.empty() || !est[0].estimate.ok()) continue;
    const double err = (*est[0].estimate.position - scene.source).norm();
    worst = std::max(worst, err);
    if (err <= 1.5 * delta + 1e-9) ++pass;
  }
  Outcome o;
  o.pass = pass >= 95;
  o.detail = format("GSG argmax within 1.5*delta in %d/100 scenes (need >= 95), worst error %.3f m", pass, worst);
  return o;
}

Outcome criterion5() {
  const std::vector<Vec3> mics{{0.7, 0.6, 1.5}, {1.6, 0.5, 1.5}, {0.5, 1.5, 1.5}, {1.5, 1.6, 1.5}, {1.1, 1.1, 1.5}};
  const MicArray array(mics, 44100);
  const SearchRegion region({0, 0, 1.5}, {4, 3, 0}, 0.5);
  EvalConfig cfg(array, region);
  cfg.room = {4, 3, 3};
  cfg.zones = {Zone{"high", {0.3, 0.3, 0}, {2.0, 2.0, 3}}, Zone{"low", {2.5, 1.8, 0}, {3.9, 2.9, 3}}};
  cfg.trials = 100;
  cfg.seed = 2024;
  cfg.snr_db = 10;
  cfg.reflection_order = 2;
  cfg.absorption = 0.5;
  const auto reports = evaluate(cfg);
  double ar[2][2] = {};
  for (const auto& r : reports) {
    const int z = r.zone == "high" ? 0 : 1;
    const int b = r.backend == Backend::gsg ? 1 : 0;
    ar[z][b] = r.ar;
    std::printf("  zone=%-4s backend=%s estimates=%zu rms=%.3f m AR=%.2f%%\n", r.zone.c_str(), to_string(r.backend),
                r.estimates, r.rms, r.ar);
  }
  Localizer loc(array, region);
  const auto& sens = loc.gsg().sensitivity;
  double mean_delta[2] = {};
  for (int z = 0; z < 2; ++z) {
    int n = 0;
    for (std::size_t g = 0; g < region.cell_count(); ++g) {
      if (detail::in_zone(region.point(static_cast<CellIndex>(g)), cfg.zones[z], 2)) {
        mean_delta[z] += sens.delta[g];
        ++n;
      }
    }
    mean_delta[z] /= std::max(n, 1);
  }
  Outcome o;
  o.pass = ar[0][1] > ar[0][0] && ar[0][1] > ar[1][1];
  o.detail = format("high zone AR GSG %.2f%% vs URG %.2f%%; GSG AR high %.2f%% vs low %.2f%% (mean delta %.1f vs %.1f)",
                    ar[0][1], ar[0][0], ar[0][1], ar[1][1], mean_delta[0], mean_delta[1]);
  return o;
}

Outcome criterion6() {
  const std::string binary = GSG_PROPERTY_BINARY;
  Outcome o;
  if (binary.empty()) {
    o.detail = "property binary path not configured";
    return o;
  }
  const std::string cmd = "\"" + binary + "\" --gtest_brief=1";
  std::fflush(stdout);
  const int status = std::system(cmd.c_str());
  o.pass = status == 0;
  o.detail = format("standalone property suite exit status %d", status);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"ULA grid coverage", criterion1},
      {"sensitivity range", criterion2},
      {"GCC-PHAT delay oracle", criterion3},
      {"noiseless localization exactness", criterion4},
      {"reverberant accuracy trend", criterion5},
      {"standalone property suites", criterion6},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }
  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("FAIL criterion %d: unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[id - 1].second();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[id - 1].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
