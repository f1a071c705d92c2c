// Command-line front end: grid construction, sensitivity export, scene
// simulation, localization of recordings and Monte-Carlo evaluation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsg/gsg.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> delta;
  std::optional<int> alpha;
  std::optional<std::string> backend;
  std::optional<std::uint32_t> restrict_sensitivity;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> threshold;
  std::string out;
};

gsg::Config load(const Overrides& o) {
  auto cfg = gsg::load_config(o.config);
  if (o.delta) cfg.delta = *o.delta;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.backend) cfg.backend = gsg::parse_backend(*o.backend);
  if (o.restrict_sensitivity) cfg.restrict_sensitivity = *o.restrict_sensitivity;
  if (o.seed) {
    cfg.scene.seed = *o.seed;
    cfg.evaluation.seed = *o.seed;
  }
  if (o.trials) cfg.evaluation.trials = *o.trials;
  if (o.threshold) cfg.evaluation.threshold = *o.threshold;
  cfg.region();  // revalidate after overrides
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    gsg::io::write_text(path, text);
  }
}

void build_grid(const Overrides& o, const std::string& csv) {
  const auto cfg = load(o);
  const auto array = cfg.array();
  const auto region = cfg.region();
  const auto hash = gsg::io::geometry_hash(region, array, cfg.alpha);
  std::printf("lattice_cells=%zu pairs=%zu alpha=%d hash=%016llx\n", region.cell_count(), array.pair_count(),
              cfg.alpha, static_cast<unsigned long long>(hash));
  if (cfg.backend == gsg::Backend::urg) {
    const auto t = gsg::build_urg(region, array, cfg.alpha);
    std::printf("backend=urg entries=%zu\n", t.chi.size());
    if (!o.out.empty()) gsg::io::save_urg(o.out, t, hash);
    if (!csv.empty()) gsg::io::write_text(csv, gsg::io::urg_csv(t, region));
    return;
  }
  const auto t = gsg::build_gsg(region, array, gsg::GsgOptions{cfg.alpha, cfg.mu});
  const auto stats = gsg::sensitivity_stats(t.sensitivity, 0);
  std::printf("backend=gsg q_raw=%llu removed=%llu q=%zu coherent_cells=%zu coverage=%.2f%% mu=%u\n",
              static_cast<unsigned long long>(t.lut.q_raw), static_cast<unsigned long long>(t.lut.removed),
              t.lut.size(), t.grid.cells.size(),
              100.0 * static_cast<double>(t.grid.cells.size()) / static_cast<double>(region.cell_count()),
              t.sensitivity.mu);
  std::printf("delta_min=%u delta_max=%u delta_mean=%.3f\n", stats.min, stats.max, stats.mean);
  if (!o.out.empty()) gsg::io::save_gsg(o.out, t, hash);
  if (!csv.empty()) gsg::io::write_text(csv, gsg::io::lut_csv(t.lut, region));
}

void sensitivity(const Overrides& o, const std::string& pgm, std::uint32_t high) {
  const auto cfg = load(o);
  const auto region = cfg.region();
  const auto t = gsg::build_gsg(region, cfg.array(), gsg::GsgOptions{cfg.alpha, cfg.mu});
  const auto stats = gsg::sensitivity_stats(t.sensitivity, high);
  std::fprintf(stderr, "nonzero=%zu min=%u max=%u mean=%.3f high_threshold=%u high_cells=%zu\n", stats.nonzero,
               stats.min, stats.max, stats.mean, high, stats.high.size());
  emit(o.out, gsg::io::sensitivity_csv(t.sensitivity, region));
  if (!pgm.empty()) gsg::io::write_bytes(pgm, gsg::io::sensitivity_pgm(t.sensitivity, region));
}

void simulate(const Overrides& o) {
  if (o.out.empty()) throw gsg::ConfigError("simulate requires --out");
  const auto cfg = load(o);
  const auto& sc = cfg.scene;
  const auto signal = gsg::noise_bursts(cfg.fs, sc.seconds, sc.seed, sc.burst, sc.gap);
  const auto out = gsg::synthesize(cfg.sim_scene(signal), cfg.array());
  gsg::wav::write(o.out, out);
  std::fprintf(stderr, "channels=%zu samples=%zu fs=%g order=%d\n", out.channel_count(), out.length(), out.fs,
               sc.reflection_order);
}

void localize(const Overrides& o, const std::string& input) {
  const auto cfg = load(o);
  const auto signal = gsg::wav::read(input);
  gsg::Localizer loc(cfg.array(), cfg.region(), cfg.localizer());
  emit(o.out, gsg::estimates_csv(loc.run(signal, cfg.backend)));
}

void evaluate(const Overrides& o, const std::string& trials_out, bool single_backend) {
  auto cfg = load(o);
  if (single_backend) cfg.evaluation.backends = {cfg.backend};
  const auto reports = gsg::evaluate(cfg.eval_config());
  emit(o.out, gsg::report_csv(reports));
  if (!trials_out.empty()) gsg::io::write_text(trials_out, gsg::trials_csv(reports));
}

int fail(const char* kind, const std::string& message) {
  std::string quoted;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') quoted += '\\';
    quoted += ch == '\n' ? ' ' : ch;
  }
  std::cerr << "error: kind=" << kind << " message=\"" << quoted << "\"\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-search sound source localization toolkit", "gsgtool"};
  app.require_subcommand(1);
  Overrides o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--delta", o.delta, "lattice resolution in metres")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o.alpha, "TDOA interpolation factor")->check(CLI::Range(1, 64));
    sub->add_option("-o,--out", o.out, "output path");
  };

  std::string csv, pgm, input, trials_out;
  std::uint32_t high = 0;

  auto* grid = app.add_subcommand("build-grid", "build URG or GSG tables and print statistics");
  common(grid);
  grid->add_option("--backend", o.backend, "urg or gsg");
  grid->add_option("--csv", csv, "also write the table as CSV");

  auto* sens = app.add_subcommand("sensitivity", "export the sensitivity map (CSV to --out or stdout)");
  common(sens);
  sens->add_option("--pgm", pgm, "16-bit PGM image of the map");
  sens->add_option("--high", high, "count threshold for the high-sensitivity summary");

  auto* sim = app.add_subcommand("simulate", "synthesize the configured scene to a WAV file");
  common(sim);
  sim->add_option("--seed", o.seed, "noise and source-signal seed");

  auto* loc = app.add_subcommand("localize", "estimate source positions frame by frame from a WAV file");
  common(loc);
  loc->add_option("-i,--input", input, "multichannel WAV recording")->required()->check(CLI::ExistingFile);
  loc->add_option("--backend", o.backend, "urg or gsg");
  loc->add_option("--restrict-sensitivity", o.restrict_sensitivity, "keep cells with at least this count");

  auto* ev = app.add_subcommand("evaluate", "Monte-Carlo RMS / accuracy-rate evaluation");
  common(ev);
  auto* ev_backend = ev->add_option("--backend", o.backend, "evaluate only this backend");
  ev->add_option("--seed", o.seed, "master seed");
  ev->add_option("--trials", o.trials, "trials per zone")->check(CLI::PositiveNumber);
  ev->add_option("--threshold", o.threshold, "accuracy-rate distance threshold in metres")
      ->check(CLI::PositiveNumber);
  ev->add_option("--restrict-sensitivity", o.restrict_sensitivity, "keep cells with at least this count");
  ev->add_option("--trials-out", trials_out, "per-frame trial records CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*grid) build_grid(o, csv);
    if (*sens) sensitivity(o, pgm, high);
    if (*sim) simulate(o);
    if (*loc) localize(o, input);
    if (*ev) evaluate(o, trials_out, ev_backend->count() > 0);
  } catch (const gsg::ConfigError& e) {
    return fail("config", e.what());
  } catch (const gsg::FormatError& e) {
    return fail("format", e.what());
  } catch (const gsg::DomainError& e) {
    return fail("domain", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
