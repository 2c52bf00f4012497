#include "terra/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>

#include "terra/config.hpp"
#include "terra/error.hpp"
#include "terra/text.hpp"
#include "terra/thread_pool.hpp"

namespace terra {

namespace {

struct CommonOptions {
  std::string task;
  std::string config;
  std::string terrain;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--task", o.task, "hill-circle, flat-circle, ditch-cross or slalom");
  app->add_option("--config", o.config, "config file with [section] key = value lines");
  app->add_option("--set", o.sets, "override, section.key=value (repeatable)");
  app->add_option("--seed", o.seed, "sampler seed (mppi.seed)");
  app->add_option("--threads", o.threads, "planner workers, 0 for the default");
  app->add_option("--terrain", o.terrain, "ASCII grid to use instead of the generated terrain");
}

TaskSpec resolve_spec(const CommonOptions& o) {
  std::vector<ConfigEntry> entries;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw IoError("cannot open config '" + o.config + "'");
    entries = parse_config(in);
  }
  std::string name = o.task.empty() ? config_task_name(entries) : o.task;
  if (name.empty()) name = "hill_circle";
  const TaskKind kind = task_kind_from_string(name);
  TaskSpec spec = make_task(kind);
  for (const ConfigEntry& e : entries) {
    try {
      apply_setting(spec, e.section, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(o.config + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
  spec.kind = kind;
  for (const std::string& s : o.sets) apply_override(spec, s);
  if (o.seed) spec.planner.mppi.seed = *o.seed;
  if (o.threads) spec.threads = *o.threads;
  spec.threads = resolve_threads(spec.threads);
  spec.validate();
  return spec;
}

ElevationMap resolve_map(const CommonOptions& o, const TaskSpec& spec) {
  return o.terrain.empty() ? generate_terrain(spec.terrain) : read_grid_file(o.terrain);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::string summary_line(const MetricsReport& m) {
  return "task=" + m.task + " status=" + m.status + " avg_speed=" + format_double(m.avg_speed) +
         " max_rr=" + format_double(m.max_rr) +
         " tau_violations=" + std::to_string(m.tau_violations) +
         " sim_time=" + format_double(m.sim_time);
}

// ---- gen-terrain ----------------------------------------------------------

struct TerrainOptions {
  std::string kind = "flat";
  std::optional<double> size;
  TerrainSpec spec;
  std::string out;
};

int cmd_gen_terrain(TerrainOptions& o, std::ostream& out) {
  TerrainSpec spec = o.spec;
  spec.kind = terrain_kind_from_string(o.kind);
  if (o.size) spec.size_x = spec.size_y = *o.size;
  const ElevationMap map = generate_terrain(spec);
  write_grid_file(o.out, map);
  out << "wrote " << o.out << ": " << map.n_cols() << "x" << map.n_rows()
      << " cells, min=" << format_double(map.min_height())
      << " max=" << format_double(map.max_height()) << '\n';
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const CommonOptions& o, const std::string& out_dir, std::ostream& out) {
  const TaskSpec spec = resolve_spec(o);
  const ElevationMap map = resolve_map(o, spec);
  const TaskResult r = run_task(spec, map);
  const std::filesystem::path dir(out_dir);
  ensure_dir(dir);
  write_log_file((dir / "log.csv").string(), r.log);
  write_metrics_file((dir / "metrics.txt").string(), r.metrics);
  write_text_file(dir / "config.cfg", dump_config(spec));
  out << summary_line(r.metrics) << '\n';
  return r.metrics.failed() ? kExitEpisode : kExitOk;
}

// ---- plan -----------------------------------------------------------------

struct PlanOptions {
  std::optional<double> x, y, psi;
  double v = 0.0;
  std::string out;
};

int cmd_plan(const CommonOptions& o, const PlanOptions& p, std::ostream& out) {
  TaskSpec spec = resolve_spec(o);
  const ElevationMap map = resolve_map(o, spec);
  PlannerSettings settings = spec.planner;
  settings.footprint = {spec.plant.wheelbase, spec.plant.track_width};
  Planner planner(settings, spec.threads);
  const Control initial{p.v, 0.0};
  planner.set_last_command(initial);
  planner.set_nominal({std::vector<Control>(static_cast<std::size_t>(settings.mppi.horizon), initial)});
  const PlanarState pose{p.x.value_or(spec.start.x), p.y.value_or(spec.start.y),
                         p.psi.value_or(spec.start.psi)};
  const DelayConfig delay{std::vector<Control>(static_cast<std::size_t>(spec.plant.delay), initial)};
  const PlanResult r = planner.plan_step(pose, delay, map);
  const PlanDiagnostics& d = r.diagnostics;

  out << "command v=" << format_double(r.command.v) << " kappa=" << format_double(r.command.kappa)
      << '\n';
  out << "projected x=" << format_double(d.projected.x) << " y=" << format_double(d.projected.y)
      << " psi=" << format_double(d.projected.psi) << '\n';
  out << "min_cost=" << format_double(d.min_cost) << " mean_cost=" << format_double(d.mean_cost)
      << " ess=" << format_double(d.effective_samples) << " best=" << d.best_index << " ("
      << to_string(d.best_family) << ")\n";
  for (std::size_t f = 0; f < 4; ++f) {
    out << "family " << to_string(static_cast<SampleFamily>(f)) << " best_cost=" << format_double(d.family_best_cost[f]) << '\n';
  }

  if (!p.out.empty()) {
    const SampleBatch& b = planner.batch();
    std::ofstream csv(p.out);
    if (!csv) throw IoError("cannot open '" + p.out + "' for writing");
    csv << "index,family,cost,rollover,airtime,bump,task,off_map,max_rr,max_tau,min_tau\n";
    for (int i = 0; i < b.n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const auto rr = b.rr_row(i);
      const auto tau = b.tau_row(i);
      csv << i << ',' << to_string(b.family[k]) << ',' << format_double(b.cost[k]) << ','
          << format_double(b.rollover_cost[k]) << ',' << format_double(b.airtime_cost[k]) << ','
          << format_double(b.bump_cost[k]) << ',' << format_double(b.task_cost[k]) << ','
          << int(b.off_map[k]) << ',' << format_double(*std::max_element(rr.begin(), rr.end()))
          << ',' << format_double(*std::max_element(tau.begin(), tau.end())) << ','
          << format_double(*std::min_element(tau.begin(), tau.end())) << '\n';
    }
    if (!csv) throw IoError("write to '" + p.out + "' failed");
  }
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const CommonOptions& o, const std::string& log_path, const std::string& out_dir,
             std::ostream& out) {
  const TaskSpec spec = resolve_spec(o);
  const ElevationMap map = resolve_map(o, spec);
  TrajectoryLog log = read_log_file(log_path);
  apply_ground_truth(log, map, spec);
  MetricsReport m;
  m.task = to_string(spec.kind);
  summarize_log(log, spec, m);

  const std::filesystem::path dir(out_dir);
  ensure_dir(dir);
  {
    std::ofstream csv(dir / "heading_bins.csv");
    if (!csv) throw IoError("cannot write heading_bins.csv");
    csv << "lo_deg,hi_deg,count,mean_speed,max_speed,mean_rr,max_rr\n";
    for (const HeadingBin& b : heading_bins(log)) {
      csv << format_double(b.lo_deg) << ',' << format_double(b.hi_deg) << ',' << b.count << ','
          << format_double(b.mean_speed) << ',' << format_double(b.max_speed) << ','
          << format_double(b.mean_rr) << ',' << format_double(b.max_rr) << '\n';
    }
  }
  {
    std::ofstream csv(dir / "tau_profile.csv");
    if (!csv) throw IoError("cannot write tau_profile.csv");
    csv << "s,x,y,v,tau_ditch,tau_min,tau_max\n";
    double s = 0.0;
    for (std::size_t k = 0; k < log.rows.size(); ++k) {
      const LogRow& r = log.rows[k];
      if (k > 0) s += std::hypot(r.x - log.rows[k - 1].x, r.y - log.rows[k - 1].y);
      csv << format_double(s) << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
          << format_double(r.v_actual) << ',' << format_double(r.tau_ditch) << ','
          << format_double(spec.planner.constraints.tau_min) << ','
          << format_double(spec.planner.constraints.tau_max) << '\n';
    }
  }
  write_metrics_file((dir / "eval_metrics.txt").string(), m);
  out << "rows=" << log.rows.size() << " max_rr=" << format_double(m.max_rr)
      << " frac_rr_above_max=" << format_double(m.frac_rr_above_max)
      << " tau_violations=" << m.tau_violations << '\n';
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const CommonOptions& o, int iterations, std::optional<int> samples,
              std::optional<int> horizon, std::ostream& out) {
  if (iterations < 100) throw ConfigError("bench needs at least 100 iterations");
  TaskSpec spec = resolve_spec(o);
  if (samples) set_sample_count(spec.planner.mppi, *samples);
  if (horizon) spec.planner.mppi.horizon = *horizon;
  spec.validate();
  const BenchReport r = bench_planner(spec, iterations, spec.threads);
  out << "iterations=" << r.iterations << " samples=" << r.samples << " horizon=" << r.horizon
      << " threads=" << r.threads << '\n';
  out << "median_ms=" << format_double(r.median_ms) << " p95_ms=" << format_double(r.p95_ms)
      << " mean_ms=" << format_double(r.mean_ms) << '\n';
  out << "throughput_sample_steps_per_s=" << format_double(r.throughput) << '\n';
  out << "cost_checksum=" << format_double(r.cost_checksum) << '\n';
  return kExitOk;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested <= 0) return ThreadPool::default_worker_count();
  if (const char* env = std::getenv("TERRA_THREADS")) {
    if (const auto cap = parse_number<int>(env); cap && *cap > 0) return std::min(requested, *cap);
  }
  return requested;
}

void set_sample_count(MppiConfig& config, int n) {
  if (n < 1) throw ConfigError("sample count must be >= 1");
  config.n_narrow = n * 3 / 16;
  config.n_scaled = n * 5 / 32;
  config.n_reset = n / 32;
  config.n_conv = n - config.n_narrow - config.n_scaled - config.n_reset;
}

BenchReport bench_planner(const TaskSpec& spec, int iterations, int threads) {
  spec.validate();
  if (iterations < 1) throw ConfigError("bench needs at least one iteration");
  const ElevationMap map = generate_terrain(spec.terrain);
  PlannerSettings settings = spec.planner;
  settings.footprint = {spec.plant.wheelbase, spec.plant.track_width};
  Planner planner(settings, threads);
  const Control cruise{std::min(5.0, settings.limits.v_cap), 0.0};
  planner.set_last_command(cruise);
  planner.set_nominal({std::vector<Control>(static_cast<std::size_t>(settings.mppi.horizon), cruise)});
  const DelayConfig delay{std::vector<Control>(static_cast<std::size_t>(spec.plant.delay), cruise)};

  BenchReport r;
  r.iterations = iterations;
  r.samples = settings.mppi.samples();
  r.horizon = settings.mppi.horizon;
  r.threads = planner.threads();
  r.times_ms.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlanResult p = planner.plan_step(spec.start, delay, map);
    const auto t1 = std::chrono::steady_clock::now();
    r.times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    r.cost_checksum += p.diagnostics.min_cost;
  }
  std::vector<double> sorted = r.times_ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  r.p95_ms = sorted[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1)];
  double sum = 0.0;
  for (double t : sorted) sum += t;
  r.mean_ms = sum / static_cast<double>(n);
  r.throughput = static_cast<double>(r.samples) * r.horizon / (r.median_ms * 1e-3);
  return r;
}

std::vector<HeadingBin> heading_bins(const TrajectoryLog& log) {
  constexpr int kBins = 24;
  std::vector<HeadingBin> bins(kBins);
  std::vector<double> speed_sum(kBins, 0.0);
  std::vector<double> rr_sum(kBins, 0.0);
  for (int b = 0; b < kBins; ++b) {
    bins[static_cast<std::size_t>(b)].lo_deg = 15.0 * b;
    bins[static_cast<std::size_t>(b)].hi_deg = 15.0 * (b + 1);
  }
  for (const LogRow& r : log.rows) {
    double deg = std::fmod(r.psi * 180.0 / std::numbers::pi, 360.0);
    if (deg < 0.0) deg += 360.0;
    const auto b = static_cast<std::size_t>(std::min(static_cast<int>(deg / 15.0), kBins - 1));
    HeadingBin& bin = bins[b];
    ++bin.count;
    speed_sum[b] += r.v_actual;
    rr_sum[b] += r.rr;
    bin.max_speed = std::max(bin.max_speed, r.v_actual);
    bin.max_rr = std::max(bin.max_rr, r.rr);
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].count > 0) {
      bins[b].mean_speed = speed_sum[b] / static_cast<double>(bins[b].count);
      bins[b].mean_rr = rr_sum[b] / static_cast<double>(bins[b].count);
    }
  }
  return bins;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constraint-aware MPPI planner and closed-loop simulator", "terra"};
  app.require_subcommand(1);

  TerrainOptions terrain;
  auto* gen = app.add_subcommand("gen-terrain", "write a synthetic elevation map");
  gen->add_option("--kind", terrain.kind, "flat, incline, v_ditch, crater or sine_bumps");
  gen->add_option("--size", terrain.size, "extent in meters along both axes");
  gen->add_option("--size-x", terrain.spec.size_x);
  gen->add_option("--size-y", terrain.spec.size_y);
  gen->add_option("--res", terrain.spec.resolution, "cell size in meters");
  gen->add_option("--center-x", terrain.spec.center_x);
  gen->add_option("--center-y", terrain.spec.center_y);
  gen->add_option("--angle-deg", terrain.spec.angle_deg, "incline angle");
  gen->add_option("--azimuth-deg", terrain.spec.azimuth_deg, "incline downhill azimuth");
  gen->add_option("--depth", terrain.spec.depth);
  gen->add_option("--half-width", terrain.spec.half_width);
  gen->add_option("--wall-angle-deg", terrain.spec.wall_angle_deg);
  gen->add_option("--axis-azimuth-deg", terrain.spec.axis_azimuth_deg);
  gen->add_option("--edge-blend", terrain.spec.edge_blend);
  gen->add_option("--radius", terrain.spec.radius);
  gen->add_option("--rim-width", terrain.spec.rim_width);
  gen->add_option("--amplitude", terrain.spec.amplitude);
  gen->add_option("--wavelength", terrain.spec.wavelength);
  gen->add_option("--out", terrain.out, "output grid file")->required();

  CommonOptions sim_opts;
  std::string sim_out = ".";
  auto* sim = app.add_subcommand("simulate", "run a closed-loop task");
  add_common(sim, sim_opts);
  sim->add_option("--out", sim_out, "output directory for log.csv, metrics.txt, config.cfg");

  CommonOptions plan_opts;
  PlanOptions plan_args;
  auto* plan = app.add_subcommand("plan", "run one planning step and dump the sampled batch");
  add_common(plan, plan_opts);
  plan->add_option("--x", plan_args.x);
  plan->add_option("--y", plan_args.y);
  plan->add_option("--psi", plan_args.psi, "heading, rad");
  plan->add_option("--v", plan_args.v, "current speed and nominal speed");
  plan->add_option("--out", plan_args.out, "CSV of per-sample costs");

  CommonOptions eval_opts;
  std::string eval_log;
  std::string eval_out = ".";
  auto* eval = app.add_subcommand("eval", "recompute ground truth and aggregates from a log");
  add_common(eval, eval_opts);
  eval->add_option("--log", eval_log, "trajectory CSV")->required();
  eval->add_option("--out", eval_out, "output directory");

  CommonOptions bench_opts;
  int bench_iters = 200;
  std::optional<int> bench_samples;
  std::optional<int> bench_horizon;
  auto* bench = app.add_subcommand("bench", "time plan_step");
  add_common(bench, bench_opts);
  bench->add_option("--iterations", bench_iters, "at least 100");
  bench->add_option("--samples", bench_samples, "total samples N");
  bench->add_option("--horizon", bench_horizon, "horizon steps H");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_terrain(terrain, out);
    if (sim->parsed()) return cmd_simulate(sim_opts, sim_out, out);
    if (plan->parsed()) return cmd_plan(plan_opts, plan_args, out);
    if (eval->parsed()) return cmd_eval(eval_opts, eval_log, eval_out, out);
    if (bench->parsed()) {
      return cmd_bench(bench_opts, bench_iters, bench_samples, bench_horizon, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace terra
