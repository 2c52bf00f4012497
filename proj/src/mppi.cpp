#include "terra/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "terra/error.hpp"
#include "terra/rng.hpp"
#include "terra/thread_pool.hpp"

namespace terra {

std::string to_string(RolloverCostMode mode) {
  return mode == RolloverCostMode::physics ? "physics" : "roll_angle";
}

RolloverCostMode rollover_cost_mode_from_string(const std::string& name) {
  if (name == "physics") return RolloverCostMode::physics;
  if (name == "roll_angle" || name == "roll-angle" || name == "baseline") {
    return RolloverCostMode::roll_angle;
  }
  throw ConfigError("unknown rollover cost mode '" + name + "'");
}

std::string to_string(SampleFamily family) {
  switch (family) {
    case SampleFamily::conventional:
      return "conventional";
    case SampleFamily::narrow:
      return "narrow";
    case SampleFamily::scaled:
      return "scaled";
    case SampleFamily::reset:
      return "reset";
  }
  return "unknown";
}

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::none:
      return "none";
    case PathKind::circle:
      return "circle";
    case PathKind::line:
      return "line";
    case PathKind::sine:
      return "sine";
  }
  return "none";
}

PathKind path_kind_from_string(const std::string& name) {
  if (name == "none") return PathKind::none;
  if (name == "circle") return PathKind::circle;
  if (name == "line") return PathKind::line;
  if (name == "sine") return PathKind::sine;
  throw ConfigError("unknown path kind '" + name + "'");
}

void MppiConfig::validate() const {
  if (horizon < 2) throw ConfigError("mppi.horizon must be >= 2");
  if (n_conv < 0 || n_narrow < 0 || n_scaled < 0 || n_reset < 0) {
    throw ConfigError("sample counts must be >= 0");
  }
  if (samples() < 1) throw ConfigError("need at least one sample");
  if (!(lambda > 0.0 && dt > 0.0 && sigma_v > 0.0 && sigma_kappa > 0.0)) {
    throw ConfigError("lambda, dt, sigma_v and sigma_kappa must be > 0");
  }
  if (!(narrow_scale > 0.0 && narrow_scale < 1.0 && speed_scale > 0.0 && speed_scale < 1.0)) {
    throw ConfigError("narrow_scale and speed_scale must lie in (0, 1)");
  }
  if (!(kappa_reset >= 0.0)) throw ConfigError("kappa_reset must be >= 0");
  if (!(roll_threshold >= 0.0)) throw ConfigError("roll_threshold must be >= 0");
  if (!(out_of_map_penalty >= 0.0)) throw ConfigError("out_of_map_penalty must be >= 0");
  if (ditch_phases < 1) throw ConfigError("mppi.ditch_phases must be >= 1");
  if (!(ditch_margin >= 0.0)) throw ConfigError("mppi.ditch_margin must be >= 0");
}

TaskCost::PathError TaskCost::path_error(const PlanarState& s) const noexcept {
  switch (path) {
    case PathKind::none:
      return {0.0, s.psi};
    case PathKind::circle: {
      const double dx = s.x - center_x;
      const double dy = s.y - center_y;
      const double bearing = std::atan2(dy, dx);
      return {std::hypot(dx, dy) - radius,
              bearing + (direction >= 0 ? 0.5 : -0.5) * std::numbers::pi};
    }
    case PathKind::line:
    case PathKind::sine: {
      const double ux = std::cos(line_heading);
      const double uy = std::sin(line_heading);
      const double rx = s.x - line_x;
      const double ry = s.y - line_y;
      const double along = rx * ux + ry * uy;
      const double across = -rx * uy + ry * ux;
      if (path == PathKind::line) return {across, line_heading};
      const double k = 2.0 * std::numbers::pi / sine_wavelength;
      return {across - sine_amplitude * std::sin(k * along),
              line_heading + std::atan(sine_amplitude * k * std::cos(k * along))};
    }
  }
  return {0.0, s.psi};
}

double TaskCost::step_cost(const PlanarState& s, const Control& u) const noexcept {
  const double dv = u.v - target_speed;
  double c = w_speed * dv * dv;
  if (path != PathKind::none) {
    const PathError e = path_error(s);
    c += w_path * e.lateral * e.lateral + w_heading * (1.0 - std::cos(s.psi - e.heading));
  }
  return c;
}

void PlannerSettings::validate() const {
  mppi.validate();
  limits.validate();
  vehicle.validate();
  constraints.validate(vehicle);
  footprint.validate();
  if (task.path == PathKind::circle && !(task.radius > 0.0)) {
    throw ConfigError("task radius must be > 0");
  }
  if (task.path == PathKind::sine && !(task.sine_wavelength > 0.0)) {
    throw ConfigError("task sine wavelength must be > 0");
  }
  if (!(task.w_speed >= 0.0 && task.w_path >= 0.0 && task.w_heading >= 0.0)) {
    throw ConfigError("task cost weights must be >= 0");
  }
  if (task.direction != 1 && task.direction != -1) {
    throw ConfigError("task.direction must be 1 or -1");
  }
}

void SampleBatch::resize(int samples, int horizon_steps) {
  n = samples;
  horizon = horizon_steps;
  const auto ns = static_cast<std::size_t>(samples);
  const auto nh = ns * static_cast<std::size_t>(horizon_steps);
  family.resize(ns);
  raw.resize(nh);
  processed.resize(nh);
  rollouts.resize(ns * static_cast<std::size_t>(horizon_steps + 1));
  roll.resize(nh);
  pitch.resize(nh);
  rr.resize(nh);
  tau.resize(nh);
  rollover_cost.resize(ns);
  airtime_cost.resize(ns);
  bump_cost.resize(ns);
  task_cost.resize(ns);
  cost.resize(ns);
  off_map.resize(ns);
}

std::span<const Control> SampleBatch::raw_row(int i) const {
  return {raw.data() + static_cast<std::size_t>(i) * horizon, static_cast<std::size_t>(horizon)};
}

std::span<const Control> SampleBatch::processed_row(int i) const {
  return {processed.data() + static_cast<std::size_t>(i) * horizon,
          static_cast<std::size_t>(horizon)};
}

std::span<const PlanarState> SampleBatch::rollout_row(int i) const {
  return {rollouts.data() + static_cast<std::size_t>(i) * (horizon + 1),
          static_cast<std::size_t>(horizon + 1)};
}

std::span<const double> SampleBatch::rr_row(int i) const {
  return {rr.data() + static_cast<std::size_t>(i) * horizon, static_cast<std::size_t>(horizon)};
}

std::span<const double> SampleBatch::tau_row(int i) const {
  return {tau.data() + static_cast<std::size_t>(i) * horizon, static_cast<std::size_t>(horizon)};
}

void sample_raw(const NominalSequence& nominal, const MppiConfig& config, std::uint64_t iteration,
                SampleBatch& batch) {
  const int horizon = config.horizon;
  if (static_cast<int>(nominal.controls.size()) != horizon) {
    throw InvalidSpec("nominal length does not match the horizon");
  }
  const int total = config.samples();
  if (batch.n != total || batch.horizon != horizon) batch.resize(total, horizon);

  const double narrow_std = std::sqrt(config.narrow_scale);
  const std::array<double, 3> reset_kappa{0.0, -config.kappa_reset, config.kappa_reset};
  const int narrow_begin = config.n_conv;
  const int scaled_begin = narrow_begin + config.n_narrow;
  const int reset_begin = scaled_begin + config.n_scaled;

  for (int i = 0; i < total; ++i) {
    SampleFamily fam = SampleFamily::conventional;
    if (i >= reset_begin) {
      fam = SampleFamily::reset;
    } else if (i >= scaled_begin) {
      fam = SampleFamily::scaled;
    } else if (i >= narrow_begin) {
      fam = SampleFamily::narrow;
    }
    batch.family[static_cast<std::size_t>(i)] = fam;
    const double std_scale = fam == SampleFamily::narrow ? narrow_std : 1.0;
    Control* row = batch.raw.data() + static_cast<std::size_t>(i) * horizon;
    for (int h = 0; h < horizon; ++h) {
      Control mean = nominal.controls[static_cast<std::size_t>(h)];
      if (fam == SampleFamily::scaled) {
        mean.v *= config.speed_scale;
      } else if (fam == SampleFamily::reset) {
        mean = {0.0, reset_kappa[static_cast<std::size_t>((i - reset_begin) % 3)]};
      }
      const std::uint64_t index = (static_cast<std::uint64_t>(i) << 32) | static_cast<unsigned>(h);
      const NormalPair z = normal_pair(config.seed, iteration, index);
      row[h] = {mean.v + std_scale * config.sigma_v * z.first,
                mean.kappa + std_scale * config.sigma_kappa * z.second};
    }
  }
}

namespace {

struct Scratch {
  std::vector<double> pitch;
  std::vector<double> omega2;
  std::vector<double> alpha2;
  std::vector<double> sin_roll;
  std::vector<double> cos_roll;
  std::vector<double> air_excess;
  std::vector<double> bump_excess;

  explicit Scratch(int horizon)
      : pitch(static_cast<std::size_t>(horizon + 1)),
        omega2(pitch.size()),
        alpha2(pitch.size()),
        sin_roll(pitch.size()),
        cos_roll(pitch.size()),
        air_excess(pitch.size()),
        bump_excess(pitch.size()) {}
};

void evaluate_sample(SampleBatch& batch, int i, const PlanarState& start, const Control& prev,
                     const ElevationMap& map, const PlannerSettings& s, Scratch& scratch) {
  const int horizon = batch.horizon;
  const auto base = static_cast<std::size_t>(i) * horizon;
  std::span<const Control> raw(batch.raw.data() + base, static_cast<std::size_t>(horizon));
  std::span<Control> controls(batch.processed.data() + base, static_cast<std::size_t>(horizon));
  std::span<PlanarState> states(batch.rollouts.data() + static_cast<std::size_t>(i) * (horizon + 1),
                                static_cast<std::size_t>(horizon + 1));

  process_feasible_into(raw, prev, s.limits, controls);
  rollout_into(start, controls, s.mppi.dt, states);

  double task = 0.0;
  for (int h = 0; h < horizon; ++h) {
    task += s.task.step_cost(states[static_cast<std::size_t>(h + 1)],
                             controls[static_cast<std::size_t>(h)]);
  }
  batch.task_cost[static_cast<std::size_t>(i)] = task;

  bool off_map = false;
  double* roll = batch.roll.data() + base;
  double* pitch_out = batch.pitch.data() + base;
  for (int h = 0; h <= horizon; ++h) {
    const PlanarState& st = states[static_cast<std::size_t>(h)];
    const AttitudeSample a = sample_attitude(map, st.x, st.y, st.psi, s.footprint);
    if (a.status != AttitudeSample::Status::ok) {
      off_map = true;
      break;
    }
    scratch.pitch[static_cast<std::size_t>(h)] = a.attitude.pitch;
    scratch.sin_roll[static_cast<std::size_t>(h)] = std::sin(a.attitude.roll);
    scratch.cos_roll[static_cast<std::size_t>(h)] = std::cos(a.attitude.roll);
    if (h < horizon) {
      roll[h] = a.attitude.roll;
      pitch_out[h] = a.attitude.pitch;
    }
  }

  double* rr = batch.rr.data() + base;
  double* tau = batch.tau.data() + base;
  batch.off_map[static_cast<std::size_t>(i)] = off_map ? 1 : 0;
  if (off_map) {
    std::fill(rr, rr + horizon, 0.0);
    std::fill(tau, tau + horizon, 0.0);
    std::fill(roll, roll + horizon, 0.0);
    std::fill(pitch_out, pitch_out + horizon, 0.0);
    batch.rollover_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.airtime_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.bump_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.cost[static_cast<std::size_t>(i)] = s.mppi.out_of_map_penalty + task;
    return;
  }

  pitch_rates_into(scratch.pitch, s.mppi.dt, scratch.omega2, scratch.alpha2);

  const VehicleParams& veh = s.vehicle;
  const ConstraintParams& cp = s.constraints;
  const double tau_hi = cp.tau_max - s.mppi.ditch_margin;
  const double tau_lo = cp.tau_min + s.mppi.ditch_margin;
  double rollover = 0.0;
  double airtime = 0.0;
  double bump = 0.0;
  for (int h = 0; h < horizon; ++h) {
    const auto k = static_cast<std::size_t>(h);
    const Control& u = controls[k];
    const double risk =
        rollover_risk_unchecked(u.v, u.kappa, scratch.sin_roll[k], scratch.cos_roll[k], veh.g);
    rr[h] = risk;
    if (s.mppi.rollover_mode == RolloverCostMode::physics) {
      if (risk > cp.rr_max) rollover += risk;
    } else {
      const double excess = std::abs(roll[h]) - s.mppi.roll_threshold;
      if (excess > 0.0) rollover += excess;
    }
    const double th = scratch.pitch[k];
    const double torque = ditch_torque_trig(u.v, scratch.omega2[k], scratch.alpha2[k],
                                            std::sin(th), std::cos(th), veh);
    tau[h] = torque;
    scratch.air_excess[k] = std::max(torque - tau_hi, 0.0);
    scratch.bump_excess[k] = std::max(tau_lo - torque, 0.0);
  }

  // Extra sampling phases between rollout states: the same path, sampled
  // m/P of a step later, differenced at the same interval.
  for (int m = 1; m < s.mppi.ditch_phases && !off_map; ++m) {
    const double offset = s.mppi.dt * m / s.mppi.ditch_phases;
    for (int h = 0; h <= horizon; ++h) {
      const auto k = static_cast<std::size_t>(std::min(h, horizon - 1));
      const PlanarState st = step(states[static_cast<std::size_t>(h)], controls[k], offset);
      const AttitudeSample a = sample_attitude(map, st.x, st.y, st.psi, s.footprint);
      if (a.status != AttitudeSample::Status::ok) {
        off_map = true;
        break;
      }
      scratch.pitch[static_cast<std::size_t>(h)] = a.attitude.pitch;
    }
    if (off_map) break;
    pitch_rates_into(scratch.pitch, s.mppi.dt, scratch.omega2, scratch.alpha2);
    for (int h = 0; h < horizon; ++h) {
      const auto k = static_cast<std::size_t>(h);
      const double th = scratch.pitch[k];
      const double torque = ditch_torque_trig(controls[k].v, scratch.omega2[k], scratch.alpha2[k],
                                              std::sin(th), std::cos(th), veh);
      scratch.air_excess[k] = std::max(scratch.air_excess[k], torque - tau_hi);
      scratch.bump_excess[k] = std::max(scratch.bump_excess[k], tau_lo - torque);
    }
  }
  if (off_map) {
    batch.off_map[static_cast<std::size_t>(i)] = 1;
    std::fill(rr, rr + horizon, 0.0);
    std::fill(tau, tau + horizon, 0.0);
    std::fill(roll, roll + horizon, 0.0);
    std::fill(pitch_out, pitch_out + horizon, 0.0);
    batch.airtime_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.bump_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.rollover_cost[static_cast<std::size_t>(i)] = 0.0;
    batch.cost[static_cast<std::size_t>(i)] = s.mppi.out_of_map_penalty + task;
    return;
  }
  for (int h = 0; h < horizon; ++h) {
    airtime += scratch.air_excess[static_cast<std::size_t>(h)];
    bump += scratch.bump_excess[static_cast<std::size_t>(h)];
  }
  batch.rollover_cost[static_cast<std::size_t>(i)] = rollover;
  batch.airtime_cost[static_cast<std::size_t>(i)] = airtime;
  batch.bump_cost[static_cast<std::size_t>(i)] = bump;
  batch.cost[static_cast<std::size_t>(i)] =
      cp.w1 * rollover + cp.w2 * airtime + cp.w3 * bump + task;
}

}  // namespace

void evaluate_batch(SampleBatch& batch, const PlanarState& start, const Control& prev,
                    const ElevationMap& map, const PlannerSettings& settings, ThreadPool* pool) {
  auto work = [&](std::size_t begin, std::size_t end) {
    Scratch scratch(batch.horizon);
    for (std::size_t i = begin; i < end; ++i) {
      evaluate_sample(batch, static_cast<int>(i), start, prev, map, settings, scratch);
    }
  };
  if (pool) {
    pool->parallel_for(static_cast<std::size_t>(batch.n), work);
  } else {
    work(0, static_cast<std::size_t>(batch.n));
  }
}

std::vector<double> mppi_weights(std::span<const double> costs, double lambda) {
  double min_cost = std::numeric_limits<double>::infinity();
  for (double c : costs) {
    if (std::isfinite(c)) min_cost = std::min(min_cost, c);
  }
  if (!std::isfinite(min_cost)) throw DegenerateBatch("no sample has a finite cost");
  std::vector<double> w(costs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (std::isfinite(costs[i])) {
      w[i] = std::exp(-(costs[i] - min_cost) / lambda);
      sum += w[i];
    }
  }
  for (double& wi : w) wi /= sum;
  return w;
}

UpdateResult mppi_update(const SampleBatch& batch, double lambda, const Control& prev,
                         const FeasibilityLimits& limits) {
  if (batch.n < 1) throw DegenerateBatch("empty batch");
  UpdateResult out;
  out.weights = mppi_weights(batch.cost, lambda);
  std::vector<Control> mean(static_cast<std::size_t>(batch.horizon));
  for (int i = 0; i < batch.n; ++i) {
    const double w = out.weights[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const auto row = batch.processed_row(i);
    for (int h = 0; h < batch.horizon; ++h) {
      mean[static_cast<std::size_t>(h)].v += w * row[static_cast<std::size_t>(h)].v;
      mean[static_cast<std::size_t>(h)].kappa += w * row[static_cast<std::size_t>(h)].kappa;
    }
  }
  out.nominal.controls = process_feasible(mean, prev, limits);
  out.command = out.nominal.controls.front();
  return out;
}

NominalSequence shift(const NominalSequence& nominal) {
  if (nominal.controls.size() < 2) throw InvalidSpec("shift needs a horizon of at least 2");
  NominalSequence out;
  out.controls.assign(nominal.controls.begin() + 1, nominal.controls.end());
  out.controls.push_back(nominal.controls.back());
  return out;
}

Planner::Planner(PlannerSettings settings, int threads)
    : settings_(std::move(settings)), pool_(std::make_unique<ThreadPool>(threads)) {
  settings_.validate();
  nominal_.controls.assign(static_cast<std::size_t>(settings_.mppi.horizon), Control{});
  batch_.resize(settings_.mppi.samples(), settings_.mppi.horizon);
}

Planner::~Planner() = default;

int Planner::threads() const noexcept { return pool_->size(); }

void Planner::set_nominal(NominalSequence nominal) {
  if (static_cast<int>(nominal.controls.size()) != settings_.mppi.horizon) {
    throw InvalidSpec("nominal length does not match the horizon");
  }
  nominal_ = std::move(nominal);
}

PlanResult Planner::plan_step(const PlanarState& measured, const DelayConfig& delay,
                              const ElevationMap& map) {
  const MppiConfig& cfg = settings_.mppi;
  const PlanarState projected = project_state(measured, delay, cfg.dt);

  sample_raw(nominal_, cfg, iteration_, batch_);
  evaluate_batch(batch_, projected, last_command_, map, settings_, pool_.get());
  UpdateResult update = mppi_update(batch_, cfg.lambda, last_command_, settings_.limits);

  PlanResult result;
  result.command = update.command;
  result.nominal = shift(update.nominal);

  PlanDiagnostics& d = result.diagnostics;
  d.projected = projected;
  d.family_best_cost.fill(std::numeric_limits<double>::infinity());
  double sum = 0.0;
  double sum_w2 = 0.0;
  for (int i = 0; i < batch_.n; ++i) {
    const double c = batch_.cost[static_cast<std::size_t>(i)];
    auto& best = d.family_best_cost[static_cast<std::size_t>(batch_.family[static_cast<std::size_t>(i)])];
    best = std::min(best, c);
    sum += c;
    const double w = update.weights[static_cast<std::size_t>(i)];
    sum_w2 += w * w;
    if (d.best_index < 0 || c < batch_.cost[static_cast<std::size_t>(d.best_index)]) {
      d.best_index = i;
    }
  }
  d.min_cost = batch_.cost[static_cast<std::size_t>(d.best_index)];
  d.mean_cost = sum / batch_.n;
  d.effective_samples = 1.0 / sum_w2;
  d.best_family = batch_.family[static_cast<std::size_t>(d.best_index)];
  const auto rr = batch_.rr_row(d.best_index);
  const auto tau = batch_.tau_row(d.best_index);
  const auto states = batch_.rollout_row(d.best_index);
  d.best_rr.assign(rr.begin(), rr.end());
  d.best_tau.assign(tau.begin(), tau.end());
  d.best_rollout.assign(states.begin(), states.end());

  last_command_ = result.command;
  nominal_ = result.nominal;
  ++iteration_;
  return result;
}

}  // namespace terra
