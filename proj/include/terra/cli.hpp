#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "terra/sim.hpp"

namespace terra {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitEpisode = 4,
};

/// Entry point of the `terra` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Sets the four family counts for a total of `n` samples, keeping the
/// default proportions (conventional takes the remainder).
void set_sample_count(MppiConfig& config, int n);

struct BenchReport {
  int iterations = 0;
  int samples = 0;
  int horizon = 0;
  int threads = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
  double throughput = 0.0;  ///< sample-steps per second at the median time
  double cost_checksum = 0.0;  ///< sum of per-iteration minimum costs
  std::vector<double> times_ms;
};

/// Times repeated plan_step calls from the task's start pose on its terrain.
BenchReport bench_planner(const TaskSpec& spec, int iterations, int threads);

/// Worker count after applying the TERRA_THREADS cap; 0 requests the default.
int resolve_threads(int requested);

struct HeadingBin {
  double lo_deg = 0.0;
  double hi_deg = 0.0;
  std::int64_t count = 0;
  double mean_speed = 0.0;
  double max_speed = 0.0;
  double mean_rr = 0.0;
  double max_rr = 0.0;
};

/// 24 bins of 15 degrees over heading in [0, 360).
std::vector<HeadingBin> heading_bins(const TrajectoryLog& log);

}  // namespace terra
