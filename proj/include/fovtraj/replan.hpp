#pragma once

#include "fovtraj/distance_field.hpp"
#include "fovtraj/optimizer.hpp"
#include "fovtraj/retime.hpp"

#include <cstddef>
#include <ostream>
#include <vector>

namespace fovtraj {

struct ExecutionState {
  /// Number of samples of the active trajectory already consumed.
  std::size_t executed_samples = 0;
  double current_time = 0.0;         ///< s, on the dt grid
  double last_cycle_duration = 0.2;  ///< s; initial estimate before any cycle ran
};

struct ReplanConfig {
  OptimizerConfig optimizer = [] {
    OptimizerConfig c;
    c.max_iterations = 10;
    return c;
  }();
  double overhead = 1.1;  ///< splice lead time factor on the last cycle duration
  /// Relative objective decrease below which the old suffix is kept.
  double min_improvement = 1e-3;
};

struct ReplanResult {
  Trajectory merged;
  bool spliced = false;   ///< false when t_s is past the end (input returned)
  bool accepted = false;  ///< reoptimized suffix was merged
  std::size_t splice_index = 0;
  double splice_time = 0.0;
  Objective before;
  Objective after;
  int iterations = 0;
};

/// Index of the splice sample: ceil((t + overhead * last) / dt) on the grid.
std::size_t splice_index(const ExecutionState& state, double dt, double overhead);

/// One receding-horizon cycle: reoptimizes the suffix from the splice time
/// against `field` and merges it. Samples up to and including the splice
/// sample are copied bit-identically, as is the sample after it so the
/// finite-difference velocity at the splice is unchanged. The suffix is
/// replaced only if the objective improves by `min_improvement` or the
/// clearance or visibility violations shrink. Throws
/// InfeasibleEndpointError when the goal is no longer reachable.
ReplanResult replan_cycle(const ExecutionState& state, const Trajectory& trajectory,
                          const DistanceField& field, const ReplanConfig& config);

struct CycleRecord {
  int cycle = 0;
  double wall_time = 0.0;
  double splice_time = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double min_clearance = 0.0;
  bool accepted = false;
};

void write_cycle_log(std::ostream& os, const std::vector<CycleRecord>& log);

}  // namespace fovtraj
