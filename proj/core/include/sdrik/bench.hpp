#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdrik/recovery.hpp"

namespace sdrik {

/// Goal-pose sampler: uniform translation box and uniform Euler angles
/// composed as Rz(a) Ry(b) Rx(c). Uniform Euler sampling is deliberately not
/// Haar-uniform on SO(3); it mirrors the evaluation protocol.
struct GoalSampler {
  Vec3 t_lo = Vec3::Zero();
  Vec3 t_hi = Vec3::Zero();
  Vec3 euler_lo = Vec3::Zero();  // (a, b, c) lower bounds
  Vec3 euler_hi = Vec3::Zero();

  Pose sample(Rng& rng) const;
};

struct BatchSpec {
  std::string robot_file;
  std::optional<GoalSampler> sampler;  // absent: FK round-trip goals
  int count = 1;
  std::uint64_t seed = 0;
  AssemblyOptions aopts;
  RankMinConfig cfg;
  int jobs = 0;  // 0: hardware concurrency
};

struct BatchItem {
  int index = 0;
  GoalSpec goal;
  SolveReport report;
  bool harness_error = false;
  std::string error_text;
};

struct BatchSummary {
  int count = 0;
  int rank_one = 0;
  int stalled = 0;
  int infeasible = 0;
  int failed = 0;
  int harness_errors = 0;
  double success_rate = 0.0;
  double mean_err_R = 0.0;   // over rank-one solves
  double mean_err_T = 0.0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  double max_rank_gap = 0.0;
  double max_so3_distance = 0.0;
};

/// Conservative upper bound on the distance from any base to any link pose,
/// valid over the whole relaxed set (columns recovered from a lifted block
/// have norm at most sqrt(3)).
double reach_bound(const RobotGraph& g);

/// FK poses of uniformly sampled configurations: feasible by construction.
std::vector<GoalSpec> roundtrip_goals(const RobotGraph& g, int n, std::uint64_t seed);

/// Round-trip goals translated beyond the relaxed reach bound.
std::vector<GoalSpec> out_of_reach_goals(const RobotGraph& g, int n, std::uint64_t seed,
                                         double margin = 2.0);

std::vector<GoalSpec> sampled_goals(const GoalSampler& sampler, int n, std::uint64_t seed);

/// Solve every goal in a bounded worker pool. Items are independent; a
/// failure in one item never alters another.
std::vector<BatchItem> run_batch(const RobotGraph& g, const std::vector<GoalSpec>& goals,
                                 const RankMinConfig& cfg, const AssemblyOptions& aopts,
                                 int jobs = 0);

BatchSummary summarize(const std::vector<BatchItem>& items);

/// Per-item rows; timing columns are the only nondeterministic fields.
void write_batch_csv(std::ostream& os, const std::vector<BatchItem>& items);
void write_summary_csv(std::ostream& os, const BatchSummary& s);

/// Feasibility verdict of the stationarity-augmented relaxation.
struct CertifyResult {
  bool feasible = false;
  bool certified_infeasible = false;
  SolveStatus solver_status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double seconds = 0.0;
};

CertifyResult certify(const RobotGraph& g, const GoalSpec& goal, AssemblyOptions aopts = {},
                      SolveSettings settings = {});

/// One Stewart-platform solve compared against the analytic leg lengths at
/// both the goal pose and the achieved pose.
struct StewartCase {
  GoalSpec goal;
  SolveReport report;
  std::vector<double> recovered_lengths;        // from the solved extensions
  std::vector<double> oracle_at_goal;
  std::vector<double> oracle_at_achieved;
  double max_error_vs_achieved = 0.0;
  double mean_error_vs_achieved = 0.0;
};

StewartCase stewart_case(const RobotGraph& g, const GoalSpec& goal, const RankMinConfig& cfg,
                         const AssemblyOptions& aopts);

void write_stewart_csv(std::ostream& os, const std::vector<StewartCase>& cases);

}  // namespace sdrik
