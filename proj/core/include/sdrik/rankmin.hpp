#pragma once

#include <iosfwd>

#include "sdrik/assembly.hpp"
#include "sdrik/solver.hpp"

namespace sdrik {

/// c+ = 1 - (1-c)^(p+1): the contraction factor moves toward 1 whenever the
/// relaxed update becomes infeasible.
double adapt_c(double c, int p);

/// Gradient of the largest eigenvalue: v1 v1^T acting through the Frobenius
/// inner product. When the top eigenvalue is within gap_tol of the second,
/// `degenerate` is set and an arbitrary top eigenvector is used (subgradient
/// of the convex lambda_1).
MatX eig_gradient(const MatX& M, double gap_tol, bool* degenerate = nullptr);

enum class RankMinVariant { Auto, EigenMax, CostRelax };
enum class RunStatus { RankOne, Stalled, Infeasible, Failed };

const char* to_string(RankMinVariant v);
const char* to_string(RunStatus s);

struct RestartConfig {
  double delta = 1e-2;
  int max_attempts = 10;
};

struct RankMinConfig {
  double eps_rank = 1e-3;    // rank tolerance on lambda_1 vs the trace constant
  double eps_step = 1e-7;    // step-norm tolerance
  int max_iterations = 200;  // per rank-minimization cycle
  RankMinVariant variant = RankMinVariant::Auto;
  double c0 = 0.2;           // initial contraction (0.05 suits quaternion mode)
  bool adaptive_c = true;
  double gap_tol = 1e-8;
  double f_zero_tol = 1e-7;  // Auto picks EigenMax when the relaxed optimum is below
  RestartConfig restart;     // max_attempts = 0 disables restarts
  SolveSettings solver;
  std::uint64_t seed = 0;    // seeds the restart directions
};

/// One row per iteration and block: the eigenvalue trajectory of a run.
struct IterationRecord {
  int k = 0;
  char phase = 'i';  // 'i' initial solve, 'e' eigenmax, 'c' costrelax, 'r' restart
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  double f = 0.0;
  double step_norm = 0.0;
  double c = 0.0;
};

struct IterationTrace {
  std::vector<std::string> block_names;
  std::vector<IterationRecord> records;
  /// columns: k, phase, block, lambda1, lambda2, f, step_norm, c
  void to_csv(std::ostream& os) const;
};

struct RunResult {
  RunStatus status = RunStatus::Failed;
  LiftedState state;
  VecX x;
  IterationTrace trace;
  int iterations = 0;      // accepted update steps
  int restarts_used = 0;
  double f_initial = 0.0;
  double f_final = 0.0;
  double c_final = 0.0;
  RankMinVariant variant_used = RankMinVariant::Auto;
  bool infeasibility_certified = false;
  double seconds = 0.0;
  int solver_iterations = 0;  // summed interior-point iterations
};

/// The update that raises the sum of top eigenvalues at frozen cost
/// (requires the stationarity slice to be nonempty). `work` must hold the
/// relaxed rows plus stationarity rows; its objective is replaced.
SolverResult step_eigenmax(ConicProgram& work, const VecX& x_prev,
                           const std::vector<MatX>& gradients, const SolveSettings& st);

/// The cost-minimizing update under the eigenvalue-decrease inequalities with
/// contraction c. `base` must hold the relaxed rows and the quadratic cost.
SolverResult step_costrelax(const ConicProgram& base, const VecX& x_prev,
                            const std::vector<MatX>& gradients,
                            const std::vector<double>& lambda1, double c,
                            const SolveSettings& st);

/// Move a stalled iterate to another boundary-adjacent point of the relaxed
/// set: solve the rows with a seeded random linear objective to get a feasible
/// target, then walk in delta-steps along the segment (and beyond) until the
/// next step would leave the set. Returns the last in-set point.
VecX restart(const ConicProgram& rows_only, const VecX& x, double delta, Rng& rng,
             const SolveSettings& st, bool* ok);

/// The full iterative solver: relaxed solve, rank minimization with the
/// selected update variant, optional restart cycles.
RunResult run(const RobotGraph& g, const GoalSpec& goal, const RankMinConfig& cfg = {},
              AssemblyOptions aopts = {});

/// Same, reusing an assembled relaxation (rows + cost already in place).
/// With a warm start the initial relaxed solve is skipped and iteration
/// resumes from the given point (which must lie in the relaxed set).
RunResult run(const Relaxation& rel, const RankMinConfig& cfg = {},
              const VecX* warm_start = nullptr);

}  // namespace sdrik
