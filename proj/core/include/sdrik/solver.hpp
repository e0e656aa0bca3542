#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdrik/program.hpp"

namespace sdrik {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveSettings {
  int max_iterations = 200;
  double tol = 1e-8;        // feasibility tolerance
  double tol_gap_abs = 5e-9;
  double tol_gap_rel = 1e-7;
  int verbosity = 0;
};

struct SolverResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  VecX x;                          // primal point, valid on Optimal
  std::vector<MatX> block_values;  // per program block, re-symmetrized
  double objective = 0.0;          // objective re-evaluated at x
  double internal_objective = 0.0; // objective as seen by the conic form
  int iterations = 0;
  double wall_time = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  bool has_dual_certificate = false;  // set when Infeasible is certified
};

/// Boundary to a convex conic solver handling PSD blocks, linear rows and
/// quadratic objectives. Implementations must report Infeasible only with
/// dual (Farkas) evidence.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual SolverResult solve(const ConicProgram& prog, const SolveSettings& settings) = 0;
};

/// Default backend: a homogeneous self-dual embedding interior-point method
/// with Nesterov-Todd scaling over the nonnegative orthant, second-order
/// cones and small PSD cones. Quadratic objectives are reformulated as an
/// epigraph over a second-order cone, which leaves the minimizer unchanged.
std::unique_ptr<ConicBackend> make_default_backend();

/// Solve with the default backend.
SolverResult solve(const ConicProgram& prog, const SolveSettings& settings = {});

}  // namespace sdrik
