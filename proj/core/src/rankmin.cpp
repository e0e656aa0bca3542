#include "sdrik/rankmin.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "sdrik/errors.hpp"

namespace sdrik {

const char* to_string(RankMinVariant v) {
  switch (v) {
    case RankMinVariant::Auto: return "auto";
    case RankMinVariant::EigenMax: return "eigenmax";
    case RankMinVariant::CostRelax: return "costrelax";
  }
  return "?";
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::RankOne: return "rank_one";
    case RunStatus::Stalled: return "stalled";
    case RunStatus::Infeasible: return "infeasible";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

double adapt_c(double c, int p) { return 1.0 - std::pow(1.0 - c, p + 1); }

MatX eig_gradient(const MatX& M, double gap_tol, bool* degenerate) {
  Eigen::SelfAdjointEigenSolver<MatX> es(M);
  int last = static_cast<int>(M.rows()) - 1;
  if (degenerate) {
    *degenerate = es.eigenvalues()[last] - es.eigenvalues()[last - 1] <= gap_tol;
  }
  VecX v = es.eigenvectors().col(last);
  return v * v.transpose();
}

void IterationTrace::to_csv(std::ostream& os) const {
  os << "k,phase,block,lambda1,lambda2,f,step_norm,c\n";
  for (const auto& rec : records) {
    for (size_t b = 0; b < block_names.size(); ++b) {
      os << rec.k << ',' << rec.phase << ',' << block_names[b] << ',';
      os.precision(17);
      os << rec.lambda1[b] << ',' << rec.lambda2[b] << ',' << rec.f << ',' << rec.step_norm
         << ',' << rec.c << '\n';
    }
  }
}

SolverResult step_eigenmax(ConicProgram& work, const VecX& x_prev,
                           const std::vector<MatX>& gradients, const SolveSettings& st) {
  // maximize sum_b <Y_b, v_b v_b'>: linear in the decision vector
  VecX c = VecX::Zero(work.num_vars());
  for (int b = 0; b < static_cast<int>(work.blocks().size()); ++b) {
    const PsdBlock& blk = work.block(b);
    c.segment(blk.offset, blk.dim) = -svec(gradients[b]);
  }
  work.set_linear_objective(std::move(c));
  (void)x_prev;  // the subproblem constrains the new point directly
  return solve(work, st);
}

SolverResult step_costrelax(const ConicProgram& base, const VecX& x_prev,
                            const std::vector<MatX>& gradients,
                            const std::vector<double>& lambda1, double c,
                            const SolveSettings& st) {
  ConicProgram work = base;
  // one decrease row per block family:
  //   sum_b <vv', Y_b^new> >= sum_b [ lambda1_b + (1-c)(T_b - lambda1_b) ]
  for (BlockRole role : {BlockRole::Rotation, BlockRole::Prismatic}) {
    LinExpr row;  // assembled as <= 0
    double rhs = 0.0;
    bool any = false;
    for (int b = 0; b < static_cast<int>(work.blocks().size()); ++b) {
      const PsdBlock& blk = work.block(b);
      if (blk.role != role) continue;
      any = true;
      VecX grad = svec(gradients[b]);
      for (int i = 0; i < blk.dim; ++i) {
        if (grad[i] != 0.0) row.terms.emplace_back(blk.offset + i, -grad[i]);
      }
      rhs += lambda1[b] + (1.0 - c) * (blk.trace_target - lambda1[b]);
    }
    if (!any) continue;
    row.constant = rhs;
    work.add_ineq(row);
  }
  (void)x_prev;
  return solve(work, st);
}

VecX restart(const ConicProgram& rows_only, const VecX& x, double delta, Rng& rng,
             const SolveSettings& st, bool* ok) {
  *ok = false;
  ConicProgram work = rows_only;
  VecX c = VecX::Zero(work.num_vars());
  for (int b = 0; b < static_cast<int>(work.blocks().size()); ++b) {
    const PsdBlock& blk = work.block(b);
    MatX G(blk.n, blk.n);
    for (int i = 0; i < blk.n; ++i)
      for (int j = 0; j < blk.n; ++j) G(i, j) = rng.normal();
    c.segment(blk.offset, blk.dim) = svec(0.5 * (G + G.transpose()));
  }
  work.set_linear_objective(std::move(c));
  SolverResult res = solve(work, st);
  if (res.status != SolveStatus::Optimal) return x;
  VecX step = delta * (res.x - x);
  if (step.norm() < 1e-14) return x;
  VecX cur = x;
  const int max_steps = static_cast<int>(std::ceil(1.0 / delta)) + 64;
  for (int i = 0; i < max_steps; ++i) {
    VecX nxt = cur + step;
    if (!Relaxation::program_member(rows_only, nxt, 1e-8)) break;
    cur = nxt;
  }
  *ok = (cur - x).norm() > 1e-12;
  return cur;
}

namespace {

struct BlockSpectra {
  std::vector<double> lambda1, lambda2;
  std::vector<MatX> gradients;
  bool rank_done = true;
};

double rank_eps(const PsdBlock& blk, double eps_rank) {
  // quaternion blocks carry trace 1; scale the tolerance accordingly
  return blk.n == 4 ? eps_rank / 3.0 : eps_rank;
}

BlockSpectra spectra(const ConicProgram& prog, const VecX& x, double gap_tol, double eps_rank) {
  BlockSpectra sp;
  for (int b = 0; b < static_cast<int>(prog.blocks().size()); ++b) {
    const PsdBlock& blk = prog.block(b);
    MatX M = prog.block_value(x, b);
    Eigen::SelfAdjointEigenSolver<MatX> es(M);
    int last = blk.n - 1;
    double l1 = es.eigenvalues()[last];
    double l2 = es.eigenvalues()[last - 1];
    sp.lambda1.push_back(l1);
    sp.lambda2.push_back(l2);
    VecX v = es.eigenvectors().col(last);
    sp.gradients.push_back(v * v.transpose());
    if (l1 < blk.trace_target - rank_eps(blk, eps_rank)) sp.rank_done = false;
  }
  (void)gap_tol;
  return sp;
}

}  // namespace

RunResult run(const Relaxation& rel, const RankMinConfig& cfg, const VecX* warm_start) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  const ConicProgram& cost_prog = rel.program();
  if (cost_prog.objective_kind() != ConicProgram::ObjectiveKind::Quadratic) {
    throw ProgramError("run: the relaxation must carry the quadratic goal cost");
  }
  auto record = [&](int k, char phase, const VecX& x, double step_norm, double c,
                    IterationTrace& tr) {
    IterationRecord rec;
    rec.k = k;
    rec.phase = phase;
    rec.f = cost_prog.objective_value(x);
    rec.step_norm = step_norm;
    rec.c = c;
    for (int b = 0; b < static_cast<int>(cost_prog.blocks().size()); ++b) {
      Eigen::SelfAdjointEigenSolver<MatX> es(cost_prog.block_value(x, b), Eigen::EigenvaluesOnly);
      rec.lambda1.push_back(es.eigenvalues()[cost_prog.block(b).n - 1]);
      rec.lambda2.push_back(es.eigenvalues()[cost_prog.block(b).n - 2]);
    }
    tr.records.push_back(std::move(rec));
  };
  for (const auto& b : cost_prog.blocks()) out.trace.block_names.push_back(b.name);

  // initial relaxed solve (or the provided warm start)
  VecX x;
  if (warm_start) {
    x = *warm_start;
    out.f_initial = cost_prog.objective_value(x);
  } else {
    SolverResult res0 = solve(cost_prog, cfg.solver);
    out.solver_iterations += res0.iterations;
    if (res0.status == SolveStatus::Infeasible) {
      out.status = RunStatus::Infeasible;
      out.infeasibility_certified = res0.has_dual_certificate;
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return out;
    }
    if (res0.status != SolveStatus::Optimal) {
      out.status = RunStatus::Failed;
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return out;
    }
    x = res0.x;
    out.f_initial = res0.objective;
  }
  record(0, 'i', x, 0.0, 0.0, out.trace);

  RankMinVariant variant = cfg.variant;
  if (variant == RankMinVariant::Auto) {
    variant = out.f_initial <= cfg.f_zero_tol ? RankMinVariant::EigenMax
                                              : RankMinVariant::CostRelax;
  }
  out.variant_used = variant;

  // working programs
  ConicProgram rows_only = cost_prog;
  rows_only.clear_objective();
  ConicProgram eig_base;
  if (variant == RankMinVariant::EigenMax) {
    eig_base = cost_prog;
    assemble_stationarity(eig_base);  // pins grad f = 0 in every update
    eig_base.clear_objective();
  }

  double c = cfg.c0;
  int k_global = 0;
  bool polished = false;
  Rng restart_rng(Rng::substream(cfg.seed, 0x5e5));

  for (int cycle = 0; cycle <= cfg.restart.max_attempts; ++cycle) {
    bool stalled = false;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
      BlockSpectra sp = spectra(cost_prog, x, cfg.gap_tol, cfg.eps_rank);
      if (sp.rank_done) {
        // one terminal eigenvalue-maximization step: its stationarity rows
        // pin the cost at its minimum as equalities, so the final accuracy is
        // feasibility-limited instead of duality-gap-limited
        if (variant == RankMinVariant::EigenMax && !polished) {
          polished = true;
          ConicProgram work = eig_base;
          SolverResult fin = step_eigenmax(work, x, sp.gradients, cfg.solver);
          out.solver_iterations += fin.iterations;
          if (fin.status == SolveStatus::Optimal) {
            BlockSpectra sp2 = spectra(cost_prog, fin.x, cfg.gap_tol, cfg.eps_rank);
            if (sp2.rank_done) {
              ++k_global;
              record(k_global, 'e', fin.x, (fin.x - x).norm(), 0.0, out.trace);
              x = fin.x;
            }
          }
        }
        out.status = RunStatus::RankOne;
        break;
      }
      if (variant == RankMinVariant::EigenMax) polished = true;  // regular steps already pin it
      SolverResult step;
      char phase;
      if (variant == RankMinVariant::EigenMax) {
        phase = 'e';
        ConicProgram work = eig_base;
        step = step_eigenmax(work, x, sp.gradients, cfg.solver);
        out.solver_iterations += step.iterations;
        if (step.status == SolveStatus::Infeasible) {
          stalled = true;  // stationarity slice lost; restart from elsewhere
          break;
        }
      } else {
        phase = 'c';
        int p = 1;
        while (true) {
          step = step_costrelax(cost_prog, x, sp.gradients, sp.lambda1, c, cfg.solver);
          out.solver_iterations += step.iterations;
          if (step.status != SolveStatus::Infeasible) break;
          if (!cfg.adaptive_c || c > 1.0 - 1e-9) break;
          c = std::min(adapt_c(c, p), 1.0 - 1e-12);
          ++p;
        }
        if (step.status == SolveStatus::Infeasible) {
          stalled = true;
          break;
        }
      }
      if (step.status != SolveStatus::Optimal) {
        out.status = RunStatus::Failed;
        out.x = x;
        out.state = rel.unpack(x);
        out.f_final = cost_prog.objective_value(x);
        out.c_final = c;
        out.iterations = k_global;
        out.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
      }
      VecX x_new = step.x;
      double step_norm = (x_new - x).norm();
      ++k_global;
      record(k_global, phase, x_new, step_norm, variant == RankMinVariant::CostRelax ? c : 0.0,
             out.trace);
      x = x_new;
      if (step_norm < cfg.eps_step) {
        stalled = true;
        break;
      }
    }
    if (out.status == RunStatus::RankOne) break;
    if (!stalled) {
      // iteration budget exhausted
      BlockSpectra sp = spectra(cost_prog, x, cfg.gap_tol, cfg.eps_rank);
      if (sp.rank_done) out.status = RunStatus::RankOne;
      break;
    }
    // stalled: re-check, then restart if attempts remain
    BlockSpectra sp = spectra(cost_prog, x, cfg.gap_tol, cfg.eps_rank);
    if (sp.rank_done) {
      out.status = RunStatus::RankOne;
      break;
    }
    if (cycle == cfg.restart.max_attempts) break;
    bool ok = false;
    VecX x_restart = restart(rows_only, x, cfg.restart.delta, restart_rng, cfg.solver, &ok);
    if (!ok) break;
    ++out.restarts_used;
    ++k_global;
    record(k_global, 'r', x_restart, (x_restart - x).norm(), 0.0, out.trace);
    x = x_restart;
  }

  if (out.status != RunStatus::RankOne) out.status = RunStatus::Stalled;
  out.x = x;
  out.state = rel.unpack(x);
  out.f_final = cost_prog.objective_value(x);
  out.c_final = c;
  out.iterations = k_global;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult run(const RobotGraph& g, const GoalSpec& goal, const RankMinConfig& cfg,
              AssemblyOptions aopts) {
  Relaxation rel = assemble_relaxation(g, goal, aopts);
  return run(rel, cfg, nullptr);
}

}  // namespace sdrik
