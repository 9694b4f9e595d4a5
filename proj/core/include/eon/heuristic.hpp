#pragma once

// Two-stage planning: routing and ordering, then relax-round-fix over the
// spectral efficiencies of a GPSA formulation.

#include <optional>
#include <string>
#include <vector>

#include "eon/error.hpp"
#include "eon/gp.hpp"
#include "eon/gpsa.hpp"
#include "eon/model.hpp"
#include "eon/rto.hpp"

namespace eon::heuristic {

struct FixRecord {
  int request = 0;
  double relaxed = 0.0;
  double rounded = 0.0;
  double neighborhood = 0.0;
  /// Rounded up first, then lowered because the fixed program was infeasible.
  bool lowered = false;
};

struct IterationRecord {
  double relaxed_objective = 0.0;
  int solver_iterations = 0;
  std::vector<FixRecord> fixes;
};

struct HeuristicTrace {
  /// One record per fixing round; each fixes at least one request.
  std::vector<IterationRecord> iterations;
  /// Objective of the first (fully relaxed) solve, a lower bound for the
  /// integer program over the same fit.
  double relaxed_objective = 0.0;
  double final_objective = 0.0;
  int final_solver_iterations = 0;
  /// Total GP solves including the final one.
  int solves = 0;

  std::size_t outer_iterations() const { return iterations.size(); }
};

/// Error raised when a stage cannot continue; carries the partial trace.
class StageError : public Error {
 public:
  StageError(std::string stage, GpStatus status, const std::string& detail, HeuristicTrace trace);

  const std::string& stage() const { return stage_; }
  GpStatus status() const { return status_; }
  const HeuristicTrace& trace() const { return trace_; }

 private:
  std::string stage_;
  GpStatus status_;
  HeuristicTrace trace_;
};

struct Stage2Options {
  Formulation formulation = Formulation::gpsa1;
  double precision = 0.1;
  ThetaOnFix theta_on_fix = ThetaOnFix::table;
  /// When a round's fixes make the program infeasible, retry that round once
  /// with every upward rounding replaced by the next table value below.
  bool lower_on_infeasible = true;
  SolverOptions solver;
};

struct Stage2Result {
  gpsa::BuiltProgram built;
  /// Program of the final solve, every efficiency fixed.
  GpProgram final_program;
  GpSolution solution;
  gpsa::Allocation allocation;
  HeuristicTrace trace;
};

/// First table value within `neighborhood` of `c`, scanning ascending.
std::optional<double> round_to_table(double c, double neighborhood,
                                     const ModulationTable& table = ModulationTable::standard());

/// Folds c_q = `value` into `program` and, under ThetaOnFix::table, rescales
/// the request's QoS row so its required OSNR is the tabulated one.
void fix_efficiency(GpProgram& program, const gpsa::BuiltProgram& built, std::size_t q, double value,
                    ThetaOnFix theta);

/// Relax-round-fix. Throws StageError when a solve is not optimal.
Stage2Result run_stage2(const gpsa::PsaInstance& inst, const Stage2Options& options);

/// Partitions the demands and applies the configured request subset.
std::vector<ConnectionRequest> prepare_requests(const NetworkInstance& inst, const ScenarioConfig& cfg);

struct RunResult {
  rto::RoutingSolution routing;
  gpsa::PsaInstance psa;
  Stage2Result stage2;
};

RunResult run(const NetworkInstance& inst, const ScenarioConfig& cfg);

/// Stage 2 only, on an already routed and ordered request set.
RunResult run_routed(const NetworkInstance& inst, rto::RoutingSolution routing, const ScenarioConfig& cfg);

}  // namespace eon::heuristic
