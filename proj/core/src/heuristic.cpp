#include "eon/heuristic.hpp"

#include <cmath>

#include "eon/physics.hpp"

namespace eon::heuristic {

namespace {

// Closed-neighborhood slack absorbing solver resolution around table values.
constexpr double kRoundTol = 1e-6;

}  // namespace

StageError::StageError(std::string stage, GpStatus status, const std::string& detail, HeuristicTrace trace)
    : Error(stage + ": " + to_string(status) + (detail.empty() ? "" : " (" + detail + ")")),
      stage_(std::move(stage)),
      status_(status),
      trace_(std::move(trace)) {}

std::optional<double> round_to_table(double c, double neighborhood, const ModulationTable& table) {
  for (const auto& e : table.entries()) {
    if (std::abs(c - e.efficiency) <= neighborhood + kRoundTol) return e.efficiency;
  }
  return std::nullopt;
}

void fix_efficiency(GpProgram& program, const gpsa::BuiltProgram& built, std::size_t q, double value,
                    ThetaOnFix theta) {
  program = fix_variable(program, built.vars.efficiency.at(q), value);
  if (theta == ThetaOnFix::table) {
    const double fit = physics::required_osnr(value, physics::theta_fit(built.formulation));
    const double exact = physics::required_osnr(value, physics::ThetaFit::table);
    program.scale_constraint(built.vars.qos_row.at(q), exact / fit);
  }
}

Stage2Result run_stage2(const gpsa::PsaInstance& inst, const Stage2Options& options) {
  if (!(options.precision > 0.0)) throw InvalidArgument("rounding precision must be positive");
  Stage2Result out;
  out.built = gpsa::build(inst, options.formulation);
  const auto& built = out.built;
  const auto& table = ModulationTable::standard();
  GpProgram program = built.program;
  HeuristicTrace& trace = out.trace;
  const std::size_t n = inst.size();
  std::vector<bool> fixed(n, false);
  std::size_t fixed_count = 0;

  GpSolution sol = solve(program, options.solver);
  ++trace.solves;
  if (!sol.optimal()) throw StageError("relaxed solve", sol.status, sol.message, trace);
  trace.relaxed_objective = sol.objective;

  auto apply = [&](const IterationRecord& rec) {
    GpProgram next = program;
    for (const auto& f : rec.fixes) {
      fix_efficiency(next, built, static_cast<std::size_t>(f.request), f.rounded, options.theta_on_fix);
    }
    return next;
  };

  while (fixed_count < n) {
    IterationRecord rec;
    rec.relaxed_objective = sol.objective;
    rec.solver_iterations = sol.iterations;
    for (int k = 0; rec.fixes.empty(); ++k) {
      const double neighborhood = k * options.precision;
      if (neighborhood > table.max_efficiency()) {
        throw StageError("rounding", GpStatus::numerical_failure, "no efficiency within reach of the table", trace);
      }
      for (int q : inst.order) {
        const auto uq = static_cast<std::size_t>(q);
        if (fixed[uq]) continue;
        const double c = sol.value(built.vars.efficiency[uq]);
        if (const auto v = round_to_table(c, neighborhood, table)) rec.fixes.push_back({q, c, *v, neighborhood});
      }
    }

    GpProgram next = apply(rec);
    GpSolution next_sol = solve(next, options.solver);
    ++trace.solves;
    if (next_sol.status == GpStatus::infeasible && options.lower_on_infeasible) {
      bool changed = false;
      for (auto& f : rec.fixes) {
        if (f.rounded <= f.relaxed) continue;
        const auto& e = table.entries();
        double lower = e.front().efficiency;
        for (const auto& fmt : e) {
          if (fmt.efficiency <= f.relaxed + kRoundTol) lower = fmt.efficiency;
        }
        if (lower < f.rounded) {
          f.rounded = lower;
          f.lowered = true;
          changed = true;
        }
      }
      if (changed) {
        next = apply(rec);
        next_sol = solve(next, options.solver);
        ++trace.solves;
      }
    }
    for (const auto& f : rec.fixes) fixed[static_cast<std::size_t>(f.request)] = true;
    fixed_count += rec.fixes.size();
    trace.iterations.push_back(std::move(rec));
    if (!next_sol.optimal()) {
      throw StageError("solve after fixing round " + std::to_string(trace.iterations.size()), next_sol.status,
                       next_sol.message, trace);
    }
    program = std::move(next);
    sol = std::move(next_sol);
  }

  trace.final_objective = sol.objective;
  trace.final_solver_iterations = sol.iterations;
  out.allocation = gpsa::extract(sol, built, inst);
  out.solution = std::move(sol);
  out.final_program = std::move(program);
  return out;
}

std::vector<ConnectionRequest> prepare_requests(const NetworkInstance& inst, const ScenarioConfig& cfg) {
  auto all = partition_traffic(inst.demands, inst.constants.capacity_gbps);
  return select_requests(std::move(all), cfg.max_requests, cfg.seed);
}

RunResult run_routed(const NetworkInstance& inst, rto::RoutingSolution routing, const ScenarioConfig& cfg) {
  RunResult r;
  r.routing = std::move(routing);
  r.psa = gpsa::make_psa_instance(inst, r.routing, cfg);
  Stage2Options o;
  o.formulation = cfg.gpsa;
  o.precision = inst.constants.precision;
  o.theta_on_fix = cfg.theta_on_fix;
  o.solver = cfg.solver;
  r.stage2 = run_stage2(r.psa, o);
  return r;
}

RunResult run(const NetworkInstance& inst, const ScenarioConfig& cfg) {
  cfg.validate();
  const auto requests = prepare_requests(inst, cfg);
  if (requests.empty()) throw InvalidArgument("no connection requests to plan");
  rto::SearchOptions so;
  so.k_paths = cfg.k_paths;
  so.restarts = cfg.restarts;
  so.seed = cfg.seed;
  return run_routed(inst, rto::route(inst, requests, cfg.rto, so), cfg);
}

}  // namespace eon::heuristic
