#pragma once

// Exact-model validation of allocations, the exhaustive spectral-efficiency
// oracle, and the margin sweep.

#include <iosfwd>
#include <string>
#include <vector>

#include "eon/gpsa.hpp"
#include "eon/heuristic.hpp"
#include "eon/model.hpp"
#include "eon/physics.hpp"
#include "eon/rto.hpp"

namespace eon::validate {

struct RequestReport {
  int request = 0;
  int spans = 0;
  double rate_bps = 0.0;
  double power = 0.0;
  double frequency = 0.0;
  double efficiency = 0.0;
  double bandwidth = 0.0;
  double margin = 0.0;
  physics::NoiseBreakdown noise;  // exact model; zero when undefined
  double osnr_exact = 0.0;        // NaN when the exact model is undefined
  double osnr_model = 0.0;        // approximation of the formulation's order
  bool model_out_of_range = false;
  double required = 0.0;          // min_margin * Theta(c)
  double slack = 0.0;             // osnr_exact / required
  double approx_error = 0.0;      // |osnr_exact - osnr_model| / osnr_exact
};

struct Violation {
  std::string kind;  // overlap, band, lower-edge, xci-domain, qos
  int link = -1;
  int first = -1;
  int second = -1;
  double amount = 0.0;  // size of the breach in the natural unit (Hz or ratio)
  std::string message;
};

struct ValidationReport {
  int xci_order = 1;
  double min_margin = 1.0;
  std::vector<RequestReport> requests;
  double total_power = 0.0;
  double total_noise = 0.0;
  double mean_rate_per_resource = 0.0;  // mean R / (p * Delta), 1/(W s)
  double tau = 0.0;
  long long span_usage = 0;
  double min_slack = 0.0;
  double mean_approx_error = 0.0;
  double max_approx_error = 0.0;
  std::vector<Violation> violations;

  bool admissible() const { return violations.empty(); }
};

struct ValidateOptions {
  int xci_order = 1;
  double min_margin = 1.0;
  /// Required OSNR for efficiencies that are not tabulated.
  physics::ThetaFit untabulated_fit = physics::ThetaFit::fit1;
  /// Allowed relative shortfall of exact OSNR below the requirement.
  double qos_tolerance = 0.05;
  /// Geometric slack (Hz) before overlap, band or lower-edge breaches count.
  double spectral_tolerance_hz = 1.0;
};

ValidateOptions options_for(Formulation f, double min_margin);

/// Never throws on violations; records them. Throws InvalidArgument when the
/// allocation does not match the routing.
ValidationReport validate(const gpsa::Allocation& a, const rto::RoutingSolution& routing, const NetworkInstance& inst,
                          const ValidateOptions& options);

/// Per-request CSV with a header row.
void write_requests_csv(std::ostream& out, const ValidationReport& r);

struct BruteForceResult {
  gpsa::Allocation allocation;
  std::vector<double> efficiencies;
  double objective = 0.0;
  int solves = 0;
  int feasible = 0;
};

/// Exhaustive search over all table efficiencies, each combination solved as
/// a continuous GP. Requires |Q| <= 4; throws InfeasibleError when no
/// combination is feasible.
BruteForceResult brute_force_psa(const gpsa::PsaInstance& inst, Formulation f, ThetaOnFix theta,
                                 const SolverOptions& solver = {});

struct MarginPoint {
  double margin = 0.0;
  ValidationReport report;
  heuristic::HeuristicTrace trace;
};

/// Runs the planner once per margin on the same routed request set.
std::vector<MarginPoint> sweep_margin(const NetworkInstance& inst, const ScenarioConfig& cfg,
                                      const std::vector<double>& margins);

}  // namespace eon::validate
