#pragma once

// Geometric power/spectrum assignment: the six GP formulations built over a
// routed and ordered request set, extraction of physical allocations, and the
// formulation size accounting.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eon/gp.hpp"
#include "eon/model.hpp"
#include "eon/physics.hpp"
#include "eon/rto.hpp"

namespace eon::gpsa {

using Pair = std::pair<int, int>;

struct PsaInstance {
  std::vector<double> rates_bps;               // R_q
  std::vector<int> spans;                      // N_q
  std::vector<std::vector<int>> shared_spans;  // N_{q,i}
  std::vector<int> order;                      // request indices by global rank
  std::vector<std::vector<int>> channel_order;  // per link, by rank
  DerivedConstants coeffs;
  double guard_hz = 20e9;
  double bandwidth_hz = 2e12;
  double min_margin = 1.0;
  GoalWeights weights;
  bool clamp_c = true;
  bool lower_edge = true;
  /// Ordered pairs (q, i), q != i, with N_{q,i} != 0.
  std::vector<Pair> pairs;

  std::size_t size() const { return rates_bps.size(); }
  std::size_t link_count() const { return channel_order.size(); }
  physics::LinkNoiseContext noise_context() const { return {spans, shared_spans, coeffs}; }

  /// Fills `pairs` from the shared-span matrix.
  void index_pairs();
  /// Throws InvalidArgument on an inconsistent channel order or empty request set.
  void check() const;
};

PsaInstance make_psa_instance(const NetworkInstance& inst, const rto::RoutingSolution& routing,
                              const ScenarioConfig& cfg);

/// Variable ids of a built program.
struct VariableMap {
  std::vector<VarId> power, frequency, efficiency, margin, aux_t;
  VarId tau = -1;
  std::map<Pair, VarId> distance;
  /// Constraint index of each request's QoS row.
  std::vector<std::size_t> qos_row;
};

/// Row and variable counts of one formulation.
struct SizeReport {
  Formulation formulation = Formulation::gpsa1;
  std::size_t requests = 0;
  std::size_t links = 0;
  /// Instantiated: |P| + 4|Q| + 1 (+|Q| for t).
  std::size_t variables = 0;
  /// Instantiated core rows; optional clamp / lower-edge rows excluded.
  std::size_t constraints = 0;
  std::size_t optional_constraints = 0;
  /// Accounting with |Q|^2 distance variables and |Q||L| per-link rows.
  long long table_variables = 0;
  long long table_constraints = 0;
};

struct BuiltProgram {
  Formulation formulation = Formulation::gpsa1;
  GpProgram program;
  VariableMap vars;
  SizeReport sizes;
};

/// Builds the relaxed (continuous c) program. Throws InvalidArgument on an
/// empty or inconsistent instance.
BuiltProgram build(const PsaInstance& inst, Formulation f);

/// (1 + k5 c)^n expanded into n + 1 monomials in the variable `c`.
Posynomial binomial_expansion(VarId c, double k5, int n);

struct FormulationCount {
  std::string name;
  long long variables = 0;
  long long constraints = 0;
};

/// Table-style accounting of the MINLP reference: (4|Q|+1, 3|Q|+|Q||L|+1).
FormulationCount count_minlp(std::size_t requests, std::size_t links);
FormulationCount count_minlp(const PsaInstance& inst);
FormulationCount count_formulation(Formulation f, std::size_t requests, std::size_t links);
/// Routing program sizes: (|Q||L|, 2|Q| + |Q||V|).
FormulationCount count_routing(RtoMethod m, std::size_t requests, std::size_t links, std::size_t nodes);
/// MINLPPSA and GPSA1..GPSA6, in that order.
std::vector<FormulationCount> count_table(std::size_t requests, std::size_t links);

struct RequestAllocation {
  double power = 0.0;       // W
  double frequency = 0.0;   // Hz
  double efficiency = 0.0;  // bit/s/Hz
  double margin = 0.0;
  double bandwidth = 0.0;   // Hz, R/c
  std::optional<double> aux_t;
};

struct Allocation {
  std::vector<RequestAllocation> requests;
  double tau = 0.0;
  std::map<Pair, double> distances;
  double objective = 0.0;
  std::vector<std::string> violations;

  std::vector<physics::ChannelState> channels() const;
};

/// Maps a solution back to physical quantities and records invariant
/// breaches beyond `tol` (relative to the band) in `violations`.
Allocation extract(const GpSolution& sol, const BuiltProgram& built, const PsaInstance& inst, double tol = 1e-6);

/// K1 tau + K2 sum p + K3 sum 1/m + K4 sum_P 1/d.
double goal_value(const Allocation& a, const PsaInstance& inst);

}  // namespace eon::gpsa
