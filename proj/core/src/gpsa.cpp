#include "eon/gpsa.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eon/error.hpp"

namespace eon::gpsa {

namespace ph = eon::physics;

void PsaInstance::index_pairs() {
  pairs.clear();
  const std::size_t n = size();
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      if (q != i && shared_spans[q][i] != 0) pairs.emplace_back(static_cast<int>(q), static_cast<int>(i));
    }
  }
}

void PsaInstance::check() const {
  const std::size_t n = size();
  if (n == 0) throw InvalidArgument("PSA instance has no requests");
  if (spans.size() != n || order.size() != n) throw InvalidArgument("PSA instance arrays disagree in size");
  noise_context().check();
  std::vector<int> rank(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const int q = order[k];
    if (q < 0 || static_cast<std::size_t>(q) >= n || rank[static_cast<std::size_t>(q)] >= 0) {
      throw InvalidArgument("global order is not a permutation");
    }
    rank[static_cast<std::size_t>(q)] = static_cast<int>(k);
  }
  for (std::size_t l = 0; l < channel_order.size(); ++l) {
    const auto& ch = channel_order[l];
    for (std::size_t j = 0; j < ch.size(); ++j) {
      if (ch[j] < 0 || static_cast<std::size_t>(ch[j]) >= n) throw InvalidArgument("channel order references unknown request");
      if (j > 0 && rank[static_cast<std::size_t>(ch[j - 1])] >= rank[static_cast<std::size_t>(ch[j])]) {
        throw InvalidArgument("channel order on link " + std::to_string(l) + " is inconsistent with the global order");
      }
    }
  }
  for (const auto& [q, i] : pairs) {
    if (shared_spans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] == 0) throw InvalidArgument("pair set disagrees with shared spans");
  }
}

PsaInstance make_psa_instance(const NetworkInstance& inst, const rto::RoutingSolution& routing, const ScenarioConfig& cfg) {
  PsaInstance p;
  for (const auto& r : routing.requests) p.rates_bps.push_back(r.rate_bps());
  p.spans = routing.spans;
  p.shared_spans = routing.shared_spans;
  p.order = routing.order;
  p.channel_order = routing.channel_order;
  p.coeffs = inst.derived;
  p.guard_hz = inst.constants.guard_hz();
  p.bandwidth_hz = inst.constants.bandwidth_hz();
  p.min_margin = cfg.min_margin;
  p.weights = cfg.weights;
  p.clamp_c = cfg.clamp_c;
  p.lower_edge = cfg.lower_edge;
  p.index_pairs();
  return p;
}

Posynomial binomial_expansion(VarId c, double k5, int n) {
  Posynomial out;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    Monomial m(binom * std::pow(k5, k));
    if (k > 0) m.pow(c, k);
    out += m;
    binom = binom * (n - k) / (k + 1);
  }
  return out;
}

namespace {

void add_if_positive(Posynomial& p, Monomial m) {
  if (m.coef > 0.0) p += std::move(m);
}

}  // namespace

BuiltProgram build(const PsaInstance& inst, Formulation f) {
  inst.check();
  const std::size_t n = inst.size();
  const auto& k = inst.coeffs;
  const bool use_t = f == Formulation::gpsa5 || f == Formulation::gpsa6;
  const int order = xci_order(f);

  BuiltProgram out;
  out.formulation = f;
  GpProgram& gp = out.program;
  VariableMap& v = out.vars;

  // Starting hints: channels spread over the band by global rank.
  std::vector<int> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[static_cast<std::size_t>(inst.order[r])] = static_cast<int>(r);
  const double slot = inst.bandwidth_hz / static_cast<double>(n + 1);
  for (std::size_t q = 0; q < n; ++q) {
    const std::string s = std::to_string(q);
    v.power.push_back(gp.add_variable("p" + s, 1e-3));
    v.frequency.push_back(gp.add_variable("omega" + s, slot * (rank[q] + 0.5)));
    v.efficiency.push_back(gp.add_variable("c" + s, 4.0));
    v.margin.push_back(gp.add_variable("m" + s, inst.min_margin * 1.5));
    if (use_t) v.aux_t.push_back(gp.add_variable("t" + s, 1.0 + ph::kKappa5 * 4.0 + 0.1));
  }
  v.tau = gp.add_variable("tau", inst.bandwidth_hz * 0.999);
  for (const auto& [q, i] : inst.pairs) {
    const double gap = slot * std::max(1, std::abs(rank[static_cast<std::size_t>(q)] - rank[static_cast<std::size_t>(i)]));
    v.distance[{q, i}] = gp.add_variable("d" + std::to_string(q) + "_" + std::to_string(i), 0.5 * gap);
  }

  // Goal.
  Posynomial goal;
  const auto& w = inst.weights;
  add_if_positive(goal, Monomial(w.k1, {{v.tau, 1.0}}));
  for (std::size_t q = 0; q < n; ++q) {
    add_if_positive(goal, Monomial(w.k2, {{v.power[q], 1.0}}));
    add_if_positive(goal, Monomial(w.k3, {{v.margin[q], -1.0}}));
  }
  for (const auto& [pair, id] : v.distance) add_if_positive(goal, Monomial(w.k4, {{id, -1.0}}));
  if (goal.empty()) throw InvalidArgument("all goal weights are zero");
  gp.set_objective(std::move(goal));

  std::size_t core_rows = 0;
  std::size_t optional_rows = 0;

  // QoS: m_q * Theta(c_q) * (E + X + Y) / p_q <= 1.
  v.qos_row.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double Nq = inst.spans[q];
    const double Rq = inst.rates_bps[q];
    Posynomial noise;
    add_if_positive(noise, Monomial(k.zeta * Nq * Rq, {{v.efficiency[q], -1.0}, {v.power[q], -1.0}}));
    add_if_positive(noise, Monomial(k.sigma * k.iota * Nq, {{v.power[q], 2.0}}));
    for (std::size_t i = 0; i < n; ++i) {
      if (i == q) continue;
      const double Nqi = inst.shared_spans[q][i];
      if (Nqi == 0.0) continue;
      const VarId d = v.distance.at({static_cast<int>(q), static_cast<int>(i)});
      const double Ri = inst.rates_bps[i];
      noise += Monomial(ph::kKappa1 * k.sigma * Nqi / Ri, {{v.power[i], 2.0}, {v.efficiency[i], 1.0}, {d, -1.0}});
      if (order == 3) {
        noise += Monomial(ph::kKappa2 * k.sigma * Nqi * Ri, {{v.power[i], 2.0}, {v.efficiency[i], -1.0}, {d, -3.0}});
      }
    }
    Posynomial row;
    switch (f) {
      case Formulation::gpsa1:
      case Formulation::gpsa2:
        row = noise * Monomial(ph::kKappa3, {{v.margin[q], 1.0}, {v.efficiency[q], ph::kKappa4}});
        break;
      case Formulation::gpsa3:
      case Formulation::gpsa4:
        row = (noise * binomial_expansion(v.efficiency[q], ph::kKappa5, static_cast<int>(ph::kKappa6))) *
              Monomial(1.0, {{v.margin[q], 1.0}});
        break;
      case Formulation::gpsa5:
      case Formulation::gpsa6:
        row = noise * Monomial(1.0, {{v.margin[q], 1.0}, {v.aux_t[q], ph::kKappa7}});
        break;
    }
    v.qos_row[q] = gp.add_constraint("qos" + std::to_string(q), std::move(row));
    ++core_rows;
  }

  // Non-overlap with guard band between consecutive channels of every link.
  // A pair consecutive on several links yields one row.
  std::set<Pair> adjacent;
  for (const auto& ch : inst.channel_order) {
    for (std::size_t j = 0; j + 1 < ch.size(); ++j) adjacent.insert({ch[j], ch[j + 1]});
  }
  for (const auto& [a, b] : adjacent) {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    Posynomial row;
    row += Monomial(1.0, {{v.frequency[ua], 1.0}, {v.frequency[ub], -1.0}});
    row += Monomial(0.5 * inst.rates_bps[ua], {{v.efficiency[ua], -1.0}, {v.frequency[ub], -1.0}});
    row += Monomial(inst.guard_hz, {{v.frequency[ub], -1.0}});
    row += Monomial(0.5 * inst.rates_bps[ub], {{v.efficiency[ub], -1.0}, {v.frequency[ub], -1.0}});
    gp.add_constraint("guard" + std::to_string(a) + "_" + std::to_string(b), std::move(row));
    ++core_rows;
  }

  for (std::size_t q = 0; q < n; ++q) {
    Posynomial row;
    row += Monomial(0.5 * inst.rates_bps[q], {{v.efficiency[q], -1.0}, {v.tau, -1.0}});
    row += Monomial(1.0, {{v.frequency[q], 1.0}, {v.tau, -1.0}});
    gp.add_constraint("spectrum" + std::to_string(q), std::move(row));
    ++core_rows;
  }
  for (std::size_t q = 0; q < n; ++q) {
    gp.add_constraint("margin" + std::to_string(q), Monomial(inst.min_margin, {{v.margin[q], -1.0}}));
    ++core_rows;
  }
  gp.add_constraint("band", Monomial(1.0 / inst.bandwidth_hz, {{v.tau, 1.0}}));
  ++core_rows;

  // d_{q,i} <= |omega_q - omega_i| for both orientations of each pair.
  for (const auto& [q, i] : inst.pairs) {
    const int lo = rank[static_cast<std::size_t>(q)] < rank[static_cast<std::size_t>(i)] ? q : i;
    const int hi = lo == q ? i : q;
    Posynomial row;
    row += Monomial(1.0, {{v.distance.at({q, i}), 1.0}, {v.frequency[static_cast<std::size_t>(hi)], -1.0}});
    row += Monomial(1.0, {{v.frequency[static_cast<std::size_t>(lo)], 1.0}, {v.frequency[static_cast<std::size_t>(hi)], -1.0}});
    gp.add_constraint("dist" + std::to_string(q) + "_" + std::to_string(i), std::move(row));
    ++core_rows;
  }

  if (use_t) {
    for (std::size_t q = 0; q < n; ++q) {
      Posynomial row;
      row += Monomial(1.0, {{v.aux_t[q], -1.0}});
      row += Monomial(ph::kKappa5, {{v.efficiency[q], 1.0}, {v.aux_t[q], -1.0}});
      gp.add_constraint("aux" + std::to_string(q), std::move(row));
      ++core_rows;
    }
  }

  if (inst.clamp_c) {
    for (std::size_t q = 0; q < n; ++q) {
      gp.add_bounds(v.efficiency[q], 2.0, 12.0, "clamp" + std::to_string(q));
      optional_rows += 2;
    }
  }
  if (inst.lower_edge) {
    for (std::size_t q = 0; q < n; ++q) {
      gp.add_constraint("edge" + std::to_string(q),
                        Monomial(0.5 * inst.rates_bps[q], {{v.efficiency[q], -1.0}, {v.frequency[q], -1.0}}));
      ++optional_rows;
    }
  }

  out.sizes.formulation = f;
  out.sizes.requests = n;
  out.sizes.links = inst.link_count();
  out.sizes.variables = gp.variables().size();
  out.sizes.constraints = core_rows;
  out.sizes.optional_constraints = optional_rows;
  const auto table = count_formulation(f, n, inst.link_count());
  out.sizes.table_variables = table.variables;
  out.sizes.table_constraints = table.constraints;
  return out;
}

FormulationCount count_minlp(std::size_t requests, std::size_t links) {
  const auto q = static_cast<long long>(requests);
  const auto l = static_cast<long long>(links);
  return {"MINLPPSA", 4 * q + 1, 3 * q + q * l + 1};
}

FormulationCount count_minlp(const PsaInstance& inst) { return count_minlp(inst.size(), inst.link_count()); }

FormulationCount count_formulation(Formulation f, std::size_t requests, std::size_t links) {
  const auto q = static_cast<long long>(requests);
  const auto l = static_cast<long long>(links);
  const bool aux = f == Formulation::gpsa5 || f == Formulation::gpsa6;
  std::string name = to_string(f);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (aux) return {name, q * q + 5 * q + 1, 4 * q + 3 * q * l + 1};
  return {name, q * q + 4 * q + 1, 3 * q + 3 * q * l + 1};
}

FormulationCount count_routing(RtoMethod m, std::size_t requests, std::size_t links, std::size_t nodes) {
  const auto q = static_cast<long long>(requests);
  std::string name = to_string(m);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return {name, q * static_cast<long long>(links), 2 * q + q * static_cast<long long>(nodes)};
}

std::vector<FormulationCount> count_table(std::size_t requests, std::size_t links) {
  std::vector<FormulationCount> out{count_minlp(requests, links)};
  for (int f = 1; f <= 6; ++f) out.push_back(count_formulation(static_cast<Formulation>(f), requests, links));
  return out;
}

std::vector<ph::ChannelState> Allocation::channels() const {
  std::vector<ph::ChannelState> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back({r.power, r.frequency, r.bandwidth, r.efficiency});
  return out;
}

Allocation extract(const GpSolution& sol, const BuiltProgram& built, const PsaInstance& inst, double tol) {
  if (!sol.optimal()) throw InvalidArgument("cannot extract an allocation from a non-optimal solution");
  const auto& v = built.vars;
  const std::size_t n = inst.size();
  if (v.power.size() != n || sol.values.size() != built.program.variables().size()) {
    throw InvalidArgument("solution does not match the program");
  }
  Allocation a;
  a.requests.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    auto& r = a.requests[q];
    r.power = sol.value(v.power[q]);
    r.frequency = sol.value(v.frequency[q]);
    r.efficiency = sol.value(v.efficiency[q]);
    r.margin = sol.value(v.margin[q]);
    r.bandwidth = inst.rates_bps[q] / r.efficiency;
    if (!v.aux_t.empty()) r.aux_t = sol.value(v.aux_t[q]);
  }
  a.tau = sol.value(v.tau);
  for (const auto& [pair, id] : v.distance) a.distances[pair] = sol.value(id);
  a.objective = sol.objective;

  const double slack_tol = tol * inst.bandwidth_hz;
  for (std::size_t l = 0; l < inst.channel_order.size(); ++l) {
    const auto& ch = inst.channel_order[l];
    for (std::size_t j = 0; j + 1 < ch.size(); ++j) {
      const auto& lo = a.requests[static_cast<std::size_t>(ch[j])];
      const auto& hi = a.requests[static_cast<std::size_t>(ch[j + 1])];
      const double slack = (hi.frequency - 0.5 * hi.bandwidth) - (lo.frequency + 0.5 * lo.bandwidth + inst.guard_hz);
      if (slack < -slack_tol) {
        a.violations.push_back("overlap on link " + std::to_string(l) + " between requests " + std::to_string(ch[j]) +
                               " and " + std::to_string(ch[j + 1]));
      }
    }
  }
  for (std::size_t q = 0; q < n; ++q) {
    const auto& r = a.requests[q];
    if (r.frequency + 0.5 * r.bandwidth > a.tau + slack_tol) {
      a.violations.push_back("request " + std::to_string(q) + " exceeds the spectrum bound");
    }
    if (r.margin < inst.min_margin * (1.0 - tol)) a.violations.push_back("request " + std::to_string(q) + " margin below minimum");
  }
  if (a.tau > inst.bandwidth_hz * (1.0 + tol)) a.violations.push_back("spectrum bound exceeds the fiber band");
  for (const auto& [pair, d] : a.distances) {
    const double gap = std::abs(a.requests[static_cast<std::size_t>(pair.first)].frequency -
                                a.requests[static_cast<std::size_t>(pair.second)].frequency);
    if (d > gap + slack_tol) {
      a.violations.push_back("distance variable of pair " + std::to_string(pair.first) + "," +
                             std::to_string(pair.second) + " exceeds the carrier spacing");
    }
  }
  return a;
}

double goal_value(const Allocation& a, const PsaInstance& inst) {
  const auto& w = inst.weights;
  double g = w.k1 * a.tau;
  for (const auto& r : a.requests) g += w.k2 * r.power + w.k3 / r.margin;
  for (const auto& [pair, d] : a.distances) g += w.k4 / d;
  return g;
}

}  // namespace eon::gpsa
