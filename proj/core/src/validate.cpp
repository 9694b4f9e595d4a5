#include "eon/validate.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "eon/error.hpp"

namespace eon::validate {

namespace ph = eon::physics;

ValidateOptions options_for(Formulation f, double min_margin) {
  ValidateOptions o;
  o.xci_order = xci_order(f);
  o.min_margin = min_margin;
  o.untabulated_fit = ph::theta_fit(f);
  return o;
}

namespace {

std::string pair_text(int a, int b) { return std::to_string(a) + " and " + std::to_string(b); }

double required(double c, const ValidateOptions& o) {
  const auto& table = ModulationTable::standard();
  if (const auto v = table.required_osnr(c)) return o.min_margin * *v;
  const double clamped = std::clamp(c, 2.0, 12.0);
  return o.min_margin * ph::required_osnr(clamped, o.untabulated_fit);
}

}  // namespace

ValidationReport validate(const gpsa::Allocation& a, const rto::RoutingSolution& routing, const NetworkInstance& inst,
                          const ValidateOptions& options) {
  ValidationReport r;
  r.xci_order = options.xci_order;
  r.min_margin = options.min_margin;
  const std::size_t n = a.requests.size();
  if (n == 0) return r;
  if (routing.size() != n) throw InvalidArgument("allocation and routing disagree on the request count");

  const auto ctx = routing.noise_context(inst.derived);
  const auto ch = a.channels();
  const double band = inst.constants.bandwidth_hz();
  const double guard = inst.constants.guard_hz();
  const double tol = options.spectral_tolerance_hz;
  r.tau = a.tau;
  r.min_slack = std::numeric_limits<double>::infinity();

  double sum_error = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto& al = a.requests[q];
    RequestReport rr;
    rr.request = static_cast<int>(q);
    rr.spans = ctx.spans[q];
    rr.rate_bps = routing.requests[q].rate_bps();
    rr.power = al.power;
    rr.frequency = al.frequency;
    rr.efficiency = al.efficiency;
    rr.bandwidth = al.bandwidth;
    rr.margin = al.margin;
    rr.required = required(al.efficiency, options);
    try {
      rr.noise = ph::noise(q, ch, ctx, ph::OsnrMode::exact_model());
      const auto o = ph::osnr(q, ch, ctx, ph::OsnrMode::exact_model());
      rr.osnr_exact = o.value;
    } catch (const DomainError& e) {
      rr.noise = {};
      rr.osnr_exact = std::numeric_limits<double>::quiet_NaN();
      r.violations.push_back({"xci-domain", -1, static_cast<int>(q), -1, 0.0, e.what()});
    }
    try {
      const auto m = ph::osnr(q, ch, ctx, ph::OsnrMode::approx(options.xci_order));
      rr.osnr_model = m.value;
      rr.model_out_of_range = m.out_of_range;
    } catch (const DomainError&) {
      rr.osnr_model = std::numeric_limits<double>::quiet_NaN();
    }
    rr.slack = rr.osnr_exact / rr.required;
    rr.approx_error = std::abs(rr.osnr_exact - rr.osnr_model) / rr.osnr_exact;
    if (std::isfinite(rr.slack)) r.min_slack = std::min(r.min_slack, rr.slack);
    if (std::isfinite(rr.approx_error)) {
      sum_error += rr.approx_error;
      r.max_approx_error = std::max(r.max_approx_error, rr.approx_error);
    }
    if (rr.slack < 1.0 - options.qos_tolerance) {
      std::ostringstream msg;
      msg << "request " << q << " exact OSNR is " << rr.slack << " of the requirement";
      r.violations.push_back({"qos", -1, static_cast<int>(q), -1, 1.0 - rr.slack, msg.str()});
    }
    const double low = al.frequency - 0.5 * al.bandwidth;
    const double high = al.frequency + 0.5 * al.bandwidth;
    if (low < -tol) {
      r.violations.push_back({"lower-edge", -1, static_cast<int>(q), -1, -low,
                              "request " + std::to_string(q) + " extends below the band start"});
    }
    if (high > band + tol) {
      r.violations.push_back({"band", -1, static_cast<int>(q), -1, high - band,
                              "request " + std::to_string(q) + " extends beyond the band"});
    }
    r.total_power += al.power;
    r.total_noise += rr.noise.total();
    r.mean_rate_per_resource += rr.rate_bps / (al.power * al.bandwidth);
    r.span_usage += rr.spans;
    r.requests.push_back(rr);
  }
  r.mean_rate_per_resource /= static_cast<double>(n);
  r.mean_approx_error = sum_error / static_cast<double>(n);

  for (std::size_t l = 0; l < routing.channel_order.size(); ++l) {
    const auto& order = routing.channel_order[l];
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      const auto& lo = a.requests[static_cast<std::size_t>(order[j])];
      const auto& hi = a.requests[static_cast<std::size_t>(order[j + 1])];
      const double gap = (hi.frequency - 0.5 * hi.bandwidth) - (lo.frequency + 0.5 * lo.bandwidth) - guard;
      if (gap < -tol) {
        r.violations.push_back({"overlap", static_cast<int>(l), order[j], order[j + 1], -gap,
                                "link " + std::to_string(l) + ": requests " + pair_text(order[j], order[j + 1]) +
                                    " violate the guard band"});
      }
    }
  }
  return r;
}

void write_requests_csv(std::ostream& out, const ValidationReport& r) {
  out << "request,spans,rate_bps,power_w,frequency_hz,efficiency,bandwidth_hz,margin,ase_w,xci_w,sci_w,"
         "osnr_exact,osnr_model,required,slack,approx_error\n";
  const auto old = out.precision(12);
  for (const auto& q : r.requests) {
    out << q.request << ',' << q.spans << ',' << q.rate_bps << ',' << q.power << ',' << q.frequency << ','
        << q.efficiency << ',' << q.bandwidth << ',' << q.margin << ',' << q.noise.ase << ',' << q.noise.xci << ','
        << q.noise.sci << ',' << q.osnr_exact << ',' << q.osnr_model << ',' << q.required << ',' << q.slack << ','
        << q.approx_error << '\n';
  }
  out.precision(old);
}

BruteForceResult brute_force_psa(const gpsa::PsaInstance& inst, Formulation f, ThetaOnFix theta,
                                 const SolverOptions& solver) {
  const std::size_t n = inst.size();
  if (n == 0) throw InvalidArgument("brute force needs at least one request");
  if (n > 4) throw InvalidArgument("brute force is limited to four requests");
  const auto built = gpsa::build(inst, f);
  const auto& table = ModulationTable::standard().entries();
  const std::size_t k = table.size();
  std::size_t combos = 1;
  for (std::size_t q = 0; q < n; ++q) combos *= k;

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> eff(n);
  for (std::size_t idx = 0; idx < combos; ++idx) {
    GpProgram program = built.program;
    std::size_t code = idx;
    for (std::size_t q = 0; q < n; ++q) {
      eff[q] = table[code % k].efficiency;
      code /= k;
      heuristic::fix_efficiency(program, built, q, eff[q], theta);
    }
    const GpSolution sol = solve(program, solver);
    ++best.solves;
    if (!sol.optimal()) continue;
    ++best.feasible;
    if (sol.objective < best.objective) {
      best.objective = sol.objective;
      best.efficiencies = eff;
      best.allocation = gpsa::extract(sol, built, inst);
    }
  }
  if (best.feasible == 0) {
    throw InfeasibleError("no spectral-efficiency combination is feasible (" + std::to_string(best.solves) +
                          " solves)");
  }
  return best;
}

std::vector<MarginPoint> sweep_margin(const NetworkInstance& inst, const ScenarioConfig& cfg,
                                      const std::vector<double>& margins) {
  std::vector<MarginPoint> out;
  if (margins.empty()) return out;
  cfg.validate();
  const auto requests = heuristic::prepare_requests(inst, cfg);
  if (requests.empty()) throw InvalidArgument("no connection requests to plan");
  rto::SearchOptions so;
  so.k_paths = cfg.k_paths;
  so.restarts = cfg.restarts;
  so.seed = cfg.seed;
  const auto routing = rto::route(inst, requests, cfg.rto, so);
  for (double m : margins) {
    ScenarioConfig c = cfg;
    c.min_margin = m;
    c.validate();
    auto run = heuristic::run_routed(inst, routing, c);
    MarginPoint p;
    p.margin = m;
    p.report = validate(run.stage2.allocation, run.routing, inst, options_for(c.gpsa, m));
    p.trace = std::move(run.stage2.trace);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace eon::validate
