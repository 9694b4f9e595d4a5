#include "reports.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "eon/physics.hpp"

namespace eon::cli {

namespace ph = eon::physics;
using nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::vector<std::string> context_lines(const RunContext& ctx) {
  std::vector<std::string> lines;
  lines.push_back("command = " + ctx.command);
  lines.push_back("topology = " + ctx.topology.string());
  lines.push_back("traffic = " + ctx.traffic.string());
  if (ctx.constants) lines.push_back("constants_file = " + ctx.constants->string());
  if (ctx.config) lines.push_back("config_file = " + ctx.config->string());
  std::ostringstream pc, sc;
  write_constants(pc, ctx.physics);
  write_config(sc, ctx.scenario);
  for (auto& l : split_lines(pc.str())) lines.push_back(std::move(l));
  for (auto& l : split_lines(sc.str())) lines.push_back(std::move(l));
  return lines;
}

void write_context_comment(std::ostream& out, const RunContext& ctx) {
  for (const auto& l : context_lines(ctx)) out << "# " << l << '\n';
}

ordered_json context_json(const RunContext& ctx) {
  ordered_json j = ordered_json::object();
  for (const auto& l : context_lines(ctx)) {
    const auto eq = l.find(" = ");
    j[l.substr(0, eq)] = l.substr(eq + 3);
  }
  return j;
}

ordered_json report_json(const validate::ValidationReport& r) {
  ordered_json j;
  j["reference_model"] = "exact Gaussian-noise model (base-10 cross-channel kernel, asinh self-channel term)";
  j["xci_order"] = r.xci_order;
  j["min_margin"] = r.min_margin;
  j["admissible"] = r.admissible();
  ordered_json agg;
  agg["requests"] = r.requests.size();
  agg["total_power_w"] = number(r.total_power);
  agg["total_noise_w"] = number(r.total_noise);
  agg["mean_rate_per_resource"] = number(r.mean_rate_per_resource);
  agg["tau_hz"] = number(r.tau);
  agg["span_usage"] = r.span_usage;
  agg["min_slack"] = number(r.min_slack);
  agg["mean_approx_error"] = number(r.mean_approx_error);
  agg["max_approx_error"] = number(r.max_approx_error);
  j["aggregates"] = agg;
  ordered_json v = ordered_json::array();
  for (const auto& x : r.violations) {
    ordered_json e;
    e["kind"] = x.kind;
    if (x.link >= 0) e["link"] = x.link;
    if (x.first >= 0) e["first"] = x.first;
    if (x.second >= 0) e["second"] = x.second;
    e["amount"] = number(x.amount);
    e["message"] = x.message;
    v.push_back(std::move(e));
  }
  j["violations"] = v;
  ordered_json reqs = ordered_json::array();
  for (const auto& q : r.requests) {
    ordered_json e;
    e["request"] = q.request;
    e["osnr_exact"] = number(q.osnr_exact);
    e["osnr_model"] = number(q.osnr_model);
    e["required"] = number(q.required);
    e["slack"] = number(q.slack);
    e["approx_error"] = number(q.approx_error);
    e["model_out_of_range"] = q.model_out_of_range;
    e["ase_w"] = number(q.noise.ase);
    e["xci_w"] = number(q.noise.xci);
    e["sci_w"] = number(q.noise.sci);
    reqs.push_back(std::move(e));
  }
  j["requests"] = reqs;
  return j;
}

ordered_json trace_json(const heuristic::HeuristicTrace& t) {
  ordered_json j;
  j["relaxed_objective"] = number(t.relaxed_objective);
  j["final_objective"] = number(t.final_objective);
  j["rounding_gap"] = number(t.relaxed_objective > 0 ? t.final_objective / t.relaxed_objective - 1.0 : 0.0);
  j["outer_iterations"] = t.outer_iterations();
  j["solves"] = t.solves;
  j["final_solver_iterations"] = t.final_solver_iterations;
  ordered_json its = ordered_json::array();
  for (const auto& it : t.iterations) {
    ordered_json e;
    e["relaxed_objective"] = number(it.relaxed_objective);
    e["solver_iterations"] = it.solver_iterations;
    ordered_json fx = ordered_json::array();
    for (const auto& f : it.fixes) {
      fx.push_back({{"request", f.request},
                    {"relaxed", number(f.relaxed)},
                    {"rounded", number(f.rounded)},
                    {"neighborhood", number(f.neighborhood)},
                    {"lowered", f.lowered}});
    }
    e["fixes"] = fx;
    its.push_back(std::move(e));
  }
  j["iterations"] = its;
  return j;
}

void write_allocation_csv(std::ostream& out, const RunContext& ctx, const NetworkInstance& inst,
                          const heuristic::RunResult& run, const validate::ValidationReport& report) {
  write_context_comment(out, ctx);
  out << "request,source,destination,rate_gbps,path,spans,power_w,frequency_hz,efficiency,bandwidth_hz,margin,"
         "osnr_exact,osnr_model,required,slack,approx_error\n";
  const auto& nodes = inst.topology.nodes();
  const auto& alloc = run.stage2.allocation;
  for (std::size_t q = 0; q < alloc.requests.size(); ++q) {
    const auto& req = run.routing.requests[q];
    const auto& a = alloc.requests[q];
    const auto& rr = report.requests[q];
    std::string path;
    for (int v : run.routing.paths[q].nodes) {
      if (!path.empty()) path += '-';
      path += std::to_string(nodes[static_cast<std::size_t>(v)].id);
    }
    out << q << ',' << nodes[static_cast<std::size_t>(req.source)].id << ','
        << nodes[static_cast<std::size_t>(req.destination)].id << ',' << num(req.rate_gbps) << ',' << path << ','
        << run.routing.spans[q] << ',' << num(a.power) << ',' << num(a.frequency) << ',' << num(a.efficiency) << ','
        << num(a.bandwidth) << ',' << num(a.margin) << ',' << num(rr.osnr_exact) << ',' << num(rr.osnr_model) << ','
        << num(rr.required) << ',' << num(rr.slack) << ',' << num(rr.approx_error) << '\n';
  }
}

void write_sizes_csv(std::ostream& out, const RunContext* ctx, const std::vector<gpsa::SizeReport>& sizes) {
  if (ctx) write_context_comment(out, *ctx);
  out << "formulation,requests,links,variables,constraints,optional_constraints,table_variables,table_constraints\n";
  for (const auto& s : sizes) {
    out << to_string(s.formulation) << ',' << s.requests << ',' << s.links << ',' << s.variables << ','
        << s.constraints << ',' << s.optional_constraints << ',' << s.table_variables << ',' << s.table_constraints
        << '\n';
  }
}

void write_counts_csv(std::ostream& out, const std::vector<gpsa::FormulationCount>& counts) {
  out << "formulation,variables,constraints\n";
  for (const auto& c : counts) out << c.name << ',' << c.variables << ',' << c.constraints << '\n';
}

void write_curves_csv(std::ostream& out, double step, double max) {
  out << "x,exact,order1,order3,rel_error_order1,rel_error_order3\n";
  const int count = static_cast<int>(std::floor(max / step + 1e-9));
  for (int i = 1; i <= count; ++i) {
    const double x = i * step;
    const double e = ph::xci_kernel_exact(x);
    const double a1 = ph::xci_kernel_approx(x, 1);
    const double a3 = ph::xci_kernel_approx(x, 3);
    out << num(x) << ',' << num(e) << ',' << num(a1) << ',' << num(a3) << ',' << num((a1 - e) / e) << ','
        << num((a3 - e) / e) << '\n';
  }
}

void write_fits_csv(std::ostream& out) {
  out << "efficiency,table,fit1,fit2,fit3,rel_error_fit1,rel_error_fit2,rel_error_fit3\n";
  for (const auto& e : ModulationTable::standard().entries()) {
    const double c = e.efficiency;
    const double t = e.required_osnr;
    const double f1 = ph::required_osnr(c, ph::ThetaFit::fit1);
    const double f2 = ph::required_osnr(c, ph::ThetaFit::fit2);
    const double f3 = ph::required_osnr(c, ph::ThetaFit::fit3);
    out << num(c) << ',' << num(t) << ',' << num(f1) << ',' << num(f2) << ',' << num(f3) << ',' << num((f1 - t) / t)
        << ',' << num((f2 - t) / t) << ',' << num((f3 - t) / t) << '\n';
  }
}

void write_fit_curves_csv(std::ostream& out, double step) {
  out << "efficiency,fit1,fit2,fit3\n";
  const int count = static_cast<int>(std::floor(10.0 / step + 1e-9));
  for (int i = 0; i <= count; ++i) {
    const double c = 2.0 + i * step;
    out << num(c) << ',' << num(ph::required_osnr(c, ph::ThetaFit::fit1)) << ','
        << num(ph::required_osnr(c, ph::ThetaFit::fit2)) << ',' << num(ph::required_osnr(c, ph::ThetaFit::fit3))
        << '\n';
  }
}

}  // namespace eon::cli
