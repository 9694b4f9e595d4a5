#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "eon/error.hpp"
#include "eon/gpsa.hpp"
#include "eon/heuristic.hpp"
#include "eon/model.hpp"
#include "eon/rto.hpp"
#include "eon/validate.hpp"
#include "reports.hpp"

#ifndef EON_DEFAULT_DATA_DIR
#define EON_DEFAULT_DATA_DIR "data"
#endif

namespace eon::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path data_dir() {
  if (const char* env = std::getenv("EON_DATA_DIR"); env && *env) return env;
  return EON_DEFAULT_DATA_DIR;
}

fs::path resolve_input(const std::string& name) {
  if (name == "cost239") return data_dir() / "cost239.topo";
  if (name == "table2") return data_dir() / "cost239_traffic.txt";
  if (name == "table3") return data_dir() / "table3.cfg";
  return name;
}

namespace {

/// Raw flag values; unset optionals leave the file or default value alone.
struct Flags {
  std::string topology = "cost239";
  std::string traffic = "table2";
  std::optional<std::string> constants;
  std::optional<std::string> config;
  std::optional<std::string> rto;
  std::optional<std::string> gpsa;
  std::optional<double> margin;
  std::optional<double> scale;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> clamp_c;
  std::optional<std::string> lower_edge;
  std::optional<std::string> theta_on_fix;
  std::optional<int> requests;
  std::optional<int> k_paths;
  std::optional<int> restarts;
  std::string out = "out";
  int jobs = 0;
};

void add_common(CLI::App* app, Flags& f, bool scenario) {
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  if (!scenario) return;
  app->add_option("--topology", f.topology, "Topology file or 'cost239'")->capture_default_str();
  app->add_option("--traffic", f.traffic, "Traffic matrix file or 'table2'")->capture_default_str();
  app->add_option("--constants", f.constants, "Key-value physics constants file or 'table3'");
  app->add_option("--config", f.config, "Key-value scenario configuration file");
  app->add_option("--rto", f.rto, "Routing and ordering: spr, scpr or scprr");
  app->add_option("--gpsa", f.gpsa, "Formulation 1..6");
  app->add_option("--margin", f.margin, "Minimum OSNR margin (>= 1)");
  app->add_option("--scale", f.scale, "Traffic matrix unit in Gb/s");
  app->add_option("--seed", f.seed, "Seed for request selection and routing search");
  app->add_option("--clamp-c", f.clamp_c, "Keep relaxed efficiencies in [2, 12]: on or off");
  app->add_option("--lower-edge", f.lower_edge, "Keep channels above the band start: on or off");
  app->add_option("--theta-on-fix", f.theta_on_fix, "QoS requirement after rounding: fit or table");
  app->add_option("--requests", f.requests, "Seeded subset size (0 keeps every request)");
  app->add_option("--k-paths", f.k_paths, "Candidate paths per request for scpr / scprr");
  app->add_option("--restarts", f.restarts, "Local-search restarts for scpr / scprr");
  app->add_option("--jobs", f.jobs, "Worker threads for independent runs (0 = hardware)");
}

bool parse_switch(const std::string& v, const char* flag) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ParseError(std::string(flag) + " expects on or off, got '" + v + "'");
}

Formulation formulation_flag(const std::string& v) {
  if (v.size() == 1 && v[0] >= '1' && v[0] <= '6') return static_cast<Formulation>(v[0] - '0');
  return parse_formulation(v);
}

void apply_file(const fs::path& path, PhysicsConstants& pc, ScenarioConfig& cfg) {
  KeyValues kv = read_key_values(path);
  apply_constants(kv, pc);
  apply_config(kv, cfg);
  if (!kv.empty()) throw ParseError("unknown key '" + kv.begin()->first + "' in " + path.string());
}

struct Loaded {
  RunContext ctx;
  NetworkInstance inst;
};

/// defaults < constants file < config file < flags.
Loaded load(const std::string& command, const Flags& f, ScenarioConfig cfg) {
  Loaded l;
  RunContext& ctx = l.ctx;
  ctx.command = command;
  ctx.topology = resolve_input(f.topology);
  ctx.traffic = resolve_input(f.traffic);
  PhysicsConstants pc;
  if (f.constants) {
    ctx.constants = resolve_input(*f.constants);
    apply_file(*ctx.constants, pc, cfg);
  }
  if (f.config) {
    ctx.config = resolve_input(*f.config);
    apply_file(*ctx.config, pc, cfg);
  }
  if (f.rto) cfg.rto = parse_rto(*f.rto);
  if (f.gpsa) cfg.gpsa = formulation_flag(*f.gpsa);
  if (f.margin) cfg.min_margin = *f.margin;
  if (f.scale) cfg.traffic_scale_gbps = *f.scale;
  if (f.seed) cfg.seed = *f.seed;
  if (f.clamp_c) cfg.clamp_c = parse_switch(*f.clamp_c, "--clamp-c");
  if (f.lower_edge) cfg.lower_edge = parse_switch(*f.lower_edge, "--lower-edge");
  if (f.theta_on_fix) cfg.theta_on_fix = parse_theta_on_fix(*f.theta_on_fix);
  if (f.requests) cfg.max_requests = *f.requests;
  if (f.k_paths) cfg.k_paths = *f.k_paths;
  if (f.restarts) cfg.restarts = *f.restarts;
  pc.validate();
  cfg.validate();
  ctx.physics = pc;
  ctx.scenario = cfg;
  auto topo = read_topology(ctx.topology);
  auto demands = read_traffic(ctx.traffic, topo, cfg.traffic_scale_gbps);
  l.inst = make_instance(std::move(topo), std::move(demands), pc);
  return l;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

rto::SearchOptions search_options(const ScenarioConfig& cfg) {
  rto::SearchOptions so;
  so.k_paths = cfg.k_paths;
  so.restarts = cfg.restarts;
  so.seed = cfg.seed;
  return so;
}

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const heuristic::StageError*>(&e)) {
    return s->status() == GpStatus::infeasible ? kInfeasible : kNumerical;
  }
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const ParseError*>(&e)) return kParse;
  if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const UnreachableError*>(&e)) return kInfeasible;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const DomainError*>(&e)) return kInvalid;
  return kFailure;
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Failures are
/// captured per index so results stay in index order.
std::vector<std::exception_ptr> parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return errors;
}

std::string describe(const std::exception_ptr& e, int* code) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    if (code) *code = exit_code_for(ex);
    return ex.what();
  }
}

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// The bundled matrix partitions into 180 requests; studies draw a seeded
/// subset of 46 transponders unless --requests says otherwise.
ScenarioConfig scenario_defaults() {
  ScenarioConfig cfg;
  cfg.max_requests = 46;
  return cfg;
}

int cmd_run(const Flags& f, std::ostream& out) {
  auto l = load("run", f, scenario_defaults());
  const fs::path dir = prepare_out(f.out);
  const auto& cfg = l.ctx.scenario;
  const auto run = heuristic::run(l.inst, cfg);
  const auto report = validate::validate(run.stage2.allocation, run.routing, l.inst,
                                         validate::options_for(cfg.gpsa, cfg.min_margin));

  auto alloc = open_out(dir / "allocation.csv");
  write_allocation_csv(alloc, l.ctx, l.inst, run, report);
  finish(alloc, dir / "allocation.csv");

  ordered_json v;
  v["config"] = context_json(l.ctx);
  v["report"] = report_json(report);
  write_json(dir / "validation.json", v);

  ordered_json t;
  t["config"] = context_json(l.ctx);
  t["routing_goal"] = run.routing.goal;
  t["routing_exhaustive"] = run.routing.exhaustive;
  t["trace"] = trace_json(run.stage2.trace);
  write_json(dir / "trace.json", t);

  auto sizes = open_out(dir / "sizes.csv");
  write_sizes_csv(sizes, &l.ctx, {run.stage2.built.sizes});
  finish(sizes, dir / "sizes.csv");

  out << "requests " << run.routing.size() << ", objective " << num(run.stage2.trace.final_objective)
      << ", outer iterations " << run.stage2.trace.outer_iterations() << ", violations "
      << report.violations.size() << '\n';
  return kOk;
}

int cmd_sweep_margin(const Flags& f, const std::vector<double>& margins, std::ostream& out) {
  auto l = load("sweep-margin", f, scenario_defaults());
  const fs::path dir = prepare_out(f.out);
  const auto& cfg = l.ctx.scenario;
  for (double m : margins) {
    if (!(m >= 1.0)) throw InvalidArgument("margins must be at least 1");
  }
  const auto requests = heuristic::prepare_requests(l.inst, cfg);
  if (requests.empty()) throw InvalidArgument("no connection requests to plan");
  const auto routing = rto::route(l.inst, requests, cfg.rto, search_options(cfg));

  std::vector<validate::MarginPoint> points(margins.size());
  auto errors = parallel_for(margins.size(), f.jobs, [&](std::size_t i) {
    ScenarioConfig c = cfg;
    c.min_margin = margins[i];
    auto run = heuristic::run_routed(l.inst, routing, c);
    points[i].margin = margins[i];
    points[i].report = validate::validate(run.stage2.allocation, run.routing, l.inst,
                                          validate::options_for(c.gpsa, margins[i]));
    points[i].trace = std::move(run.stage2.trace);
  });

  int code = kOk;
  auto csv = open_out(dir / "sweep.csv");
  write_context_comment(csv, l.ctx);
  csv << "margin,status,mean_rate_per_resource,total_power_w,total_noise_w,tau_hz,min_slack,outer_iterations,"
         "violations\n";
  ordered_json v;
  v["config"] = context_json(l.ctx);
  v["points"] = ordered_json::array();
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (errors[i]) {
      int c = kFailure;
      const auto msg = describe(errors[i], &c);
      if (code == kOk) code = c;
      csv << num(margins[i]) << ",error: " << csv_text(msg) << ",,,,,,,\n";
      v["points"].push_back({{"margin", margins[i]}, {"error", msg}});
      continue;
    }
    const auto& r = points[i].report;
    csv << num(margins[i]) << ",ok," << num(r.mean_rate_per_resource) << ',' << num(r.total_power) << ','
        << num(r.total_noise) << ',' << num(r.tau) << ',' << num(r.min_slack) << ','
        << points[i].trace.outer_iterations() << ',' << r.violations.size() << '\n';
    v["points"].push_back({{"margin", margins[i]}, {"report", report_json(r)}, {"trace", trace_json(points[i].trace)}});
  }
  finish(csv, dir / "sweep.csv");
  write_json(dir / "validation.json", v);
  out << "wrote " << (dir / "sweep.csv").string() << '\n';
  return code;
}

int cmd_compare_rto(const Flags& f, int instances, std::ostream& out) {
  if (instances < 1) throw InvalidArgument("--instances must be positive");
  auto l = load("compare-rto", f, scenario_defaults());
  const fs::path dir = prepare_out(f.out);
  const auto& base = l.ctx.scenario;
  const RtoMethod methods[] = {RtoMethod::spr, RtoMethod::scpr, RtoMethod::scprr};

  struct Row {
    validate::ValidationReport report;
    double objective = 0.0;
    double routing_goal = 0.0;
  };
  const std::size_t n = static_cast<std::size_t>(instances) * 3;
  std::vector<Row> rows(n);
  auto errors = parallel_for(n, f.jobs, [&](std::size_t i) {
    ScenarioConfig c = base;
    c.seed = base.seed + i / 3;
    c.rto = methods[i % 3];
    const auto run = heuristic::run(l.inst, c);
    rows[i].objective = run.stage2.trace.final_objective;
    rows[i].routing_goal = run.routing.goal;
    rows[i].report = validate::validate(run.stage2.allocation, run.routing, l.inst,
                                        validate::options_for(c.gpsa, c.min_margin));
  });

  int code = kOk;
  auto csv = open_out(dir / "compare_rto.csv");
  write_context_comment(csv, l.ctx);
  csv << "seed,rto,status,requests,routing_goal,span_usage,total_power_w,total_noise_w,objective,min_slack\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv << base.seed + i / 3 << ',' << to_string(methods[i % 3]) << ',';
    if (errors[i]) {
      int c = kFailure;
      const auto msg = describe(errors[i], &c);
      if (code == kOk) code = c;
      csv << "error: " << csv_text(msg) << ",,,,,,,\n";
      continue;
    }
    const auto& r = rows[i];
    csv << "ok," << r.report.requests.size() << ',' << num(r.routing_goal) << ',' << r.report.span_usage << ','
        << num(r.report.total_power) << ',' << num(r.report.total_noise) << ',' << num(r.objective) << ','
        << num(r.report.min_slack) << '\n';
  }
  finish(csv, dir / "compare_rto.csv");
  out << "wrote " << (dir / "compare_rto.csv").string() << '\n';
  return code;
}

int cmd_compare_gpsa(const Flags& f, std::ostream& out) {
  auto l = load("compare-gpsa", f, scenario_defaults());
  const fs::path dir = prepare_out(f.out);
  const auto& cfg = l.ctx.scenario;
  const auto requests = heuristic::prepare_requests(l.inst, cfg);
  if (requests.empty()) throw InvalidArgument("no connection requests to plan");
  const auto routing = rto::route(l.inst, requests, cfg.rto, search_options(cfg));

  struct Row {
    heuristic::RunResult run;
    validate::ValidationReport report;
    double seconds = 0.0;
  };
  std::vector<Row> rows(6);
  auto errors = parallel_for(6, f.jobs, [&](std::size_t i) {
    ScenarioConfig c = cfg;
    c.gpsa = static_cast<Formulation>(i + 1);
    const auto t0 = std::chrono::steady_clock::now();
    rows[i].run = heuristic::run_routed(l.inst, routing, c);
    rows[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows[i].report = validate::validate(rows[i].run.stage2.allocation, rows[i].run.routing, l.inst,
                                        validate::options_for(c.gpsa, c.min_margin));
  });

  int code = kOk;
  auto csv = open_out(dir / "compare_gpsa.csv");
  auto log = open_out(dir / "runtime.log");
  write_context_comment(csv, l.ctx);
  write_context_comment(log, l.ctx);
  csv << "formulation,status,requests,objective,relaxed_objective,outer_iterations,solves,total_power_w,"
         "total_noise_w,mean_approx_error,max_approx_error,min_slack,violations\n";
  std::vector<gpsa::SizeReport> sizes;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto name = to_string(static_cast<Formulation>(i + 1));
    csv << name << ',';
    if (errors[i]) {
      int c = kFailure;
      const auto msg = describe(errors[i], &c);
      if (code == kOk) code = c;
      csv << "error: " << csv_text(msg) << ",,,,,,,,,,,\n";
      log << name << " failed: " << msg << '\n';
      continue;
    }
    const auto& r = rows[i];
    const auto& t = r.run.stage2.trace;
    csv << "ok," << r.report.requests.size() << ',' << num(t.final_objective) << ',' << num(t.relaxed_objective)
        << ',' << t.outer_iterations() << ',' << t.solves << ',' << num(r.report.total_power) << ','
        << num(r.report.total_noise) << ',' << num(r.report.mean_approx_error) << ','
        << num(r.report.max_approx_error) << ',' << num(r.report.min_slack) << ',' << r.report.violations.size()
        << '\n';
    log << name << " requests " << r.report.requests.size() << " solves " << t.solves << " seconds "
        << num(r.seconds) << '\n';
    sizes.push_back(r.run.stage2.built.sizes);
  }
  finish(csv, dir / "compare_gpsa.csv");
  finish(log, dir / "runtime.log");
  auto sz = open_out(dir / "sizes.csv");
  write_sizes_csv(sz, &l.ctx, sizes);
  finish(sz, dir / "sizes.csv");
  out << "wrote " << (dir / "compare_gpsa.csv").string() << " and " << (dir / "runtime.log").string() << '\n';
  return code;
}

int cmd_characterize(const Flags& f, double step, double max, std::ostream& out) {
  if (!(step > 0.0) || !(max > 0.0) || max > 2.0) throw InvalidArgument("need 0 < step and 0 < max < 2");
  const fs::path dir = prepare_out(f.out);
  auto curves = open_out(dir / "curves.csv");
  write_curves_csv(curves, step, max);
  finish(curves, dir / "curves.csv");
  auto fits = open_out(dir / "fits.csv");
  write_fits_csv(fits);
  finish(fits, dir / "fits.csv");
  auto fc = open_out(dir / "fit_curves.csv");
  write_fit_curves_csv(fc, 0.05);
  finish(fc, dir / "fit_curves.csv");
  out << "wrote curves.csv, fits.csv and fit_curves.csv to " << dir.string() << '\n';
  return kOk;
}

int cmd_count(const Flags& f, long long q, long long links, std::optional<long long> nodes, std::ostream& out) {
  if (q < 1 || links < 1) throw InvalidArgument("--q and --l must be positive");
  auto counts = gpsa::count_table(static_cast<std::size_t>(q), static_cast<std::size_t>(links));
  if (nodes) {
    if (*nodes < 2) throw InvalidArgument("--v must be at least 2");
    for (RtoMethod m : {RtoMethod::spr, RtoMethod::scpr, RtoMethod::scprr}) {
      counts.push_back(gpsa::count_routing(m, static_cast<std::size_t>(q), static_cast<std::size_t>(links),
                                           static_cast<std::size_t>(*nodes)));
    }
  }
  const fs::path dir = prepare_out(f.out);
  auto csv = open_out(dir / "counts.csv");
  write_counts_csv(csv, counts);
  finish(csv, dir / "counts.csv");
  write_counts_csv(out, counts);
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power and spectrum planning for elastic optical networks"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "Plan one scenario: allocation.csv, validation.json, trace.json, sizes.csv");
  add_common(run, f, true);

  std::vector<double> margins{1.0, 2.0, 4.0};
  auto* sweep = app.add_subcommand("sweep-margin", "Plan one routed request set at several margins");
  add_common(sweep, f, true);
  sweep->add_option("--margins", margins, "Margins to evaluate")->delimiter(',')->capture_default_str();

  int instances = 10;
  auto* crto = app.add_subcommand("compare-rto", "SPR, SCPR and SCPRR on seeded request subsets");
  add_common(crto, f, true);
  crto->add_option("--instances", instances, "Number of seeded subsets")->capture_default_str();

  auto* cgpsa = app.add_subcommand("compare-gpsa", "All six formulations on one routed request set");
  add_common(cgpsa, f, true);

  double step = 0.01, max = 1.2;
  auto* approx = app.add_subcommand("characterize-approx", "Kernel approximation and required-OSNR fit data");
  add_common(approx, f, false);
  approx->add_option("--step", step, "Grid step of Delta/d")->capture_default_str();
  approx->add_option("--max", max, "Largest Delta/d")->capture_default_str();

  long long q = 0, links = 0;
  std::optional<long long> nodes;
  auto* count = app.add_subcommand("count-formulations", "Variable and constraint counts per formulation");
  add_common(count, f, false);
  count->add_option("--q", q, "Number of requests")->required();
  count->add_option("--l", links, "Number of links")->required();
  count->add_option("--v", nodes, "Number of nodes; adds the routing programs");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(f, out);
    if (sweep->parsed()) return cmd_sweep_margin(f, margins, out);
    if (crto->parsed()) return cmd_compare_rto(f, instances, out);
    if (cgpsa->parsed()) return cmd_compare_gpsa(f, out);
    if (approx->parsed()) return cmd_characterize(f, step, max, out);
    if (count->parsed()) return cmd_count(f, q, links, nodes, out);
  } catch (const std::exception& e) {
    err << "eonplan: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace eon::cli
