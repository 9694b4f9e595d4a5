// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Reference values come from the oracles in tests/support, never from the
// code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eon/gp.hpp"
#include "eon/gpsa.hpp"
#include "eon/heuristic.hpp"
#include "eon/physics.hpp"
#include "eon/rto.hpp"
#include "eon/validate.hpp"
#include "oracles.hpp"

#ifdef EON_HAVE_CLI
#include "cli.hpp"
#endif

namespace fs = std::filesystem;
namespace ph = eon::physics;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    s_ << v;
    return *this;
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

eon::ScenarioConfig desk_config(std::uint64_t seed) {
  eon::ScenarioConfig cfg;
  cfg.max_requests = 46;
  cfg.seed = seed;
  return cfg;
}

// 1. Kernel approximation errors over x in [0.01, 1.2].
Outcome criterion1() {
  const auto t0 = Clock::now();
  double max1 = 0.0, max3 = 0.0;
  for (int i = 1; i <= 120; ++i) {
    const double x = i * 0.01;
    const long double e = oracle::kernel(x);
    max1 = std::max(max1, static_cast<double>(std::fabs((ph::xci_kernel_approx(x, 1) - e) / e)));
    max3 = std::max(max3, static_cast<double>(std::fabs((ph::xci_kernel_approx(x, 3) - e) / e)));
  }
  const long double e1 = oracle::kernel(1.0L);
  const double spot1 = 100.0 * static_cast<double>((ph::xci_kernel_approx(1.0, 1) - e1) / e1);
  const double spot3 = 100.0 * static_cast<double>((ph::xci_kernel_approx(1.0, 3) - e1) / e1);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = max1 <= 0.15 && max3 <= 0.03 && std::fabs(spot1 + 9.0) <= 0.2 && std::fabs(spot3 + 0.36) <= 0.2 &&
           secs < 1.0;
  o.detail = (Detail() << "max error order1 " << 100 * max1 << "%, order3 " << 100 * max3 << "%; at x=1 " << spot1
                       << "% and " << spot3 << "%; " << secs << " s")
                 .str();
  return o;
}

// 2. Required-OSNR fits against independent recomputation and the table.
Outcome criterion2() {
  const auto t0 = Clock::now();
  const long double f3 = std::pow(1.0L + 0.0557L * 12.0L, 9.4691L);
  const long double f1 = 0.0351L * std::pow(12.0L, 3.292L);
  const double lib3 = ph::required_osnr(12.0, ph::ThetaFit::fit3);
  const double lib1 = ph::required_osnr(12.0, ph::ThetaFit::fit1);
  const bool exact3 = std::fabs(lib3 - f3) / f3 <= 1e-6;
  const bool exact1 = std::fabs(lib1 - f1) / f1 <= 1e-6;
  const bool near3 = std::fabs(lib3 - 127.2) / 127.2 <= 5e-3;
  const bool near1 = std::fabs(lib1 - 125.3) / 125.3 <= 5e-3;
  double err[3] = {0, 0, 0};
  const ph::ThetaFit fits[3] = {ph::ThetaFit::fit1, ph::ThetaFit::fit2, ph::ThetaFit::fit3};
  for (const auto& s : oracle::modulation_samples()) {
    for (int k = 0; k < 3; ++k) {
      err[k] = std::max(err[k], std::fabs(ph::required_osnr(s.efficiency, fits[k]) - s.osnr) / s.osnr);
    }
  }
  const bool ordered = err[2] <= err[1] && err[1] <= err[0];
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = exact3 && exact1 && near3 && near1 && ordered && secs < 1.0;
  o.detail = (Detail() << "fit3(12) " << lib3 << ", fit1(12) " << lib1 << "; max error fit1 " << err[0] << ", fit2 "
                       << err[1] << ", fit3 " << err[2] << "; " << secs << " s")
                 .str();
  return o;
}

// 3. Formulation size table through the count command.
Outcome criterion3() {
  Outcome o;
#ifdef EON_HAVE_CLI
  const auto dir = fs::temp_directory_path() / "eon_acceptance_count";
  int mismatches = 0;
  for (auto [q, l] : {std::pair<long long, long long>{1, 4}, {10, 20}, {46, 52}}) {
    std::vector<std::string> args{"eonplan", "count-formulations", "--q", std::to_string(q), "--l", std::to_string(l),
                                  "--out", dir.string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (eon::cli::main(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
      o.pass = false;
      o.detail = err.str();
      return o;
    }
    std::vector<std::string> expected{"formulation,variables,constraints",
                                      "MINLPPSA," + std::to_string(4 * q + 1) + "," + std::to_string(3 * q + q * l + 1)};
    for (int f = 1; f <= 6; ++f) {
      const long long vars = q * q + (f >= 5 ? 5 : 4) * q + 1;
      const long long cons = (f >= 5 ? 4 : 3) * q + 3 * q * l + 1;
      expected.push_back("GPSA" + std::to_string(f) + "," + std::to_string(vars) + "," + std::to_string(cons));
    }
    std::istringstream in(out.str());
    std::vector<std::string> got;
    for (std::string line; std::getline(in, line);) got.push_back(line);
    if (got != expected) ++mismatches;
  }
  o.pass = mismatches == 0;
  o.detail = (Detail() << "3 size points, " << mismatches << " mismatching tables").str();
#else
  o.pass = false;
  o.detail = "command-line tool not built";
#endif
  return o;
}

// 4. GP solver: AM-GM optimum and convexified gradients.
Outcome criterion4() {
  eon::GpProgram g;
  const auto x = g.add_variable("x");
  const auto y = g.add_variable("y");
  g.set_objective(eon::Monomial(1, {{x, 1}}) + eon::Monomial(1, {{y, 1}}));
  g.add_constraint("amgm", eon::Monomial(1, {{x, -1}, {y, -1}}));
  const auto s = eon::solve(g);
  const bool amgm = s.optimal() && std::fabs(s.objective - 2.0) <= 1e-6;

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nvars(1, 8), nterms(1, 6);
  std::uniform_real_distribution<double> expo(-3.0, 3.0), logc(-6.0, 6.0), point(-1.5, 1.5);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    eon::GpProgram p;
    const int n = nvars(rng);
    for (int v = 0; v < n; ++v) p.add_variable("v" + std::to_string(v));
    eon::Posynomial row;
    const int terms = nterms(rng);
    for (int t = 0; t < terms; ++t) {
      eon::Monomial m(std::exp(logc(rng)));
      for (int v = 0; v < n; ++v) m.pow(v, expo(rng));
      row += m;
    }
    p.set_objective(eon::Monomial(1, {{0, 1}}));
    p.add_constraint("r", row);
    const auto cp = eon::convexify(p);
    const auto& f = cp.constraints.at(0);
    std::vector<double> u(cp.n());
    for (auto& ui : u) ui = point(rng);
    std::vector<double> grad(cp.n());
    f.evaluate(u, &grad);
    bool ok = true;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double h = 1e-6;
      auto up = u, dn = u;
      up[k] += h;
      dn[k] -= h;
      const double fd = (f.evaluate(up) - f.evaluate(dn)) / (2 * h);
      const double rel = std::fabs(grad[k] - fd) / std::max(1.0, std::fabs(fd));
      worst = std::max(worst, rel);
      ok = ok && rel <= 1e-5;
    }
    if (!ok) ++failures;
  }
  Outcome o;
  o.pass = amgm && failures == 0;
  o.detail = (Detail() << "AM-GM objective " << s.objective << " (" << eon::to_string(s.status) << "); "
                       << failures << "/100 gradient failures, worst relative difference " << worst)
                 .str();
  return o;
}

// 5. Routing optimality against exhaustive enumeration.
Outcome criterion5() {
  const auto t0 = Clock::now();
  const auto net = oracle::cost239(10.0);
  const int n = static_cast<int>(net.topology.node_count());
  int pairs = 0, spr_bad = 0;
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : oracle::all_simple_paths(net.topology, s, t)) best = std::min(best, p.length);
      if (std::fabs(eon::rto::shortest_path(net.topology, s, t).length_km - best) > 1e-9 * best) ++spr_bad;
      ++pairs;
    }
  }
  eon::rto::SearchOptions opt;
  opt.k_paths = 1 << 20;
  int instances = 0, quad_bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto topo = oracle::random_topology(5 + static_cast<int>(seed % 3), 2 + static_cast<int>(seed % 2), 40, 1200,
                                              seed);
    const auto inst = eon::make_instance(topo, {}, eon::PhysicsConstants{});
    const auto req = oracle::random_requests(inst.topology, 2 + static_cast<int>(seed % 3), seed + 100);
    for (bool weighted : {false, true}) {
      const auto sol = weighted ? eon::rto::route_scprr(inst, req, opt) : eon::rto::route_scpr(inst, req, opt);
      const auto brute = oracle::brute_force_route(inst.topology, req, weighted);
      if (std::fabs(sol.goal - brute.goal) > 1e-9 * std::max(1.0, brute.goal)) ++quad_bad;
    }
    ++instances;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = pairs == 110 && spr_bad == 0 && instances >= 20 && quad_bad == 0 && secs < 30.0;
  o.detail = (Detail() << "SPR " << pairs - spr_bad << "/" << pairs << " pairs optimal; SCPR/SCPRR "
                       << 2 * instances - quad_bad << "/" << 2 * instances << " brute-force matches; " << secs << " s")
                 .str();
  return o;
}

// 6. Relax-round-fix against the exhaustive efficiency search.
Outcome criterion6() {
  int instances = 0, within = 0, iter_ok = 0;
  double worst = 0.0;
  std::string failures;
  for (std::uint64_t seed = 1; instances < 12 && seed <= 40; ++seed) {
    const auto topo = oracle::random_topology(5, 2, 100, 1500, seed);
    const auto inst = eon::make_instance(topo, {}, eon::PhysicsConstants{});
    const int nq = 1 + static_cast<int>(seed % 3);
    const auto req = oracle::random_requests(inst.topology, nq, seed * 31);
    const auto routing = eon::rto::route_spr(inst, req);
    const auto psa = eon::gpsa::make_psa_instance(inst, routing, eon::ScenarioConfig{});
    double brute = 0.0;
    try {
      brute = eon::validate::brute_force_psa(psa, eon::Formulation::gpsa1, eon::ThetaOnFix::table).objective;
    } catch (const eon::InfeasibleError&) {
      continue;  // no integer point: nothing to compare against
    }
    ++instances;
    try {
      const auto r = eon::heuristic::run_stage2(psa, eon::heuristic::Stage2Options{});
      const double gap = r.trace.final_objective / brute - 1.0;
      worst = std::max(worst, gap);
      if (gap <= 0.02) ++within;
      else failures += (Detail() << " seed " << seed << " gap " << 100 * gap << "%;").str();
      if (r.trace.outer_iterations() <= psa.size()) ++iter_ok;
    } catch (const eon::Error& e) {
      failures += (Detail() << " seed " << seed << ": " << e.what() << ";").str();
    }
  }
  Outcome o;
  o.pass = instances >= 10 && within == instances && iter_ok == instances;
  o.detail = (Detail() << within << "/" << instances << " within 2% (worst " << 100 * worst << "%), outer iterations <= |Q| in "
                       << iter_ok << "/" << instances << failures)
                 .str();
  return o;
}

// 7. Exact-model QoS of every allocation and the order-3 accuracy gain.
Outcome criterion7() {
  const auto t0 = Clock::now();
  const auto net = oracle::cost239(10.0);
  int allocations = 0, sound = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  int better[3] = {0, 0, 0};
  double sum_gap[6] = {0, 0, 0, 0, 0, 0};
  const int seeds = 10;
  std::string failures;
  for (int s = 1; s <= seeds; ++s) {
    eon::ScenarioConfig cfg;
    cfg.max_requests = 8 + (s - 1) % 9;
    cfg.seed = static_cast<std::uint64_t>(s);
    double gap[6] = {0, 0, 0, 0, 0, 0};
    for (int f = 1; f <= 6; ++f) {
      cfg.gpsa = static_cast<eon::Formulation>(f);
      ++allocations;
      try {
        const auto run = eon::heuristic::run(net, cfg);
        const auto rep = eon::validate::validate(run.stage2.allocation, run.routing, net,
                                                 eon::validate::options_for(cfg.gpsa, cfg.min_margin));
        bool ok = !rep.requests.empty();
        for (const auto& q : rep.requests) {
          // Independent requirement: margin times the tabulated OSNR.
          double theta = 0.0;
          for (const auto& m : oracle::modulation_samples()) {
            if (m.efficiency == q.efficiency) theta = m.osnr;
          }
          ok = ok && theta > 0.0 && q.osnr_exact >= cfg.min_margin * theta * (1 - 0.05);
          if (theta > 0.0) min_slack = std::min(min_slack, q.osnr_exact / (cfg.min_margin * theta));
        }
        if (ok) ++sound;
        else failures += (Detail() << " seed " << s << " gpsa" << f << " unsound;").str();
        gap[f - 1] = rep.mean_approx_error;
      } catch (const eon::Error& e) {
        failures += (Detail() << " seed " << s << " gpsa" << f << ": " << e.what() << ";").str();
        gap[f - 1] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    for (int k = 0; k < 3; ++k) {
      if (gap[2 * k + 1] < gap[2 * k]) ++better[k];
      sum_gap[2 * k] += gap[2 * k];
      sum_gap[2 * k + 1] += gap[2 * k + 1];
    }
  }
  const double secs = seconds_since(t0);
  bool paired = true;
  for (int k = 0; k < 3; ++k) paired = paired && better[k] == seeds;
  Outcome o;
  o.pass = sound == allocations && paired && secs < 300.0;
  Detail d;
  d << sound << "/" << allocations << " allocations sound (min exact/required " << min_slack << "); order-3 gap smaller in ";
  for (int k = 0; k < 3; ++k) {
    d << (k ? ", " : "") << "gpsa" << 2 * k + 2 << " vs gpsa" << 2 * k + 1 << " " << better[k] << "/" << seeds
      << " (mean " << sum_gap[2 * k + 1] / seeds << " vs " << sum_gap[2 * k] / seeds << ")";
  }
  d << "; " << secs << " s" << failures;
  o.detail = d.str();
  return o;
}

// 8. All six formulations complete on the 46-request desk instance.
Outcome criterion8() {
  Outcome o;
#ifdef EON_HAVE_CLI
  const auto dir = fs::temp_directory_path() / "eon_acceptance_gpsa";
  fs::remove_all(dir);
  std::vector<std::string> args{"eonplan", "compare-gpsa", "--out", dir.string()};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = eon::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  std::ifstream log(dir / "runtime.log");
  int completed = 0;
  std::string timings;
  for (std::string line; std::getline(log, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find("requests 46 ") != std::string::npos && line.find(" seconds ") != std::string::npos) ++completed;
    timings += " [" + line + "]";
  }
  o.pass = code == 0 && completed == 6;
  o.detail = (Detail() << completed << "/6 formulations completed at |Q|=46:" << timings).str();
#else
  o.pass = false;
  o.detail = "command-line tool not built";
#endif
  return o;
}

// 9. Mean rate per resource does not increase with the margin.
Outcome criterion9() {
  const auto net = oracle::cost239(10.0);
  Outcome o;
  try {
    const auto pts = eon::validate::sweep_margin(net, desk_config(1), {1.0, 2.0, 4.0});
    Detail d;
    bool mono = true;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      d << (k ? ", " : "") << "M=" << pts[k].margin << ": " << pts[k].report.mean_rate_per_resource;
      if (k > 0) mono = mono && pts[k].report.mean_rate_per_resource <= pts[k - 1].report.mean_rate_per_resource;
    }
    o.pass = mono && pts.size() == 3;
    o.detail = d.str() + " (1/(W s))";
  } catch (const eon::Error& e) {
    o.pass = false;
    o.detail = e.what();
  }
  return o;
}

// 10. SCPRR against SPR in total power and total noise.
Outcome criterion10() {
  const auto net = oracle::cost239(10.0);
  int power_le = 0, noise_le = 0, both = 0, done = 0;
  std::string failures;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto cfg = desk_config(seed);
    double power[2] = {0, 0}, noise[2] = {0, 0};
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      cfg.rto = k == 0 ? eon::RtoMethod::spr : eon::RtoMethod::scprr;
      try {
        const auto run = eon::heuristic::run(net, cfg);
        const auto rep = eon::validate::validate(run.stage2.allocation, run.routing, net,
                                                 eon::validate::options_for(cfg.gpsa, cfg.min_margin));
        power[k] = rep.total_power;
        noise[k] = rep.total_noise;
      } catch (const eon::Error& e) {
        ok = false;
        failures += (Detail() << " seed " << seed << ": " << e.what() << ";").str();
      }
    }
    if (!ok) continue;
    ++done;
    const bool p = power[1] <= power[0];
    const bool n = noise[1] <= noise[0];
    power_le += p;
    noise_le += n;
    both += p && n;
  }
  Outcome o;
  o.pass = both >= 7;
  o.detail = (Detail() << "SCPRR <= SPR in power " << power_le << "/" << done << ", in noise " << noise_le << "/" << done
                       << ", both " << both << "/" << done << failures)
                 .str();
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << o.detail << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
