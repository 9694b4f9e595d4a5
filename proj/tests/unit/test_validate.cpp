#include <doctest.h>

#include <sstream>

#include "eon/error.hpp"
#include "eon/validate.hpp"
#include "oracles.hpp"

using namespace eon;
using namespace eon::validate;

namespace {

struct Planned {
  NetworkInstance net = oracle::cost239(10.0);
  heuristic::RunResult run;

  explicit Planned(int requests, std::uint64_t seed = 3) {
    ScenarioConfig cfg;
    cfg.max_requests = requests;
    cfg.seed = seed;
    run = heuristic::run(net, cfg);
  }
};

bool has_kind(const ValidationReport& r, const std::string& kind) {
  for (const auto& v : r.violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a planned allocation is admissible under the exact model") {
  Planned p(10);
  const auto r = eon::validate::validate(p.run.stage2.allocation, p.run.routing, p.net, options_for(Formulation::gpsa1, 1.0));
  CHECK(r.admissible());
  CHECK(r.requests.size() == 10);
  CHECK(r.min_slack >= 0.95);
  double power = 0.0;
  for (const auto& q : r.requests) {
    power += q.power;
    CHECK(q.osnr_exact > 0.0);
    CHECK(q.slack == doctest::Approx(q.osnr_exact / q.required));
    CHECK(q.noise.ase > 0.0);
  }
  CHECK(r.total_power == doctest::Approx(power));
  CHECK(r.mean_approx_error <= r.max_approx_error);
}

TEST_CASE("overlapping channels are reported, not thrown") {
  Planned p(10);
  auto a = p.run.stage2.allocation;
  // Move a channel onto a neighbour that shares one of its links.
  int moved = -1, onto = -1;
  for (const auto& ch : p.run.routing.channel_order) {
    if (ch.size() >= 2) {
      moved = ch[1];
      onto = ch[0];
      break;
    }
  }
  REQUIRE(moved >= 0);
  a.requests[static_cast<std::size_t>(moved)].frequency = a.requests[static_cast<std::size_t>(onto)].frequency;
  const auto r = eon::validate::validate(a, p.run.routing, p.net, options_for(Formulation::gpsa1, 1.0));
  CHECK_FALSE(r.admissible());
  CHECK(has_kind(r, "overlap"));
  CHECK(has_kind(r, "xci-domain"));
}

TEST_CASE("band and lower-edge breaches are reported") {
  Planned p(6);
  auto a = p.run.stage2.allocation;
  a.requests[0].frequency = 0.0;
  a.requests[1].frequency = p.net.constants.bandwidth_hz();
  const auto r = eon::validate::validate(a, p.run.routing, p.net, options_for(Formulation::gpsa1, 1.0));
  CHECK(has_kind(r, "lower-edge"));
  CHECK(has_kind(r, "band"));
}

TEST_CASE("a starved channel violates QoS") {
  Planned p(6);
  auto a = p.run.stage2.allocation;
  a.requests[2].power *= 1e-3;
  const auto r = eon::validate::validate(a, p.run.routing, p.net, options_for(Formulation::gpsa1, 1.0));
  CHECK(has_kind(r, "qos"));
}

TEST_CASE("mismatched allocation and routing are rejected") {
  Planned p(6);
  auto a = p.run.stage2.allocation;
  a.requests.pop_back();
  CHECK_THROWS_AS(eon::validate::validate(a, p.run.routing, p.net, ValidateOptions{}), InvalidArgument);
}

TEST_CASE("request CSV has a header and one row per request") {
  Planned p(5);
  const auto r = eon::validate::validate(p.run.stage2.allocation, p.run.routing, p.net, ValidateOptions{});
  std::ostringstream out;
  write_requests_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  std::getline(in, line);
  CHECK(line.rfind("request,spans,", 0) == 0);
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 5);
}

TEST_CASE("exhaustive efficiency search") {
  const auto net = oracle::cost239(10.0);
  const auto req = select_requests(partition_traffic(net.demands, 100.0), 2, 6);
  const auto routing = rto::route_spr(net, req);
  const auto psa = gpsa::make_psa_instance(net, routing, ScenarioConfig{});
  const auto b = brute_force_psa(psa, Formulation::gpsa1, ThetaOnFix::table);
  CHECK(b.solves == 36);
  CHECK(b.feasible >= 1);
  for (double c : b.efficiencies) CHECK(ModulationTable::standard().contains(c));
  CHECK(b.allocation.violations.empty());

  const auto h = heuristic::run_stage2(psa, heuristic::Stage2Options{});
  CHECK(h.trace.final_objective >= b.objective * (1 - 1e-6));

  const auto big = select_requests(partition_traffic(net.demands, 100.0), 5, 6);
  const auto psa5 = gpsa::make_psa_instance(net, rto::route_spr(net, big), ScenarioConfig{});
  CHECK_THROWS_AS(brute_force_psa(psa5, Formulation::gpsa1, ThetaOnFix::table), InvalidArgument);
}

TEST_CASE("margin sweep keeps the routing fixed") {
  const auto net = oracle::cost239(10.0);
  ScenarioConfig cfg;
  cfg.max_requests = 10;
  const auto pts = sweep_margin(net, cfg, {1.0, 2.0});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].report.span_usage == pts[1].report.span_usage);
  CHECK(pts[1].report.min_margin == 2.0);
  for (const auto& q : pts[1].report.requests) CHECK(q.margin >= 2.0 * (1 - 1e-6));
}
