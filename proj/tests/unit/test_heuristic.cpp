#include <doctest.h>

#include <cmath>

#include "eon/error.hpp"
#include "eon/heuristic.hpp"
#include "oracles.hpp"

using namespace eon;
using namespace eon::heuristic;

namespace {

gpsa::PsaInstance small_psa(const NetworkInstance& net, int requests, std::uint64_t seed, double margin = 1.0) {
  const auto req = select_requests(partition_traffic(net.demands, 100.0), requests, seed);
  ScenarioConfig cfg;
  cfg.min_margin = margin;
  return gpsa::make_psa_instance(net, rto::route_spr(net, req), cfg);
}

bool tabulated(double c) { return ModulationTable::standard().contains(c); }

}  // namespace

TEST_CASE("rounding takes the first table value inside the neighbourhood") {
  CHECK(round_to_table(4.05, 0.1) == 4.0);
  CHECK_FALSE(round_to_table(4.5, 0.1).has_value());
  CHECK(round_to_table(4.5, 0.5) == 4.0);
  // 4 and 6 are equidistant; the ascending scan picks 4.
  CHECK(round_to_table(5.0, 1.0) == 4.0);
  CHECK(round_to_table(11.95, 0.1) == 12.0);
  CHECK(round_to_table(1.95, 0.1) == 2.0);
  CHECK_FALSE(round_to_table(13.0, 0.5).has_value());
}

TEST_CASE("fixing with the table requirement rescales only the QoS row") {
  const auto net = oracle::cost239(10.0);
  const auto psa = small_psa(net, 3, 4);
  const auto built = gpsa::build(psa, Formulation::gpsa1);
  GpProgram fit = built.program;
  GpProgram tab = built.program;
  fix_efficiency(fit, built, 0, 8.0, ThetaOnFix::fit);
  fix_efficiency(tab, built, 0, 8.0, ThetaOnFix::table);
  CHECK(fit.variables()[static_cast<std::size_t>(built.vars.efficiency[0])].fixed == 8.0);
  std::vector<double> x;
  for (const auto& v : built.program.variables()) x.push_back(v.fixed.value_or(v.initial));
  x[static_cast<std::size_t>(built.vars.efficiency[0])] = 8.0;
  const auto row = built.vars.qos_row[0];
  const double ratio = tab.constraints()[row].lhs.evaluate(x) / fit.constraints()[row].lhs.evaluate(x);
  CHECK(ratio == doctest::Approx(32.6 / physics::required_osnr(8.0, physics::ThetaFit::fit1)));
  for (std::size_t k = 0; k < fit.constraint_count(); ++k) {
    if (k == row) continue;
    CHECK(tab.constraints()[k].lhs.evaluate(x) == doctest::Approx(fit.constraints()[k].lhs.evaluate(x)));
  }
}

TEST_CASE("relax-round-fix ends with every efficiency tabulated") {
  const auto net = oracle::cost239(10.0);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto psa = small_psa(net, 10, seed);
    for (auto f : {Formulation::gpsa1, Formulation::gpsa4, Formulation::gpsa6}) {
      Stage2Options opt;
      opt.formulation = f;
      const auto r = run_stage2(psa, opt);
      CHECK(r.solution.optimal());
      CHECK(r.trace.outer_iterations() >= 1);
      CHECK(r.trace.outer_iterations() <= psa.size());
      std::size_t fixed = 0;
      for (const auto& it : r.trace.iterations) {
        CHECK_FALSE(it.fixes.empty());
        fixed += it.fixes.size();
        for (const auto& fx : it.fixes) CHECK((std::abs(fx.rounded - fx.relaxed) <= fx.neighborhood + 1e-6 || fx.lowered));
      }
      CHECK(fixed == psa.size());
      for (const auto& q : r.allocation.requests) CHECK(tabulated(q.efficiency));
      CHECK(r.allocation.violations.empty());
      CHECK(r.trace.final_objective == doctest::Approx(r.solution.objective));
      for (const auto& v : r.final_program.variables()) {
        if (v.name[0] == 'c') CHECK(v.fixed.has_value());
      }
    }
  }
}

TEST_CASE("under the fit requirement the relaxed objective is a lower bound") {
  // The tabulated requirement can sit below the fit, so only the fit keeps
  // every fixed program a restriction of the relaxed one.
  const auto net = oracle::cost239(10.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Stage2Options opt;
    opt.theta_on_fix = ThetaOnFix::fit;
    const auto r = run_stage2(small_psa(net, 10, seed), opt);
    CHECK(r.trace.relaxed_objective <= r.trace.final_objective * (1 + 1e-6));
  }
}

TEST_CASE("stage two rejects a nonpositive precision") {
  const auto net = oracle::cost239(10.0);
  const auto psa = small_psa(net, 3, 1);
  Stage2Options opt;
  opt.precision = 0.0;
  CHECK_THROWS_AS(run_stage2(psa, opt), InvalidArgument);
}

TEST_CASE("an unreachable margin raises a stage error with the trace") {
  const auto net = oracle::cost239(10.0);
  const auto psa = small_psa(net, 6, 2, 1e6);
  try {
    run_stage2(psa, Stage2Options{});
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.status() == GpStatus::infeasible);
    CHECK(e.stage().find("relaxed") != std::string::npos);
  }
}

TEST_CASE("end-to-end run is deterministic") {
  const auto net = oracle::cost239(10.0);
  ScenarioConfig cfg;
  cfg.max_requests = 12;
  cfg.seed = 5;
  cfg.rto = RtoMethod::scpr;
  const auto a = run(net, cfg);
  const auto b = run(net, cfg);
  REQUIRE(a.stage2.allocation.requests.size() == 12);
  CHECK(a.stage2.trace.final_objective == b.stage2.trace.final_objective);
  for (std::size_t q = 0; q < 12; ++q) {
    CHECK(a.stage2.allocation.requests[q].power == b.stage2.allocation.requests[q].power);
    CHECK(a.stage2.allocation.requests[q].efficiency == b.stage2.allocation.requests[q].efficiency);
  }
  CHECK(prepare_requests(net, cfg).size() == 12);
}

TEST_CASE("lowering recovers rounds that rounding up made infeasible") {
  // At margin 4 some relaxed efficiencies round up past what the OSNR allows.
  const auto net = oracle::cost239(10.0);
  ScenarioConfig cfg;
  cfg.max_requests = 46;
  cfg.min_margin = 4.0;
  const auto r = run(net, cfg);
  CHECK(r.stage2.solution.optimal());
  bool lowered = false;
  for (const auto& it : r.stage2.trace.iterations) {
    for (const auto& f : it.fixes) lowered = lowered || f.lowered;
  }
  CHECK(lowered);

  Stage2Options strict;
  strict.lower_on_infeasible = false;
  CHECK_THROWS_AS(run_stage2(r.psa, strict), StageError);
}
