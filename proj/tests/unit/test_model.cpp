#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eon/error.hpp"
#include "eon/model.hpp"
#include "oracles.hpp"

using namespace eon;

TEST_CASE("partition splits demands into full-capacity parts and a remainder") {
  const std::vector<Demand> d{{0, 1, 250.0}, {1, 0, 300.0}, {0, 2, 40.0}};
  const auto r = partition_traffic(d, 100.0);
  REQUIRE(r.size() == 7);
  CHECK(r[0].rate_gbps == 100.0);
  CHECK(r[1].rate_gbps == 100.0);
  CHECK(r[2].rate_gbps == doctest::Approx(50.0));
  for (int k = 3; k < 6; ++k) CHECK(r[static_cast<std::size_t>(k)].rate_gbps == 100.0);
  CHECK(r[6].rate_gbps == 40.0);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i].id == static_cast<int>(i));
  CHECK_THROWS_AS(partition_traffic(d, 0.0), InvalidArgument);
}

TEST_CASE("partition tolerates representation noise at exact multiples") {
  const std::vector<Demand> d{{0, 1, 0.1 * 3 * 1000.0}};
  CHECK(partition_traffic(d, 100.0).size() == 3);
}

TEST_CASE("derived coefficients match a direct recomputation") {
  const PhysicsConstants c;
  const auto d = derived_constants(c);
  const long double pi = 3.141592653589793238L;
  const long double alpha = 0.22L / (10.0L * std::log10(std::exp(1.0L))) / 1000.0L;
  const long double beta2 = 20393e-30L;
  const long double gamma = 1.3e-3L;
  const long double sigma = 3 * gamma * gamma / (2 * alpha * pi * beta2);
  const long double iota = pi * pi * beta2 / (2 * alpha);
  const long double zeta = (std::exp(alpha * 80e3L) - 1) * 6.62607015e-34L * 193.55e12L * 1.58L;
  CHECK(d.sigma == doctest::Approx(static_cast<double>(sigma)).epsilon(1e-12));
  CHECK(d.iota == doctest::Approx(static_cast<double>(iota)).epsilon(1e-12));
  CHECK(d.zeta == doctest::Approx(static_cast<double>(zeta)).epsilon(1e-12));
}

TEST_CASE("constants validation rejects nonphysical values") {
  PhysicsConstants c;
  c.span_km = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.precision = -0.1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("modulation table holds the six formats") {
  const auto& t = ModulationTable::standard();
  REQUIRE(t.entries().size() == oracle::modulation_samples().size());
  for (const auto& s : oracle::modulation_samples()) {
    REQUIRE(t.required_osnr(s.efficiency).has_value());
    CHECK(*t.required_osnr(s.efficiency) == s.osnr);
  }
  CHECK_FALSE(t.contains(5.0));
  CHECK(t.min_efficiency() == 2.0);
  CHECK(t.max_efficiency() == 12.0);
  CHECK_THROWS_AS(ModulationTable({{4, 7.0}, {2, 3.0}}), InvalidArgument);
}

TEST_CASE("topology parser accepts nodes, links and bilinks") {
  std::istringstream in("# comment\nnode 10 A\nnode 20 B\nnode 30\nlink 10 20 100\nbilink 20 30 81 # tail\n");
  const auto t = parse_topology(in);
  CHECK(t.node_count() == 3);
  CHECK(t.link_count() == 3);
  CHECK(t.index_of(20) == 1);
  CHECK_FALSE(t.index_of(40).has_value());
  CHECK(t.find_link(0, 1).has_value());
  CHECK_FALSE(t.find_link(1, 0).has_value());
  CHECK(t.find_link(2, 1).has_value());

  std::ostringstream out;
  write_topology(out, t);
  std::istringstream back(out.str());
  const auto t2 = parse_topology(back);
  CHECK(t2.link_count() == 3);
  CHECK(t2.links()[2].length_km == 81.0);
}

TEST_CASE("topology parser reports malformed input") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_topology(in);
  };
  CHECK_THROWS_AS(parse("node 1\nlink 1 2 10\n"), ParseError);
  CHECK_THROWS_AS(parse("node 1\nnode 2\nlink 1 2 abc\n"), ParseError);
  CHECK_THROWS_AS(parse("vertex 1\n"), ParseError);
  CHECK_THROWS_AS(parse("node 1\nnode 1\n"), Error);
  CHECK_THROWS_AS(parse("node 1\nnode 2\nlink 1 2 -5\n"), Error);
  CHECK_THROWS_AS(read_topology("/nonexistent/topology"), IoError);
}

TEST_CASE("bundled Cost239 data") {
  const auto inst = oracle::cost239(1.0);
  CHECK(inst.topology.node_count() == 11);
  CHECK(inst.topology.link_count() == 52);
  double total = 0.0;
  for (const auto& d : inst.demands) total += d.rate_gbps;
  CHECK(total == doctest::Approx(1000.0));
  // Every link is present in both directions with equal length.
  for (const auto& l : inst.topology.links()) {
    const auto back = inst.topology.find_link(l.end, l.begin);
    REQUIRE(back.has_value());
    CHECK(inst.topology.links()[static_cast<std::size_t>(*back)].length_km == l.length_km);
  }
}

TEST_CASE("partitioning the bundled matrix at 10 Gb/s per unit") {
  const auto inst = oracle::cost239(10.0);
  std::size_t expected = 0;
  for (const auto& d : inst.demands) expected += static_cast<std::size_t>(std::ceil(d.rate_gbps / 100.0 - 1e-9));
  const auto r = partition_traffic(inst.demands, 100.0);
  CHECK(r.size() == expected);
  CHECK(r.size() == 180);
}

TEST_CASE("span counts round partial spans up") {
  std::vector<Node> nodes{{1, ""}, {2, ""}, {3, ""}};
  std::vector<Link> links{{0, 0, 1, 80.0}, {0, 1, 2, 81.0}, {0, 2, 0, 160.0}};
  const auto inst = make_instance(NetworkTopology(nodes, links), {}, PhysicsConstants{});
  CHECK(inst.span_count(0) == 1);
  CHECK(inst.span_count(1) == 2);
  CHECK(inst.span_count(2) == 2);
}

TEST_CASE("traffic parser checks shape and values") {
  std::istringstream topo_in("node 1\nnode 2\nbilink 1 2 100\n");
  const auto topo = parse_topology(topo_in);
  std::istringstream ok("0 2\n1.5 0\n");
  const auto d = parse_traffic(ok, topo, 10.0);
  REQUIRE(d.size() == 2);
  CHECK(d[0].rate_gbps == 20.0);
  CHECK(d[1].rate_gbps == 15.0);
  std::istringstream ragged("0 2\n1\n");
  CHECK_THROWS_AS(parse_traffic(ragged, topo, 10.0), ParseError);
  std::istringstream negative("0 -2\n1 0\n");
  CHECK_THROWS_AS(parse_traffic(negative, topo, 10.0), ParseError);
}

TEST_CASE("key-value configuration applies known keys and leaves the rest") {
  std::istringstream in("span_km = 100\nmargin = 2\nrto = scprr\ngpsa = 4\nclamp_c = off\nunknown = 1\n");
  auto kv = parse_key_values(in);
  PhysicsConstants pc;
  ScenarioConfig cfg;
  apply_constants(kv, pc);
  apply_config(kv, cfg);
  CHECK(pc.span_km == 100.0);
  CHECK(cfg.min_margin == 2.0);
  CHECK(cfg.rto == RtoMethod::scprr);
  CHECK(cfg.gpsa == Formulation::gpsa4);
  CHECK_FALSE(cfg.clamp_c);
  REQUIRE(kv.size() == 1);
  CHECK(kv.begin()->first == "unknown");

  std::istringstream bad("span_km = fast\n");
  auto kv2 = parse_key_values(bad);
  CHECK_THROWS_AS(apply_constants(kv2, pc), ParseError);
}

TEST_CASE("written configuration reads back identically") {
  PhysicsConstants pc;
  pc.frequency_thz = 193.1;
  ScenarioConfig cfg;
  cfg.weights.k3 = 0.3;
  cfg.seed = 77;
  cfg.theta_on_fix = ThetaOnFix::fit;
  std::ostringstream out;
  write_constants(out, pc);
  write_config(out, cfg);
  std::istringstream in(out.str());
  auto kv = parse_key_values(in);
  PhysicsConstants pc2;
  ScenarioConfig cfg2;
  apply_constants(kv, pc2);
  apply_config(kv, cfg2);
  CHECK(kv.empty());
  CHECK(pc2.frequency_thz == pc.frequency_thz);
  CHECK(cfg2.weights.k3 == cfg.weights.k3);
  CHECK(cfg2.seed == 77);
  CHECK(cfg2.theta_on_fix == ThetaOnFix::fit);
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  cfg.min_margin = 0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.weights.k2 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("request selection is seeded, ordered and renumbered") {
  std::vector<ConnectionRequest> all;
  for (int i = 0; i < 50; ++i) all.push_back({i, i % 5, (i + 1) % 5, 10.0 + i});
  const auto a = select_requests(all, 12, 3);
  const auto b = select_requests(all, 12, 3);
  const auto c = select_requests(all, 12, 4);
  REQUIRE(a.size() == 12);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rate_gbps == b[i].rate_gbps);
    CHECK(a[i].id == static_cast<int>(i));
    if (i > 0) CHECK(a[i].rate_gbps > a[i - 1].rate_gbps);
    differs = differs || a[i].rate_gbps != c[i].rate_gbps;
  }
  CHECK(differs);
  CHECK(select_requests(all, 0, 1).size() == 50);
  CHECK(select_requests(all, 80, 1).size() == 50);
}

TEST_CASE("enum names round-trip") {
  for (auto m : {RtoMethod::spr, RtoMethod::scpr, RtoMethod::scprr}) CHECK(parse_rto(to_string(m)) == m);
  for (int f = 1; f <= 6; ++f) {
    const auto fm = static_cast<Formulation>(f);
    CHECK(parse_formulation(to_string(fm)) == fm);
  }
  CHECK(xci_order(Formulation::gpsa1) == 1);
  CHECK(xci_order(Formulation::gpsa6) == 3);
  CHECK_THROWS_AS(parse_rto("ospf"), ParseError);
  CHECK_THROWS_AS(parse_formulation("gpsa7"), ParseError);
}
