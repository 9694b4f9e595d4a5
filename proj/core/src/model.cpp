#include "eon/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "eon/error.hpp"

namespace eon {

// ---------------------------------------------------------------- topology

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  std::set<int> ids;
  for (const auto& n : nodes_) {
    if (!ids.insert(n.id).second) throw InvalidArgument("duplicate node id " + std::to_string(n.id));
  }
  out_.assign(nodes_.size(), {});
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    auto& l = links_[i];
    l.id = static_cast<int>(i);
    const int nv = static_cast<int>(nodes_.size());
    if (l.begin < 0 || l.begin >= nv || l.end < 0 || l.end >= nv) {
      throw InvalidArgument("link " + std::to_string(i) + " references an unknown node");
    }
    if (l.begin == l.end) throw InvalidArgument("link " + std::to_string(i) + " is a self loop");
    if (!(l.length_km > 0.0) || !std::isfinite(l.length_km)) {
      throw InvalidArgument("link " + std::to_string(i) + " must have positive length");
    }
    if (!seen.insert({l.begin, l.end}).second) {
      throw InvalidArgument("parallel links between the same node pair are not supported");
    }
    out_[static_cast<std::size_t>(l.begin)].push_back(static_cast<int>(i));
  }
  for (auto& adj : out_) {
    std::sort(adj.begin(), adj.end(), [&](int a, int b) {
      return links_[static_cast<std::size_t>(a)].end < links_[static_cast<std::size_t>(b)].end;
    });
  }
}

std::optional<int> NetworkTopology::index_of(int id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> NetworkTopology::find_link(int u, int v) const {
  for (int l : out_[static_cast<std::size_t>(u)]) {
    if (links_[static_cast<std::size_t>(l)].end == v) return l;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- modulation

ModulationTable::ModulationTable(std::vector<ModulationFormat> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidArgument("modulation table is empty");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i].efficiency > entries_[i - 1].efficiency) ||
        !(entries_[i].required_osnr > entries_[i - 1].required_osnr)) {
      throw InvalidArgument("modulation table must be strictly increasing");
    }
  }
}

const ModulationTable& ModulationTable::standard() {
  static const ModulationTable table({{2, 3.52}, {4, 7.03}, {6, 17.59}, {8, 32.60}, {10, 64.91}, {12, 127.51}});
  return table;
}

std::optional<double> ModulationTable::required_osnr(double efficiency) const {
  for (const auto& e : entries_) {
    if (std::abs(e.efficiency - efficiency) <= 1e-9 * e.efficiency) return e.required_osnr;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- constants

void PhysicsConstants::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"beta2_fs2_per_m", beta2_fs2_per_m}, {"alpha_db_per_km", alpha_db_per_km},
      {"span_km", span_km},                 {"frequency_thz", frequency_thz},
      {"nsp", nsp},                         {"gamma_per_w_km", gamma_per_w_km},
      {"guard_ghz", guard_ghz},             {"bandwidth_thz", bandwidth_thz},
      {"capacity_gbps", capacity_gbps},     {"precision", precision}};
  for (const auto& [name, v] : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
  }
}

double PhysicsConstants::alpha_np_per_m() const { return alpha_db_per_km * std::numbers::ln10 / 10.0 / 1000.0; }

DerivedConstants derived_constants(const PhysicsConstants& c) {
  const double alpha = c.alpha_np_per_m();
  const double beta2 = c.beta2_s2_per_m();
  const double gamma = c.gamma_per_w_m();
  DerivedConstants d;
  d.sigma = 3.0 * gamma * gamma / (2.0 * alpha * std::numbers::pi * beta2);
  d.iota = std::numbers::pi * std::numbers::pi * beta2 / (2.0 * alpha);
  d.zeta = std::expm1(alpha * c.span_m()) * kPlanck * c.frequency_hz() * c.nsp;
  return d;
}

// ---------------------------------------------------------------- traffic

std::vector<ConnectionRequest> partition_traffic(std::span<const Demand> demands, double capacity_gbps) {
  if (!(capacity_gbps > 0.0)) throw InvalidArgument("transponder capacity must be positive");
  std::vector<ConnectionRequest> out;
  for (const auto& d : demands) {
    if (!(d.rate_gbps > 0.0)) continue;
    double left = d.rate_gbps;
    // Tolerate representation noise so that e.g. 3 * 100 splits into exactly 3.
    const double eps = 1e-9 * capacity_gbps;
    while (left > eps) {
      const double part = (left >= capacity_gbps - eps) ? capacity_gbps : left;
      out.push_back({static_cast<int>(out.size()), d.source, d.destination, part});
      left -= part;
    }
  }
  return out;
}

std::vector<ConnectionRequest> select_requests(std::vector<ConnectionRequest> requests, int count,
                                               std::uint64_t seed) {
  if (count <= 0 || static_cast<std::size_t>(count) >= requests.size()) return requests;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates over indices; uses raw engine output so the choice
  // does not depend on the standard library's distribution implementation.
  std::vector<std::size_t> idx(requests.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
    const std::uint64_t span = idx.size() - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i], idx[i + static_cast<std::size_t>(r % span)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  std::vector<ConnectionRequest> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    ConnectionRequest r = requests[i];
    r.id = static_cast<int>(out.size());
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- enums

std::string to_string(RtoMethod m) {
  switch (m) {
    case RtoMethod::spr: return "spr";
    case RtoMethod::scpr: return "scpr";
    case RtoMethod::scprr: return "scprr";
  }
  return "?";
}

std::string to_string(Formulation f) { return "gpsa" + std::to_string(static_cast<int>(f)); }

std::string to_string(ThetaOnFix t) { return t == ThetaOnFix::fit ? "fit" : "table"; }

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

RtoMethod parse_rto(const std::string& s) {
  const auto v = lower(s);
  if (v == "spr") return RtoMethod::spr;
  if (v == "scpr") return RtoMethod::scpr;
  if (v == "scprr") return RtoMethod::scprr;
  throw ParseError("unknown RTO method '" + s + "'");
}

Formulation parse_formulation(const std::string& s) {
  std::string v = lower(s);
  if (v.rfind("gpsa", 0) == 0) v = v.substr(4);
  if (v.size() == 1 && v[0] >= '1' && v[0] <= '6') return static_cast<Formulation>(v[0] - '0');
  throw ParseError("unknown GPSA formulation '" + s + "'");
}

ThetaOnFix parse_theta_on_fix(const std::string& s) {
  const auto v = lower(s);
  if (v == "fit") return ThetaOnFix::fit;
  if (v == "table") return ThetaOnFix::table;
  throw ParseError("unknown theta-on-fix policy '" + s + "'");
}

int xci_order(Formulation f) {
  switch (f) {
    case Formulation::gpsa2:
    case Formulation::gpsa4:
    case Formulation::gpsa6: return 3;
    default: return 1;
  }
}

void ScenarioConfig::validate() const {
  if (weights.k1 < 0 || weights.k2 < 0 || weights.k3 < 0 || weights.k4 < 0) {
    throw InvalidArgument("goal weights must be nonnegative");
  }
  if (!(min_margin >= 1.0)) throw InvalidArgument("minimum margin must be >= 1");
  if (!(traffic_scale_gbps > 0.0)) throw InvalidArgument("traffic scale must be positive");
  if (k_paths < 1) throw InvalidArgument("k_paths must be >= 1");
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
}

// ---------------------------------------------------------------- instance

int NetworkInstance::span_count(int link) const {
  const double len = topology.links().at(static_cast<std::size_t>(link)).length_km;
  return static_cast<int>(std::ceil(len / constants.span_km - 1e-12));
}

NetworkInstance make_instance(NetworkTopology topology, std::vector<Demand> demands, PhysicsConstants constants) {
  constants.validate();
  const int nv = static_cast<int>(topology.node_count());
  for (const auto& d : demands) {
    if (d.source < 0 || d.source >= nv || d.destination < 0 || d.destination >= nv) {
      throw InvalidArgument("demand references an unknown node");
    }
    if (d.source == d.destination) throw InvalidArgument("demand source equals destination");
    if (!(d.rate_gbps > 0.0)) throw InvalidArgument("demand rate must be positive");
  }
  NetworkInstance inst{std::move(topology), std::move(demands), constants, derived_constants(constants)};
  return inst;
}

// ---------------------------------------------------------------- parsing

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + s + "' for " + what);
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid integer '" + s + "' for " + what);
  }
}

std::ifstream open(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return in;
}

// Shortest decimal form that reads back to the same double.
std::string fmt(double v) {
  for (int prec = 15; prec <= 17; ++prec) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    if (prec == 17 || std::stod(os.str()) == v) return os.str();
  }
  return {};
}

}  // namespace

NetworkTopology parse_topology(std::istream& in) {
  std::vector<Node> nodes;
  struct RawLink {
    int a, b;
    double len;
    int lineno;
  };
  std::vector<RawLink> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(strip_comment(line));
    std::string kind;
    if (!(ls >> kind)) continue;
    const std::string where = "topology line " + std::to_string(lineno);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (kind == "node") {
      if (tok.empty()) throw ParseError(where + ": node needs an id");
      Node n{parse_int(tok[0], where), tok.size() > 1 ? tok[1] : std::string{}};
      nodes.push_back(n);
    } else if (kind == "link" || kind == "bilink") {
      if (tok.size() != 3) throw ParseError(where + ": expected <begin> <end> <length-km>");
      const RawLink r{parse_int(tok[0], where), parse_int(tok[1], where), parse_double(tok[2], where), lineno};
      if (!(r.len > 0.0)) throw ParseError(where + ": link length must be positive");
      raw.push_back(r);
      if (kind == "bilink") raw.push_back({r.b, r.a, r.len, lineno});
    } else {
      throw ParseError(where + ": unknown record '" + kind + "'");
    }
  }
  std::vector<Link> links;
  auto index = [&](int id, int ln) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == id) return static_cast<int>(i);
    }
    throw ParseError("topology line " + std::to_string(ln) + ": unknown node id " + std::to_string(id));
  };
  for (const auto& r : raw) links.push_back({0, index(r.a, r.lineno), index(r.b, r.lineno), r.len});
  try {
    return NetworkTopology(std::move(nodes), std::move(links));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("topology: ") + e.what());
  }
}

NetworkTopology read_topology(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_topology(in);
}

void write_topology(std::ostream& out, const NetworkTopology& topo) {
  for (const auto& n : topo.nodes()) {
    out << "node " << n.id;
    if (!n.name.empty()) out << ' ' << n.name;
    out << '\n';
  }
  const auto& nodes = topo.nodes();
  for (const auto& l : topo.links()) {
    out << "link " << nodes[static_cast<std::size_t>(l.begin)].id << ' ' << nodes[static_cast<std::size_t>(l.end)].id
        << ' ' << fmt(l.length_km) << '\n';
  }
}

std::vector<Demand> parse_traffic(std::istream& in, const NetworkTopology& topo, double scale_gbps) {
  if (!(scale_gbps > 0.0)) throw InvalidArgument("traffic scale must be positive");
  const std::size_t nv = topo.node_count();
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(strip_comment(line));
    std::vector<double> row;
    for (std::string t; ls >> t;) row.push_back(parse_double(t, "traffic line " + std::to_string(lineno)));
    if (row.empty()) continue;
    if (row.size() != nv) {
      throw ParseError("traffic line " + std::to_string(lineno) + ": expected " + std::to_string(nv) + " entries");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  if (rows.size() != nv) throw ParseError("traffic matrix must have " + std::to_string(nv) + " rows");
  std::vector<Demand> out;
  for (std::size_t s = 0; s < nv; ++s) {
    for (std::size_t d = 0; d < nv; ++d) {
      const double v = rows[s][d];
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError("traffic entries must be nonnegative");
      if (v == 0.0) continue;
      if (s == d) throw ParseError("nonzero diagonal traffic entry at row " + std::to_string(s + 1));
      out.push_back({static_cast<int>(s), static_cast<int>(d), v * scale_gbps});
    }
  }
  return out;
}

std::vector<Demand> read_traffic(const std::filesystem::path& path, const NetworkTopology& topo, double scale_gbps) {
  auto in = open(path);
  return parse_traffic(in, topo, scale_gbps);
}

void write_traffic(std::ostream& out, std::span<const Demand> demands, const NetworkTopology& topo,
                   double scale_gbps) {
  const std::size_t nv = topo.node_count();
  std::vector<std::vector<double>> m(nv, std::vector<double>(nv, 0.0));
  for (const auto& d : demands) m[static_cast<std::size_t>(d.source)][static_cast<std::size_t>(d.destination)] += d.rate_gbps / scale_gbps;
  for (const auto& row : m) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << fmt(row[j]);
    out << '\n';
  }
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string val = trim(body.substr(eq + 1));
    if (key.empty() || val.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key or value");
    kv[key] = val;
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_key_values(in);
}

namespace {

template <class F>
void take(KeyValues& kv, const std::string& key, F&& apply) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  apply(it->second);
  kv.erase(it);
}

bool parse_bool(const std::string& s) {
  const auto v = lower(s);
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ParseError("invalid boolean '" + s + "'");
}

}  // namespace

void apply_constants(KeyValues& kv, PhysicsConstants& c) {
  auto num = [&](const char* key, double& field) {
    take(kv, key, [&](const std::string& v) { field = parse_double(v, key); });
  };
  num("beta2_fs2_per_m", c.beta2_fs2_per_m);
  num("alpha_db_per_km", c.alpha_db_per_km);
  num("span_km", c.span_km);
  num("frequency_thz", c.frequency_thz);
  num("nsp", c.nsp);
  num("gamma_per_w_km", c.gamma_per_w_km);
  num("guard_ghz", c.guard_ghz);
  num("bandwidth_thz", c.bandwidth_thz);
  num("capacity_gbps", c.capacity_gbps);
  num("precision", c.precision);
}

void apply_config(KeyValues& kv, ScenarioConfig& cfg) {
  auto num = [&](const char* key, double& field) {
    take(kv, key, [&](const std::string& v) { field = parse_double(v, key); });
  };
  auto integer = [&](const char* key, int& field) {
    take(kv, key, [&](const std::string& v) { field = parse_int(v, key); });
  };
  num("k1", cfg.weights.k1);
  num("k2", cfg.weights.k2);
  num("k3", cfg.weights.k3);
  num("k4", cfg.weights.k4);
  num("margin", cfg.min_margin);
  take(kv, "rto", [&](const std::string& v) { cfg.rto = parse_rto(v); });
  take(kv, "gpsa", [&](const std::string& v) { cfg.gpsa = parse_formulation(v); });
  num("scale_gbps", cfg.traffic_scale_gbps);
  integer("requests", cfg.max_requests);
  take(kv, "seed", [&](const std::string& v) {
    try {
      cfg.seed = std::stoull(v);
    } catch (const std::exception&) {
      throw ParseError("invalid seed '" + v + "'");
    }
  });
  take(kv, "clamp_c", [&](const std::string& v) { cfg.clamp_c = parse_bool(v); });
  take(kv, "lower_edge", [&](const std::string& v) { cfg.lower_edge = parse_bool(v); });
  take(kv, "theta_on_fix", [&](const std::string& v) { cfg.theta_on_fix = parse_theta_on_fix(v); });
  integer("k_paths", cfg.k_paths);
  integer("restarts", cfg.restarts);
  num("solver_kkt_tol", cfg.solver.kkt_tol);
  num("solver_gap_tol", cfg.solver.gap_tol);
  num("solver_feas_tol", cfg.solver.feas_tol);
  integer("solver_max_iterations", cfg.solver.max_iterations);
}

void write_constants(std::ostream& out, const PhysicsConstants& c) {
  out << "beta2_fs2_per_m = " << fmt(c.beta2_fs2_per_m) << '\n'
      << "alpha_db_per_km = " << fmt(c.alpha_db_per_km) << '\n'
      << "span_km = " << fmt(c.span_km) << '\n'
      << "frequency_thz = " << fmt(c.frequency_thz) << '\n'
      << "nsp = " << fmt(c.nsp) << '\n'
      << "gamma_per_w_km = " << fmt(c.gamma_per_w_km) << '\n'
      << "guard_ghz = " << fmt(c.guard_ghz) << '\n'
      << "bandwidth_thz = " << fmt(c.bandwidth_thz) << '\n'
      << "capacity_gbps = " << fmt(c.capacity_gbps) << '\n'
      << "precision = " << fmt(c.precision) << '\n';
}

void write_config(std::ostream& out, const ScenarioConfig& cfg) {
  out << "k1 = " << fmt(cfg.weights.k1) << '\n'
      << "k2 = " << fmt(cfg.weights.k2) << '\n'
      << "k3 = " << fmt(cfg.weights.k3) << '\n'
      << "k4 = " << fmt(cfg.weights.k4) << '\n'
      << "margin = " << fmt(cfg.min_margin) << '\n'
      << "rto = " << to_string(cfg.rto) << '\n'
      << "gpsa = " << to_string(cfg.gpsa) << '\n'
      << "scale_gbps = " << fmt(cfg.traffic_scale_gbps) << '\n'
      << "requests = " << cfg.max_requests << '\n'
      << "seed = " << cfg.seed << '\n'
      << "clamp_c = " << (cfg.clamp_c ? "on" : "off") << '\n'
      << "lower_edge = " << (cfg.lower_edge ? "on" : "off") << '\n'
      << "theta_on_fix = " << to_string(cfg.theta_on_fix) << '\n'
      << "k_paths = " << cfg.k_paths << '\n'
      << "restarts = " << cfg.restarts << '\n'
      << "solver_kkt_tol = " << fmt(cfg.solver.kkt_tol) << '\n'
      << "solver_gap_tol = " << fmt(cfg.solver.gap_tol) << '\n'
      << "solver_feas_tol = " << fmt(cfg.solver.feas_tol) << '\n'
      << "solver_max_iterations = " << cfg.solver.max_iterations << '\n';
}

NetworkInstance load_instance(const std::filesystem::path& topology, const std::filesystem::path& traffic,
                              const std::optional<std::filesystem::path>& constants, ScenarioConfig& cfg) {
  PhysicsConstants pc;
  if (constants) {
    KeyValues kv = read_key_values(*constants);
    apply_constants(kv, pc);
    apply_config(kv, cfg);
    if (!kv.empty()) throw ParseError("unknown key '" + kv.begin()->first + "' in " + constants->string());
  }
  try {
    pc.validate();
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  NetworkTopology topo = read_topology(topology);
  std::vector<Demand> demands = read_traffic(traffic, topo, cfg.traffic_scale_gbps);
  return make_instance(std::move(topo), std::move(demands), pc);
}

}  // namespace eon
