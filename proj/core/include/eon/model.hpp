#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eon/gp.hpp"

namespace eon {

// Physical constants used across the library, all SI.
inline constexpr double kPlanck = 6.62607015e-34;  // J*s

/// A node of the optical network. `id` is the identifier used in input
/// files; the position in NetworkTopology::nodes() is the internal index.
struct Node {
  int id = 0;
  std::string name;
};

/// Directed fiber link between two node indices.
struct Link {
  int id = 0;
  int begin = 0;
  int end = 0;
  double length_km = 0.0;
};

class NetworkTopology {
 public:
  NetworkTopology() = default;
  /// Links refer to node *indices*. Throws InvalidArgument on dangling
  /// endpoints, self loops, duplicate node ids or nonpositive lengths.
  NetworkTopology(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  /// Internal index of the node with external id `id`.
  std::optional<int> index_of(int id) const;
  /// Outgoing link indices of node index `v`, sorted by head node index.
  const std::vector<int>& out_links(int v) const { return out_[v]; }
  /// Link index from `u` to `v`, if any.
  std::optional<int> find_link(int u, int v) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<int>> out_;
};

struct ModulationFormat {
  double efficiency = 0.0;     // bit/s/Hz
  double required_osnr = 0.0;  // linear ratio
};

/// Spectral efficiency vs. minimum required OSNR, strictly increasing in both.
class ModulationTable {
 public:
  explicit ModulationTable(std::vector<ModulationFormat> entries);
  /// PM-BPSK ... PM-64QAM at pre-FEC BER 4e-3.
  static const ModulationTable& standard();

  const std::vector<ModulationFormat>& entries() const { return entries_; }
  std::optional<double> required_osnr(double efficiency) const;
  bool contains(double efficiency) const { return required_osnr(efficiency).has_value(); }
  double min_efficiency() const { return entries_.front().efficiency; }
  double max_efficiency() const { return entries_.back().efficiency; }

 private:
  std::vector<ModulationFormat> entries_;
};

/// Fiber, amplifier and transponder constants in engineering units.
struct PhysicsConstants {
  double beta2_fs2_per_m = 20393.0;
  double alpha_db_per_km = 0.22;
  double span_km = 80.0;
  double frequency_thz = 193.55;
  double nsp = 1.58;
  double gamma_per_w_km = 1.3;
  double guard_ghz = 20.0;
  double bandwidth_thz = 2.0;
  double capacity_gbps = 100.0;
  double precision = 0.1;

  void validate() const;

  double alpha_np_per_m() const;
  double beta2_s2_per_m() const { return beta2_fs2_per_m * 1e-30; }
  double gamma_per_w_m() const { return gamma_per_w_km * 1e-3; }
  double span_m() const { return span_km * 1e3; }
  double frequency_hz() const { return frequency_thz * 1e12; }
  double guard_hz() const { return guard_ghz * 1e9; }
  double bandwidth_hz() const { return bandwidth_thz * 1e12; }
  double capacity_bps() const { return capacity_gbps * 1e9; }
};

/// Coefficients of the Gaussian-noise model in SI units.
struct DerivedConstants {
  double sigma = 0.0;  // NLI coefficient, Hz^2/W^2
  double iota = 0.0;   // self-NLI argument coefficient, s^2
  double zeta = 0.0;   // ASE coefficient, W/Hz
};

DerivedConstants derived_constants(const PhysicsConstants& c);

/// Aggregate traffic between two node indices before partitioning.
struct Demand {
  int source = 0;
  int destination = 0;
  double rate_gbps = 0.0;
};

struct ConnectionRequest {
  int id = 0;
  int source = 0;       // node index
  int destination = 0;  // node index
  double rate_gbps = 0.0;

  double rate_bps() const { return rate_gbps * 1e9; }
};

/// Splits each demand into ceil(R/capacity) requests: full-capacity parts
/// followed by the remainder. Ids are assigned sequentially from 0.
std::vector<ConnectionRequest> partition_traffic(std::span<const Demand> demands,
                                                 double capacity_gbps);

enum class RtoMethod { spr, scpr, scprr };
enum class Formulation { gpsa1 = 1, gpsa2, gpsa3, gpsa4, gpsa5, gpsa6 };

/// Which required OSNR the QoS row uses once a request's efficiency is fixed
/// to a tabulated value: the posynomial fit, or the exact table entry.
enum class ThetaOnFix { fit, table };

std::string to_string(RtoMethod m);
std::string to_string(Formulation f);
std::string to_string(ThetaOnFix t);
RtoMethod parse_rto(const std::string& s);
Formulation parse_formulation(const std::string& s);
ThetaOnFix parse_theta_on_fix(const std::string& s);

/// Cross-channel approximation order used by a formulation (1 or 3).
int xci_order(Formulation f);

struct GoalWeights {
  double k1 = 1e-10;  // per Hz of spectrum bound
  double k2 = 1e3;    // per W of launch power
  double k3 = 0.1;    // per unit inverse margin
  double k4 = 1e9;    // Hz, multiplies sum of inverse carrier distances
};

struct ScenarioConfig {
  GoalWeights weights;
  double min_margin = 1.0;
  RtoMethod rto = RtoMethod::spr;
  Formulation gpsa = Formulation::gpsa1;
  double traffic_scale_gbps = 10.0;
  /// 0 keeps every partitioned request; otherwise a seeded random subset.
  int max_requests = 0;
  std::uint64_t seed = 1;
  bool clamp_c = true;
  bool lower_edge = true;
  ThetaOnFix theta_on_fix = ThetaOnFix::table;
  int k_paths = 8;
  int restarts = 16;
  SolverOptions solver;

  void validate() const;
};

struct NetworkInstance {
  NetworkTopology topology;
  std::vector<Demand> demands;
  PhysicsConstants constants;
  DerivedConstants derived;

  int span_count(int link) const;
};

NetworkInstance make_instance(NetworkTopology topology, std::vector<Demand> demands,
                              PhysicsConstants constants);

/// Topology text format:
///   node <id> [name]
///   link <begin-id> <end-id> <length-km>      (one directed link)
///   bilink <a-id> <b-id> <length-km>          (both directions)
/// Blank lines and '#' comments are ignored.
NetworkTopology parse_topology(std::istream& in);
NetworkTopology read_topology(const std::filesystem::path& path);
void write_topology(std::ostream& out, const NetworkTopology& topo);

/// Dense nonnegative matrix, row = source in topology node order. Entries
/// are multiplied by `scale_gbps`; zero entries produce no demand.
std::vector<Demand> parse_traffic(std::istream& in, const NetworkTopology& topo,
                                  double scale_gbps);
std::vector<Demand> read_traffic(const std::filesystem::path& path,
                                 const NetworkTopology& topo, double scale_gbps);
/// Writes demands as a dense matrix divided by `scale_gbps`.
void write_traffic(std::ostream& out, std::span<const Demand> demands,
                   const NetworkTopology& topo, double scale_gbps);

/// `key = value` lines; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies recognized keys; unknown keys are left in `kv` for the caller.
void apply_constants(KeyValues& kv, PhysicsConstants& c);
void apply_config(KeyValues& kv, ScenarioConfig& cfg);
void write_constants(std::ostream& out, const PhysicsConstants& c);
void write_config(std::ostream& out, const ScenarioConfig& cfg);

/// Loads topology, traffic and an optional key-value constants file (keys
/// of both PhysicsConstants and ScenarioConfig accepted; anything else is a
/// ParseError). The traffic scale is taken from `cfg` after the file is applied.
NetworkInstance load_instance(const std::filesystem::path& topology,
                              const std::filesystem::path& traffic,
                              const std::optional<std::filesystem::path>& constants,
                              ScenarioConfig& cfg);

/// Seeded selection of at most `count` requests (ids renumbered from 0,
/// relative order preserved). count <= 0 returns all.
std::vector<ConnectionRequest> select_requests(std::vector<ConnectionRequest> requests,
                                               int count, std::uint64_t seed);

}  // namespace eon
