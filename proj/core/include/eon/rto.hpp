#pragma once

// Stage 1: routing and traffic ordering.

#include <cstdint>
#include <span>
#include <vector>

#include "eon/model.hpp"
#include "eon/physics.hpp"

namespace eon::rto {

struct Path {
  std::vector<int> nodes;  // node indices, source first
  std::vector<int> links;  // link indices
  double length_km = 0.0;

  bool operator==(const Path& o) const { return nodes == o.nodes; }
};

/// Minimum-length path; among equal lengths the lexicographically smallest
/// node-index sequence. Throws UnreachableError.
Path shortest_path(const NetworkTopology& topo, int source, int destination);

/// Up to k loopless paths in (length, node sequence) order (Yen).
std::vector<Path> k_shortest_paths(const NetworkTopology& topo, int source, int destination, int k);

struct SearchOptions {
  int k_paths = 8;
  int restarts = 16;
  std::uint64_t seed = 1;
  /// Exhaustive search when the candidate product does not exceed this.
  double exhaustive_limit = 1e6;
};

struct RoutingSolution {
  RtoMethod method = RtoMethod::spr;
  std::vector<ConnectionRequest> requests;
  std::vector<Path> paths;
  std::vector<int> spans;                     // N_q
  std::vector<std::vector<int>> shared_spans;  // N_{q,i}
  std::vector<double> cost;                   // per-request ordering cost
  double goal = 0.0;                          // sum of per-request costs
  std::vector<int> order;                     // request index by rank
  std::vector<int> rank;                      // rank by request index
  std::vector<std::vector<int>> channel_order;  // per link, requests by rank
  bool exhaustive = false;                    // quadratic search was exhaustive

  std::size_t size() const { return requests.size(); }
  physics::LinkNoiseContext noise_context(const DerivedConstants& coeffs) const;
  /// Requests routed over link l (unordered).
  std::vector<int> requests_on(int link) const;
};

/// Builds span metrics and the method's per-request costs for fixed paths,
/// then orders the traffic.
RoutingSolution make_solution(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                              std::vector<Path> paths, RtoMethod method);

RoutingSolution route_spr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests);
RoutingSolution route_scpr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                           const SearchOptions& options = {});
RoutingSolution route_scprr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                            const SearchOptions& options = {});
RoutingSolution route(const NetworkInstance& inst, std::span<const ConnectionRequest> requests, RtoMethod method,
                      const SearchOptions& options = {});

/// Re-sorts the global order descending by cost (ties by request id) and
/// recomputes the per-link channel order as its projection.
void order_traffic(RoutingSolution& sol, std::size_t link_count);

}  // namespace eon::rto
