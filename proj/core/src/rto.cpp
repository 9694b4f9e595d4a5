#include "eon/rto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>

#include "eon/error.hpp"

namespace eon::rto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_length(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

/// Shortest path avoiding blocked links/nodes. Returns nullopt if unreachable.
std::optional<Path> constrained_shortest(const NetworkTopology& topo, int s, int t, const std::vector<char>& link_blocked,
                                         const std::vector<char>& node_blocked) {
  const std::size_t nv = topo.node_count();
  const auto& links = topo.links();
  // Reverse Dijkstra: distance from every node to t.
  std::vector<std::vector<int>> in(nv);
  for (const auto& l : links) {
    if (!link_blocked[static_cast<std::size_t>(l.id)]) in[static_cast<std::size_t>(l.end)].push_back(l.id);
  }
  std::vector<double> dist(nv, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(t)] = 0.0;
  pq.push({0.0, t});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(v)]) continue;
    for (int li : in[static_cast<std::size_t>(v)]) {
      const auto& l = links[static_cast<std::size_t>(li)];
      if (node_blocked[static_cast<std::size_t>(l.begin)]) continue;
      const double nd = d + l.length_km;
      if (nd < dist[static_cast<std::size_t>(l.begin)]) {
        dist[static_cast<std::size_t>(l.begin)] = nd;
        pq.push({nd, l.begin});
      }
    }
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(s)])) return std::nullopt;
  // Greedy forward walk picking the smallest next node on a shortest path.
  Path p;
  p.nodes.push_back(s);
  int u = s;
  while (u != t) {
    int best_link = -1;
    for (int li : topo.out_links(u)) {  // sorted by head index
      if (link_blocked[static_cast<std::size_t>(li)]) continue;
      const auto& l = links[static_cast<std::size_t>(li)];
      if (node_blocked[static_cast<std::size_t>(l.end)]) continue;
      if (same_length(l.length_km + dist[static_cast<std::size_t>(l.end)], dist[static_cast<std::size_t>(u)])) {
        best_link = li;
        break;
      }
    }
    if (best_link < 0) throw NumericalError("shortest-path reconstruction failed");
    const auto& l = links[static_cast<std::size_t>(best_link)];
    p.links.push_back(best_link);
    p.nodes.push_back(l.end);
    p.length_km += l.length_km;
    u = l.end;
    if (p.nodes.size() > nv) throw NumericalError("shortest-path reconstruction looped");
  }
  return p;
}

// Strictly lower beyond relative noise; any finite value improves on +inf.
bool improves(double value, double incumbent) {
  if (incumbent == kInf) return value < kInf;
  return value < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

bool path_less(const Path& a, const Path& b) {
  if (!same_length(a.length_km, b.length_km)) return a.length_km < b.length_km;
  return a.nodes < b.nodes;
}

void check_request(const NetworkTopology& topo, const ConnectionRequest& r) {
  const int nv = static_cast<int>(topo.node_count());
  if (r.source < 0 || r.source >= nv || r.destination < 0 || r.destination >= nv) {
    throw InvalidArgument("request " + std::to_string(r.id) + " references an unknown node");
  }
  if (r.source == r.destination) throw InvalidArgument("request " + std::to_string(r.id) + " has source == destination");
}

/// Goal sum_l L_l * count_l * weight_l maintained incrementally.
class LinkLoad {
 public:
  explicit LinkLoad(const NetworkTopology& topo) : len_(topo.link_count()), count_(topo.link_count(), 0), weight_(topo.link_count(), 0.0) {
    for (const auto& l : topo.links()) len_[static_cast<std::size_t>(l.id)] = l.length_km;
  }

  /// Change in goal when adding (sign=+1) or removing (sign=-1) a path.
  double delta(const Path& p, double w, int sign) const {
    double d = 0.0;
    for (int li : p.links) {
      const auto l = static_cast<std::size_t>(li);
      const double c = count_[l];
      const double W = weight_[l];
      d += len_[l] * ((c + sign) * (W + sign * w) - c * W);
    }
    return d;
  }

  void apply(const Path& p, double w, int sign) {
    goal_ += delta(p, w, sign);
    for (int li : p.links) {
      count_[static_cast<std::size_t>(li)] += sign;
      weight_[static_cast<std::size_t>(li)] += sign * w;
    }
  }

  double goal() const { return goal_; }

 private:
  std::vector<double> len_;
  std::vector<int> count_;
  std::vector<double> weight_;
  double goal_ = 0.0;
};

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

RoutingSolution route_quadratic(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                                const SearchOptions& opt, RtoMethod method) {
  const auto& topo = inst.topology;
  const std::size_t nq = requests.size();
  std::vector<std::vector<Path>> cand(nq);
  std::vector<double> w(nq);
  double product = 1.0;
  for (std::size_t q = 0; q < nq; ++q) {
    check_request(topo, requests[q]);
    cand[q] = k_shortest_paths(topo, requests[q].source, requests[q].destination, opt.k_paths);
    if (cand[q].empty()) {
      throw UnreachableError("request " + std::to_string(requests[q].id) + " has no path");
    }
    w[q] = method == RtoMethod::scprr ? requests[q].rate_gbps : 1.0;
    product *= static_cast<double>(cand[q].size());
  }

  std::vector<int> best(nq, 0);
  bool exhaustive = product <= opt.exhaustive_limit;
  if (nq == 0) {
    // nothing to route
  } else if (exhaustive) {
    LinkLoad load(topo);
    std::vector<int> cur(nq, 0);
    double best_goal = kInf;
    // Depth-first enumeration in lexicographic candidate order.
    auto rec = [&](auto&& self, std::size_t q) -> void {
      if (q == nq) {
        if (improves(load.goal(), best_goal)) {
          best_goal = load.goal();
          best = cur;
        }
        return;
      }
      for (std::size_t c = 0; c < cand[q].size(); ++c) {
        cur[q] = static_cast<int>(c);
        load.apply(cand[q][c], w[q], +1);
        self(self, q + 1);
        load.apply(cand[q][c], w[q], -1);
      }
    };
    rec(rec, 0);
  } else {
    std::mt19937_64 rng(opt.seed);
    double best_goal = kInf;
    for (int r = 0; r < opt.restarts; ++r) {
      std::vector<int> cur(nq, 0);
      if (r > 0) {
        for (std::size_t q = 0; q < nq; ++q) cur[q] = static_cast<int>(draw(rng, cand[q].size()));
      }
      LinkLoad load(topo);
      for (std::size_t q = 0; q < nq; ++q) load.apply(cand[q][static_cast<std::size_t>(cur[q])], w[q], +1);
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t q = 0; q < nq; ++q) {
          const Path& old = cand[q][static_cast<std::size_t>(cur[q])];
          load.apply(old, w[q], -1);
          int choice = cur[q];
          double best_add = load.delta(old, w[q], +1);
          for (std::size_t c = 0; c < cand[q].size(); ++c) {
            const double d = load.delta(cand[q][c], w[q], +1);
            if (d < best_add - 1e-9 * std::max(1.0, std::abs(best_add))) {
              best_add = d;
              choice = static_cast<int>(c);
            }
          }
          if (choice != cur[q]) improved = true;
          cur[q] = choice;
          load.apply(cand[q][static_cast<std::size_t>(choice)], w[q], +1);
        }
      }
      if (improves(load.goal(), best_goal)) {
        best_goal = load.goal();
        best = cur;
      }
    }
  }
  std::vector<Path> paths;
  paths.reserve(nq);
  for (std::size_t q = 0; q < nq; ++q) paths.push_back(cand[q][static_cast<std::size_t>(best[q])]);
  RoutingSolution sol = make_solution(inst, requests, std::move(paths), method);
  sol.exhaustive = exhaustive;
  return sol;
}

}  // namespace

Path shortest_path(const NetworkTopology& topo, int source, int destination) {
  std::vector<char> lb(topo.link_count(), 0), nb(topo.node_count(), 0);
  auto p = constrained_shortest(topo, source, destination, lb, nb);
  if (!p) throw UnreachableError("node " + std::to_string(topo.nodes()[static_cast<std::size_t>(destination)].id) +
                                 " unreachable from node " + std::to_string(topo.nodes()[static_cast<std::size_t>(source)].id));
  return *p;
}

std::vector<Path> k_shortest_paths(const NetworkTopology& topo, int source, int destination, int k) {
  std::vector<Path> result;
  if (k <= 0) return result;
  std::vector<char> lb(topo.link_count(), 0), nb(topo.node_count(), 0);
  auto first = constrained_shortest(topo, source, destination, lb, nb);
  if (!first) return result;
  result.push_back(*first);
  auto cmp = [](const Path& a, const Path& b) { return path_less(a, b); };
  std::set<Path, decltype(cmp)> candidates(cmp);
  const auto& links = topo.links();
  while (static_cast<int>(result.size()) < k) {
    const Path& prev = result.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const int spur = prev.nodes[i];
      std::vector<int> root_nodes(prev.nodes.begin(), prev.nodes.begin() + static_cast<long>(i) + 1);
      std::fill(lb.begin(), lb.end(), 0);
      std::fill(nb.begin(), nb.end(), 0);
      for (const auto& p : result) {
        if (p.nodes.size() > i && std::equal(root_nodes.begin(), root_nodes.end(), p.nodes.begin())) {
          lb[static_cast<std::size_t>(p.links[i])] = 1;
        }
      }
      for (std::size_t j = 0; j < i; ++j) nb[static_cast<std::size_t>(root_nodes[j])] = 1;
      auto spur_path = constrained_shortest(topo, spur, destination, lb, nb);
      if (!spur_path) continue;
      Path total;
      total.nodes = root_nodes;
      for (std::size_t j = 0; j < i; ++j) {
        total.links.push_back(prev.links[j]);
        total.length_km += links[static_cast<std::size_t>(prev.links[j])].length_km;
      }
      for (std::size_t j = 1; j < spur_path->nodes.size(); ++j) total.nodes.push_back(spur_path->nodes[j]);
      for (int li : spur_path->links) {
        total.links.push_back(li);
        total.length_km += links[static_cast<std::size_t>(li)].length_km;
      }
      if (std::find(result.begin(), result.end(), total) == result.end()) candidates.insert(total);
    }
    if (candidates.empty()) break;
    result.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return result;
}

physics::LinkNoiseContext RoutingSolution::noise_context(const DerivedConstants& coeffs) const {
  return physics::LinkNoiseContext{spans, shared_spans, coeffs};
}

std::vector<int> RoutingSolution::requests_on(int link) const {
  std::vector<int> out;
  for (std::size_t q = 0; q < paths.size(); ++q) {
    const auto& ls = paths[q].links;
    if (std::find(ls.begin(), ls.end(), link) != ls.end()) out.push_back(static_cast<int>(q));
  }
  return out;
}

RoutingSolution make_solution(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                              std::vector<Path> paths, RtoMethod method) {
  const auto& topo = inst.topology;
  const std::size_t nq = requests.size();
  if (paths.size() != nq) throw InvalidArgument("one path per request required");
  RoutingSolution sol;
  sol.method = method;
  sol.requests.assign(requests.begin(), requests.end());
  sol.paths = std::move(paths);
  const std::size_t nl = topo.link_count();
  std::vector<std::vector<int>> on_link(nl);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& p = sol.paths[q];
    if (p.nodes.empty() || p.nodes.front() != requests[q].source || p.nodes.back() != requests[q].destination) {
      throw InvalidArgument("path of request " + std::to_string(requests[q].id) + " does not join its endpoints");
    }
    for (int li : p.links) on_link[static_cast<std::size_t>(li)].push_back(static_cast<int>(q));
  }
  sol.spans.assign(nq, 0);
  sol.shared_spans.assign(nq, std::vector<int>(nq, 0));
  for (std::size_t l = 0; l < nl; ++l) {
    const int s = inst.span_count(static_cast<int>(l));
    for (int a : on_link[l]) {
      for (int b : on_link[l]) sol.shared_spans[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += s;
    }
  }
  for (std::size_t q = 0; q < nq; ++q) sol.spans[q] = sol.shared_spans[q][q];

  sol.cost.assign(nq, 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    double c = 0.0;
    for (int li : sol.paths[q].links) {
      const auto& link = topo.links()[static_cast<std::size_t>(li)];
      switch (method) {
        case RtoMethod::spr: c += link.length_km; break;
        case RtoMethod::scpr: c += link.length_km * static_cast<double>(on_link[static_cast<std::size_t>(li)].size()); break;
        case RtoMethod::scprr: {
          double w = 0.0;
          for (int i : on_link[static_cast<std::size_t>(li)]) w += requests[static_cast<std::size_t>(i)].rate_gbps;
          c += link.length_km * w;
          break;
        }
      }
    }
    sol.cost[q] = c;
    sol.goal += c;
  }
  order_traffic(sol, nl);
  return sol;
}

void order_traffic(RoutingSolution& sol, std::size_t link_count) {
  const std::size_t nq = sol.requests.size();
  sol.order.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) sol.order[q] = static_cast<int>(q);
  std::stable_sort(sol.order.begin(), sol.order.end(), [&](int a, int b) {
    const double ca = sol.cost[static_cast<std::size_t>(a)];
    const double cb = sol.cost[static_cast<std::size_t>(b)];
    if (ca != cb) return ca > cb;
    return sol.requests[static_cast<std::size_t>(a)].id < sol.requests[static_cast<std::size_t>(b)].id;
  });
  sol.rank.assign(nq, 0);
  for (std::size_t k = 0; k < nq; ++k) sol.rank[static_cast<std::size_t>(sol.order[k])] = static_cast<int>(k);
  sol.channel_order.assign(link_count, {});
  for (int q : sol.order) {
    for (int li : sol.paths[static_cast<std::size_t>(q)].links) sol.channel_order[static_cast<std::size_t>(li)].push_back(q);
  }
}

RoutingSolution route_spr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests) {
  std::vector<Path> paths;
  paths.reserve(requests.size());
  for (const auto& r : requests) {
    check_request(inst.topology, r);
    paths.push_back(shortest_path(inst.topology, r.source, r.destination));
  }
  return make_solution(inst, requests, std::move(paths), RtoMethod::spr);
}

RoutingSolution route_scpr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                           const SearchOptions& options) {
  return route_quadratic(inst, requests, options, RtoMethod::scpr);
}

RoutingSolution route_scprr(const NetworkInstance& inst, std::span<const ConnectionRequest> requests,
                            const SearchOptions& options) {
  return route_quadratic(inst, requests, options, RtoMethod::scprr);
}

RoutingSolution route(const NetworkInstance& inst, std::span<const ConnectionRequest> requests, RtoMethod method,
                      const SearchOptions& options) {
  switch (method) {
    case RtoMethod::spr: return route_spr(inst, requests);
    case RtoMethod::scpr: return route_scpr(inst, requests, options);
    case RtoMethod::scprr: return route_scprr(inst, requests, options);
  }
  throw InvalidArgument("unknown RTO method");
}

}  // namespace eon::rto
