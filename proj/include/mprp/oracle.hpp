#pragma once

// Exhaustive reference solvers at tiny scale, used as ground truth for
// ratio measurement and test fixtures. Exact for the fixed-supply
// modes; for ramping supplies the optimum is searched over a finite
// grid of pickup instants and reported as a lower bound.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "mprp/model.hpp"
#include "mprp/validate.hpp"

namespace mprp {

struct OracleLimits {
  int max_sites = 6;
  int max_vehicles = 2;
  int mvs_time_grid = 8;  // candidate pickup instants per window

  void check() const {
    if (max_sites < 1 || max_vehicles < 1 || mvs_time_grid < 1)
      throw std::invalid_argument("oracle limits must all be >= 1");
  }
};

struct OracleResult {
  Solution solution;
  double profit = 0.0;
  bool grid_lower_bound = false;  // set for mvs: true optimum may be higher
};

namespace oracle_detail {

// Max-flow with real capacities on very small graphs (BFS augmenting).
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : head_(static_cast<size_t>(nodes), -1) {}

  void add_edge(int from, int to, double capacity) {
    push(from, to, capacity);
    push(to, from, 0.0);
  }

  double max_flow(int source, int sink) {
    double total = 0.0;
    for (;;) {
      std::vector<int> via(head_.size(), -1);
      std::queue<int> frontier;
      frontier.push(source);
      via[static_cast<size_t>(source)] = -2;
      while (!frontier.empty() && via[static_cast<size_t>(sink)] == -1) {
        const int u = frontier.front();
        frontier.pop();
        for (int e = head_[static_cast<size_t>(u)]; e != -1; e = next_[static_cast<size_t>(e)]) {
          const int v = to_[static_cast<size_t>(e)];
          if (via[static_cast<size_t>(v)] == -1 && cap_[static_cast<size_t>(e)] > kFlowEps) {
            via[static_cast<size_t>(v)] = e;
            frontier.push(v);
          }
        }
      }
      if (via[static_cast<size_t>(sink)] == -1) break;
      double bottleneck = std::numeric_limits<double>::infinity();
      for (int v = sink; v != source;) {
        const int e = via[static_cast<size_t>(v)];
        bottleneck = std::min(bottleneck, cap_[static_cast<size_t>(e)]);
        v = to_[static_cast<size_t>(e ^ 1)];
      }
      for (int v = sink; v != source;) {
        const int e = via[static_cast<size_t>(v)];
        cap_[static_cast<size_t>(e)] -= bottleneck;
        cap_[static_cast<size_t>(e ^ 1)] += bottleneck;
        v = to_[static_cast<size_t>(e ^ 1)];
      }
      total += bottleneck;
    }
    return total;
  }

  // Flow shipped over the idx-th added edge (in add_edge order).
  double flow_on(int edge_index) const {
    const size_t e = static_cast<size_t>(edge_index) * 2;
    return original_cap_[e] - cap_[e];
  }

 private:
  static constexpr double kFlowEps = 1e-12;

  void push(int from, int to, double capacity) {
    to_.push_back(to);
    cap_.push_back(capacity);
    original_cap_.push_back(capacity);
    next_.push_back(head_[static_cast<size_t>(from)]);
    head_[static_cast<size_t>(from)] = static_cast<int>(to_.size()) - 1;
  }

  std::vector<int> head_;
  std::vector<int> to_;
  std::vector<int> next_;
  std::vector<double> cap_;
  std::vector<double> original_cap_;
};

// Cheapest time-feasible visit order per site subset, independent of the
// production solvers. Index = bitmask over sites.
struct MaskRoute {
  bool feasible = false;
  double cost = 0.0;
  std::vector<int> order;
};

inline void mask_route_dfs(const Instance& inst, uint32_t remaining, double clock, double cost,
                           Point at, std::vector<int>& partial, MaskRoute& best) {
  if (remaining == 0) {
    const double total = cost + distance(at, inst.depot);
    if (!best.feasible || total < best.cost) {
      best.feasible = true;
      best.cost = total;
      best.order = partial;
    }
    return;
  }
  if (best.feasible && cost + distance(at, inst.depot) >= best.cost) return;
  for (int i = 0; i < inst.num_sites(); ++i) {
    const uint32_t bit = 1u << i;
    if (!(remaining & bit)) continue;
    const Site& s = inst.sites[static_cast<size_t>(i)];
    double arrival = clock + distance(at, s.position);
    if (arrival < s.window_open) arrival = s.window_open;
    if (arrival > s.window_close + kTimeTol) continue;
    partial.push_back(s.id);
    mask_route_dfs(inst, remaining & ~bit, arrival, cost + distance(at, s.position), s.position,
                   partial, best);
    partial.pop_back();
  }
}

inline std::vector<MaskRoute> all_mask_routes(const Instance& inst) {
  const uint32_t masks = 1u << inst.num_sites();
  std::vector<MaskRoute> routes(masks);
  routes[0].feasible = true;
  for (uint32_t mask = 1; mask < masks; ++mask) {
    std::vector<int> partial;
    mask_route_dfs(inst, mask, 0.0, 0.0, inst.depot, partial, routes[mask]);
  }
  return routes;
}

inline double mask_supply(const Instance& inst, uint32_t mask) {
  double total = 0.0;
  for (int i = 0; i < inst.num_sites(); ++i)
    if (mask & (1u << i)) total += inst.sites[static_cast<size_t>(i)].supply.quantity;
  return total;
}

// Optimal shared pickups for fixed visit sets: a transportation problem,
// solved exactly as max flow (vehicle caps Q, site caps q_i).
inline double shared_reward(const Instance& inst, const std::vector<uint32_t>& masks,
                            std::vector<std::vector<double>>* pickups_out) {
  const int m = static_cast<int>(masks.size());
  const int n = inst.num_sites();
  // Nodes: 0 source, 1 sink, 2..2+m-1 vehicles, 2+m..2+m+n-1 sites.
  FlowNetwork net(2 + m + n);
  int edge_index = 0;
  std::vector<std::vector<std::pair<int, int>>> visit_edges(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) {
    net.add_edge(0, 2 + k, inst.capacity);
    ++edge_index;
  }
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i)
      if (masks[static_cast<size_t>(k)] & (1u << i)) {
        net.add_edge(2 + k, 2 + m + i, inst.capacity);
        visit_edges[static_cast<size_t>(k)].push_back({i, edge_index});
        ++edge_index;
      }
  for (int i = 0; i < n; ++i) {
    net.add_edge(2 + m + i, 1, inst.sites[static_cast<size_t>(i)].supply.quantity);
    ++edge_index;
  }
  const double reward = net.max_flow(0, 1);
  if (pickups_out) {
    pickups_out->assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int k = 0; k < m; ++k)
      for (const auto& [site_index, edge] : visit_edges[static_cast<size_t>(k)])
        (*pickups_out)[static_cast<size_t>(k)][static_cast<size_t>(site_index)] = net.flow_on(edge);
  }
  return reward;
}

// Timed route for the variable-supply search: ordered sites with chosen
// service instants from the per-site grid.
struct TimedRoute {
  double cost = 0.0;
  std::vector<std::pair<int, double>> stops;  // (site id, service instant)
};

inline void timed_route_dfs(const Instance& inst, const std::vector<std::vector<double>>& grids,
                            uint32_t remaining, double clock, double cost, Point at,
                            std::vector<std::pair<int, double>>& partial,
                            std::map<std::vector<std::pair<int, double>>, TimedRoute>& catalog) {
  {
    std::vector<std::pair<int, double>> key = partial;
    std::sort(key.begin(), key.end());
    auto it = catalog.find(key);
    const double total = cost + distance(at, inst.depot);
    if (it == catalog.end() || total < it->second.cost)
      catalog[key] = TimedRoute{total, partial};
  }
  for (int i = 0; i < inst.num_sites(); ++i) {
    const uint32_t bit = 1u << i;
    if (!(remaining & bit)) continue;
    const Site& s = inst.sites[static_cast<size_t>(i)];
    const double earliest = clock + distance(at, s.position);
    for (double t : grids[static_cast<size_t>(i)]) {
      if (t + kTimeTol < earliest) continue;  // cannot reach that early
      if (t > s.window_close + kTimeTol) break;
      partial.push_back({s.id, t});
      timed_route_dfs(inst, grids, remaining & ~bit, t, cost + distance(at, s.position), s.position,
                      partial, catalog);
      partial.pop_back();
    }
  }
}

// Optimal pickups for fixed timed visits: max flow where each site's
// pickup instants form a chain whose prefix capacities follow the ramp.
inline double timed_reward(const Instance& inst, const std::vector<const TimedRoute*>& routes,
                           std::vector<std::vector<double>>* pickups_out) {
  const int m = static_cast<int>(routes.size());
  struct Instant {
    double time;
    std::vector<std::pair<int, int>> visits;  // (vehicle, stop index)
  };
  std::vector<std::vector<Instant>> instants(static_cast<size_t>(inst.num_sites()) + 1);
  for (int k = 0; k < m; ++k)
    for (size_t s = 0; s < routes[static_cast<size_t>(k)]->stops.size(); ++s) {
      const auto& [site, t] = routes[static_cast<size_t>(k)]->stops[s];
      auto& list = instants[static_cast<size_t>(site)];
      auto it = std::find_if(list.begin(), list.end(),
                             [&](const Instant& x) { return x.time == t; });
      if (it == list.end()) {
        list.push_back(Instant{t, {{k, static_cast<int>(s)}}});
      } else {
        it->visits.push_back({k, static_cast<int>(s)});
      }
    }
  int nodes = 2 + m;
  std::vector<std::vector<int>> chain_node(instants.size());
  for (size_t site = 1; site < instants.size(); ++site) {
    std::sort(instants[site].begin(), instants[site].end(),
              [](const Instant& a, const Instant& b) { return a.time < b.time; });
    for (size_t j = 0; j < instants[site].size(); ++j) chain_node[site].push_back(nodes++);
  }
  FlowNetwork net(nodes);
  int edge_index = 0;
  for (int k = 0; k < m; ++k) {
    net.add_edge(0, 2 + k, inst.capacity);
    ++edge_index;
  }
  std::vector<std::vector<int>> stop_edge(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) stop_edge[static_cast<size_t>(k)].assign(routes[static_cast<size_t>(k)]->stops.size(), -1);
  for (size_t site = 1; site < instants.size(); ++site) {
    const auto& list = instants[site];
    for (size_t j = 0; j < list.size(); ++j) {
      for (const auto& [vehicle, stop] : list[j].visits) {
        net.add_edge(2 + vehicle, chain_node[site][j], inst.capacity);
        stop_edge[static_cast<size_t>(vehicle)][static_cast<size_t>(stop)] = edge_index;
        ++edge_index;
      }
      const double cap = supply_at(inst.site(static_cast<int>(site)), list[j].time);
      const int to = j + 1 < list.size() ? chain_node[site][j + 1] : 1;
      net.add_edge(chain_node[site][j], to, cap);
      ++edge_index;
    }
  }
  const double reward = net.max_flow(0, 1);
  if (pickups_out) {
    pickups_out->assign(static_cast<size_t>(m), {});
    for (int k = 0; k < m; ++k) {
      (*pickups_out)[static_cast<size_t>(k)].assign(routes[static_cast<size_t>(k)]->stops.size(), 0.0);
      for (size_t s = 0; s < routes[static_cast<size_t>(k)]->stops.size(); ++s)
        (*pickups_out)[static_cast<size_t>(k)][s] = net.flow_on(stop_edge[static_cast<size_t>(k)][s]);
    }
  }
  return reward;
}

}  // namespace oracle_detail

// Exhaustive optimum within the limits; refuses (nullopt) beyond them.
// Fixed modes are exact; the mvs result is the best solution with
// pickups on a per-window time grid, i.e. a certified lower bound.
inline std::optional<OracleResult> brute_force_optimum(const Instance& inst,
                                                       const OracleLimits& limits = {}) {
  limits.check();
  if (inst.num_sites() > limits.max_sites || inst.fleet_size > limits.max_vehicles)
    return std::nullopt;
  const int n = inst.num_sites();
  const int m = inst.fleet_size;

  OracleResult result;
  result.solution = empty_solution(inst);
  result.solution.set_profit(evaluate_profit(inst, result.solution));
  result.profit = 0.0;

  if (inst.mode == Mode::Mprp || inst.mode == Mode::MprpM) {
    const auto routes = oracle_detail::all_mask_routes(inst);
    std::vector<uint32_t> feasible;
    for (uint32_t mask = 0; mask < routes.size(); ++mask)
      if (routes[mask].feasible) feasible.push_back(mask);

    std::vector<uint32_t> masks(static_cast<size_t>(m), 0);
    std::vector<uint32_t> best_masks(static_cast<size_t>(m), 0);
    double best_profit = 0.0;
    bool improved = false;

    auto consider = [&]() {
      double cost = 0.0;
      for (uint32_t mask : masks) cost += routes[mask].cost;
      double reward = 0.0;
      if (inst.mode == Mode::Mprp) {
        for (uint32_t mask : masks) reward += std::min(oracle_detail::mask_supply(inst, mask), inst.capacity);
      } else {
        reward = oracle_detail::shared_reward(inst, masks, nullptr);
      }
      const double profit = reward - cost;
      if (profit > best_profit + kQtyTol) {
        best_profit = profit;
        best_masks = masks;
        improved = true;
      }
    };
    auto recurse = [&](auto&& self, int vehicle, uint32_t used) -> void {
      if (vehicle == m) {
        consider();
        return;
      }
      for (uint32_t mask : feasible) {
        if (inst.mode == Mode::Mprp && (mask & used)) continue;
        masks[static_cast<size_t>(vehicle)] = mask;
        self(self, vehicle + 1, used | mask);
      }
    };
    recurse(recurse, 0, 0);

    if (improved) {
      std::vector<std::vector<double>> pickups;
      if (inst.mode == Mode::MprpM) oracle_detail::shared_reward(inst, best_masks, &pickups);
      for (int k = 0; k < m; ++k) {
        const auto& route = routes[best_masks[static_cast<size_t>(k)]];
        auto tour = schedule_tour(inst, k + 1, route.order, 0.0);
        if (!tour) throw std::logic_error("oracle route lost feasibility");
        if (inst.mode == Mode::Mprp) {
          double room = inst.capacity;
          for (Visit& v : tour->visits) {
            v.pickup = std::min(inst.site(v.site_id).supply.quantity, room);
            room -= v.pickup;
          }
        } else {
          for (Visit& v : tour->visits)
            v.pickup = pickups[static_cast<size_t>(k)][static_cast<size_t>(v.site_id - 1)];
        }
        result.solution.tours[static_cast<size_t>(k)] = *tour;
      }
      result.solution.set_profit(evaluate_profit(inst, result.solution));
      result.profit = result.solution.profit;
    }
    return result;
  }

  // Variable supply: enumerate timed routes per vehicle on the grid,
  // dominance-pruned by (site, instant) multiset, then search route
  // combinations with exact pickups from the chain flow.
  result.grid_lower_bound = true;
  std::vector<std::vector<double>> grids(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Site& s = inst.sites[static_cast<size_t>(i)];
    const int g = std::max(2, limits.mvs_time_grid);
    for (int j = 0; j < g; ++j) {
      const double t = s.window_open + (s.window_close - s.window_open) * j / (g - 1);
      if (supply_at(s, t) > 0.0) grids[static_cast<size_t>(i)].push_back(t);
    }
  }
  std::map<std::vector<std::pair<int, double>>, oracle_detail::TimedRoute> catalog;
  {
    std::vector<std::pair<int, double>> partial;
    oracle_detail::timed_route_dfs(inst, grids, (1u << n) - 1, 0.0, 0.0, inst.depot, partial, catalog);
  }
  std::vector<const oracle_detail::TimedRoute*> all_routes;
  all_routes.reserve(catalog.size());
  for (const auto& [key, route] : catalog) all_routes.push_back(&route);

  std::vector<const oracle_detail::TimedRoute*> pick(static_cast<size_t>(m), nullptr);
  std::vector<const oracle_detail::TimedRoute*> best_pick(static_cast<size_t>(m), nullptr);
  double best_profit = 0.0;
  bool improved = false;
  auto consider = [&]() {
    double cost = 0.0;
    for (const auto* r : pick) cost += r->cost;
    const double upper = oracle_detail::timed_reward(inst, pick, nullptr) - cost;
    if (upper > best_profit + kQtyTol) {
      best_profit = upper;
      best_pick = pick;
      improved = true;
    }
  };
  auto recurse = [&](auto&& self, int vehicle) -> void {
    if (vehicle == m) {
      consider();
      return;
    }
    for (const auto* r : all_routes) {
      pick[static_cast<size_t>(vehicle)] = r;
      self(self, vehicle + 1);
    }
  };
  recurse(recurse, 0);

  if (improved) {
    std::vector<std::vector<double>> pickups;
    oracle_detail::timed_reward(inst, best_pick, &pickups);
    for (int k = 0; k < m; ++k) {
      Tour& tour = result.solution.tours[static_cast<size_t>(k)];
      for (size_t s = 0; s < best_pick[static_cast<size_t>(k)]->stops.size(); ++s) {
        const auto& [site, t] = best_pick[static_cast<size_t>(k)]->stops[s];
        tour.visits.push_back(Visit{site, t, pickups[static_cast<size_t>(k)][s]});
      }
    }
    result.solution.set_profit(evaluate_profit(inst, result.solution));
    result.profit = result.solution.profit;
  }
  return result;
}

// Oracle-to-solver profit ratio; infinity when the solver found nothing
// but the oracle did.
inline double measure_ratio(double oracle_profit, double solver_profit) {
  if (oracle_profit < 0.0 || solver_profit < -kQtyTol)
    throw std::invalid_argument("measure_ratio expects nonnegative profits");
  if (!(oracle_profit > 0.0)) throw std::invalid_argument("measure_ratio expects oracle profit > 0");
  if (solver_profit <= kQtyTol) return std::numeric_limits<double>::infinity();
  return oracle_profit / solver_profit;
}

struct RatioStats {
  int count = 0;
  int infinite = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;  // over finite ratios
};

inline RatioStats aggregate_ratios(const std::vector<double>& ratios) {
  RatioStats stats;
  double sum = 0.0;
  int finite = 0;
  for (double r : ratios) {
    ++stats.count;
    if (std::isinf(r)) {
      ++stats.infinite;
      continue;
    }
    stats.max_ratio = std::max(stats.max_ratio, r);
    sum += r;
    ++finite;
  }
  stats.mean_ratio = finite > 0 ? sum / finite : 0.0;
  return stats;
}

}  // namespace mprp
