#pragma once

// Time-varying supply pipeline: split each ramp window into geometric
// intervals, build a constant-supply instance over (origin, level)
// pseudo-sites, run the multi-visit pipeline on it, and map the result
// back onto the original sites under the cumulative availability rule.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mprp/model.hpp"
#include "mprp/reassign.hpp"
#include "mprp/validate.hpp"

namespace mprp {

// Smallest alpha with q_i(e_i) <= alpha * q_j(e_j) for all i, j: the
// max/min ratio of end-of-window supplies. 1 for zero or one site.
inline double compute_alpha(const Instance& inst) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const Site& s : inst.sites) {
    const double q_end = supply_at(s, s.window_close);
    if (!(q_end > 0.0))
      throw std::invalid_argument("site " + std::to_string(s.id) + ": end-of-window supply must be > 0");
    lo = std::min(lo, q_end);
    hi = std::max(hi, q_end);
  }
  if (inst.sites.empty()) return 1.0;
  return hi / lo;
}

namespace detail {

// Ceiling with a small guard so values a float ulp away from an integer
// land on that integer.
inline int guarded_ceil(double v) { return static_cast<int>(std::ceil(v - 1e-9)); }

}  // namespace detail

// Interval count per window: 1 + ceil(ln(alpha) / epsilon), floored at 2
// (the per-level quantity formula divides by N - 1).
inline int num_intervals(double alpha, double epsilon) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return std::max(2, 1 + detail::guarded_ceil(std::log(alpha) / epsilon));
}

// The N geometric sub-intervals of [s, e]:
//   L_l = [s + (e-s)/(1+eps)^(N-l+1), s + (e-s)/(1+eps)^(N-l)].
// Consecutive intervals share endpoints and the last one ends exactly at
// e; the prefix [s, s + (e-s)/(1+eps)^N) stays uncovered.
inline std::vector<std::pair<double, double>> split_intervals(const Site& site, int n_intervals,
                                                              double epsilon) {
  if (n_intervals < 2) throw std::invalid_argument("interval count must be >= 2");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const double span = site.window_close - site.window_open;
  if (!(span > 0.0)) throw std::invalid_argument("site " + std::to_string(site.id) + ": zero-length window");
  auto cut = [&](int power) { return site.window_open + span / std::pow(1.0 + epsilon, power); };
  std::vector<std::pair<double, double>> intervals;
  intervals.reserve(static_cast<size_t>(n_intervals));
  for (int l = 1; l <= n_intervals; ++l) {
    const double lo = cut(n_intervals - l + 1);
    const double hi = l == n_intervals ? site.window_close : cut(n_intervals - l);
    intervals.emplace_back(lo, hi);
  }
  return intervals;
}

struct DerivedSite {
  int origin_id = 0;
  int level = 0;  // 1..N
};

struct DerivedInstance {
  Instance base;                        // multi-visit fixed instance over n*N sites
  std::vector<DerivedSite> origin_of;   // derived id - 1 -> (origin, level)
  double epsilon = 0.0;
  double alpha = 1.0;
  int intervals = 0;

  const DerivedSite& origin(int derived_id) const {
    if (derived_id < 1 || derived_id > static_cast<int>(origin_of.size()))
      throw std::logic_error("unmappable derived site id " + std::to_string(derived_id));
    return origin_of[static_cast<size_t>(derived_id - 1)];
  }
};

// Constant-supply instance with N pseudo-sites per origin, window L_l
// and quantity q(e) * (l - 0.5) / (N - 1) clamped to the ramp value at
// the interval's upper end (the raw formula overshoots the supply at
// l = N).
inline DerivedInstance derive_instance(const Instance& inst, double epsilon) {
  if (inst.mode != Mode::MprpMvs) throw std::invalid_argument("derive_instance needs an mvs instance");
  DerivedInstance derived;
  derived.epsilon = epsilon;
  derived.alpha = compute_alpha(inst);
  derived.intervals = num_intervals(derived.alpha, epsilon);

  derived.base.depot = inst.depot;
  derived.base.fleet_size = inst.fleet_size;
  derived.base.capacity = inst.capacity;
  derived.base.horizon = inst.horizon;
  derived.base.mode = Mode::MprpM;

  const int n_levels = derived.intervals;
  for (const Site& origin : inst.sites) {
    const auto intervals = split_intervals(origin, n_levels, epsilon);
    const double q_end = supply_at(origin, origin.window_close);
    for (int l = 1; l <= n_levels; ++l) {
      const auto [lo, hi] = intervals[static_cast<size_t>(l - 1)];
      const double raw = q_end * (l - 0.5) / (n_levels - 1);
      Site site;
      site.id = (origin.id - 1) * n_levels + l;
      site.position = origin.position;
      site.window_open = lo;
      site.window_close = hi;
      site.supply = SupplyProfile::fixed(std::min(raw, supply_at(origin, hi)));
      derived.base.sites.push_back(site);
      derived.origin_of.push_back(DerivedSite{origin.id, l});
    }
  }
  check_instance(derived.base);
  return derived;
}

// Projects a solution on the derived instance back onto the original
// sites: each derived visit keeps its arrival instant (the waiting that
// the derived windows forced is the point of the reduction); per tour,
// visits to several levels of one origin collapse into the earliest
// visit with summed pickup. Dropping the later duplicates only creates
// slack, so the kept instants remain a valid waiting schedule. Pickups
// are then clamped earliest-first so cumulative pickups per origin
// never outrun the ramp and no vehicle exceeds its capacity.
inline Solution map_back(const Instance& inst, const Solution& derived_sol,
                         const DerivedInstance& derived) {
  Solution sol = empty_solution(inst);
  for (size_t k = 0; k < derived_sol.tours.size(); ++k) {
    const Tour& dtour = derived_sol.tours[k];
    Tour& tour = sol.tours[k];
    tour.start_time = dtour.start_time;
    for (const Visit& v : dtour.visits) {
      const int origin = derived.origin(v.site_id).origin_id;
      bool merged = false;
      for (Visit& kept : tour.visits) {
        if (kept.site_id == origin) {
          kept.pickup += v.pickup;
          merged = true;
          break;
        }
      }
      if (!merged) tour.visits.push_back(Visit{origin, v.arrival, v.pickup});
    }
  }

  // Availability clamp, earliest pickup first (ties by vehicle id).
  struct Ref {
    double time;
    int vehicle;
    size_t tour_index;
    size_t visit_index;
  };
  std::vector<Ref> refs;
  for (size_t k = 0; k < sol.tours.size(); ++k)
    for (size_t v = 0; v < sol.tours[k].visits.size(); ++v)
      refs.push_back(Ref{sol.tours[k].visits[v].arrival, sol.tours[k].vehicle_id, k, v});
  std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.vehicle < b.vehicle;
  });
  std::vector<double> taken(static_cast<size_t>(inst.num_sites()) + 1, 0.0);
  for (const Ref& r : refs) {
    Visit& visit = sol.tours[r.tour_index].visits[r.visit_index];
    const double available = supply_at(inst.site(visit.site_id), visit.arrival);
    const double room = std::max(0.0, available - taken[static_cast<size_t>(visit.site_id)]);
    visit.pickup = std::min(visit.pickup, room);
    taken[static_cast<size_t>(visit.site_id)] += visit.pickup;
  }

  // Capacity clamp per tour; shrinking pickups cannot break availability.
  for (Tour& tour : sol.tours) {
    double room = inst.capacity;
    for (Visit& v : tour.visits) {
      v.pickup = std::min(v.pickup, room);
      room -= v.pickup;
    }
  }

  sol.set_profit(evaluate_profit(inst, sol));
  return sol;
}

// Full variable-supply pipeline; falls back to the empty solution when
// the mapped result loses money.
inline Solution solve_mprp_mvs(const Instance& inst, double epsilon, const SolverConfig& config,
                               MprpMLog* log = nullptr) {
  if (inst.mode != Mode::MprpMvs) throw std::invalid_argument("solve_mprp_mvs needs an mvs instance");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const DerivedInstance derived = derive_instance(inst, epsilon);
  const Solution derived_sol = solve_mprp_m(derived.base, config, log);
  Solution sol = map_back(inst, derived_sol, derived);
  if (sol.profit < 0.0) {
    Solution empty = empty_solution(inst);
    empty.set_profit(evaluate_profit(inst, empty));
    return empty;
  }
  return sol;
}

// Mode dispatch used by the CLI, benchmarks, and diagnostics.
inline Solution solve_for_mode(const Instance& inst, const SolverConfig& config, double epsilon,
                               MprpMLog* log = nullptr) {
  switch (inst.mode) {
    case Mode::Mprp: return solve_baseline(inst, config);
    case Mode::MprpM: return solve_mprp_m(inst, config, log);
    case Mode::MprpMvs: return solve_mprp_mvs(inst, epsilon, config, log);
  }
  throw std::invalid_argument("unknown mode");
}

struct FleetDiagnostic {
  double profit_fleet = 0.0;  // with the instance's own m
  double profit_single = 0.0;  // same sites, one vehicle
  double ratio = 1.0;          // profit_fleet / profit_single
  double bound = 1.0;          // (1 + 1/(1+sqrt(m)))^2
};

// Fleet-size sensitivity probe: profit with the full fleet versus one
// vehicle on the same sites. Reported, never asserted.
inline FleetDiagnostic fleet_ratio_diagnostic(const Instance& inst, const SolverConfig& config,
                                              double epsilon) {
  FleetDiagnostic diag;
  const double root = std::sqrt(static_cast<double>(inst.fleet_size));
  diag.bound = std::pow(1.0 + 1.0 / (1.0 + root), 2.0);
  diag.profit_fleet = solve_for_mode(inst, config, epsilon).profit;
  Instance single = inst;
  single.fleet_size = 1;
  diag.profit_single = solve_for_mode(single, config, epsilon).profit;
  if (diag.profit_single > kQtyTol)
    diag.ratio = diag.profit_fleet / diag.profit_single;
  else
    diag.ratio = diag.profit_fleet > kQtyTol ? std::numeric_limits<double>::infinity() : 1.0;
  return diag;
}

}  // namespace mprp
