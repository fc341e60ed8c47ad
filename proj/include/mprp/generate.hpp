#pragma once

// Seeded pseudo-random instance generation. Uniform values are drawn
// straight from the raw engine so output is identical across standard
// library implementations.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "mprp/model.hpp"

namespace mprp {

struct GenerateParams {
  uint64_t seed = 0;
  int n = 10;
  int m = 2;
  Mode mode = Mode::Mprp;
  double horizon = 480.0;
  double capacity = 100.0;
  double side = 100.0;  // sites land uniformly in [0, side]^2
  double q_min = 10.0;
  double q_max = 60.0;

  void check() const {
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
    if (!(side >= 0.0)) throw std::invalid_argument("side must be >= 0");
    if (!(q_min > 0.0) || q_max < q_min) throw std::invalid_argument("need 0 < q_min <= q_max");
  }
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Sites uniform in the square, windows as random sub-intervals of
// [0, horizon] covering at least a fifth of the remaining span (so ramp
// windows are never degenerate), quantities uniform in [q_min, q_max].
inline Instance generate_instance(const GenerateParams& params) {
  params.check();
  Instance inst;
  inst.depot = Point{params.side / 2.0, params.side / 2.0};
  inst.fleet_size = params.m;
  inst.capacity = params.capacity;
  inst.horizon = params.horizon;
  inst.mode = params.mode;
  std::mt19937_64 rng(params.seed);
  for (int i = 1; i <= params.n; ++i) {
    Site site;
    site.id = i;
    site.position.x = detail::uniform01(rng) * params.side;
    site.position.y = detail::uniform01(rng) * params.side;
    site.window_open = detail::uniform01(rng) * 0.6 * params.horizon;
    const double span = params.horizon - site.window_open;
    site.window_close = site.window_open + (0.2 + 0.8 * detail::uniform01(rng)) * span;
    const double q = params.q_min + detail::uniform01(rng) * (params.q_max - params.q_min);
    site.supply = params.mode == Mode::MprpMvs ? SupplyProfile::ramp(q) : SupplyProfile::fixed(q);
    inst.sites.push_back(site);
  }
  check_instance(inst);
  return inst;
}

}  // namespace mprp
