#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmuplace/case.hpp"

namespace pmuplace {

// Mean-reverting ratio process parameters. With the defaults the stationary
// standard deviation is about 2%, small next to outage-induced phasor jumps.
struct OUParams {
  double reversion_rate = 0.01;  // 1/step
  double volatility = 0.003;     // per sqrt(step)
  double long_run_mean = 1.0;
  double dt = 1.0;  // steps (one step = one 10 s measurement interval)
  std::uint64_t seed = 0;
};

// 24-hour per-bus demand ratios and the induced system generation level.
struct DemandProfile {
  std::vector<int> load_bus_index;  // internal bus indices, one per column
  Eigen::MatrixXd ratios;           // T x n_load
  Eigen::MatrixXd demand_p;         // T x n_load, p.u.
  Eigen::MatrixXd demand_q;         // T x n_load, p.u.
  Eigen::VectorXd generation_level; // length T; row mean of ratios

  int steps() const { return static_cast<int>(ratios.rows()); }
  // Full per-bus complex demand at time t for an N-bus system.
  Eigen::VectorXcd demand_at(int t, int bus_count) const;
};

// Independent exact-discretization OU paths, one column per bus, Xature0 = mean.
// Per-column sub-seeds make the result independent of generation order.
Eigen::MatrixXd generate_ratios(const OUParams& params, int n_steps, int n_buses);

// Scales the case's base demand by the ratio matrix; same ratio for P and Q.
// Ratios are clamped to [0.5, 1.5]; clamp events are counted in the return.
DemandProfile build_profile(const PowerSystemCase& c, const Eigen::MatrixXd& ratios);

DemandProfile synthesize_profile(const PowerSystemCase& c, const OUParams& params,
                                 int n_steps = 8640);

// Columnar CSV (t, bus_id, ratio, p, q) and a compact binary cache.
void write_profile_csv(const DemandProfile& p, const PowerSystemCase& c,
                       const std::string& path);
void save_profile(const DemandProfile& p, const std::string& path);
DemandProfile load_profile(const std::string& path);

}  // namespace pmuplace
