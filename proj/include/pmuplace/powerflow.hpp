#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pmuplace/case.hpp"

namespace pmuplace {

// Per-bus voltage phasors at one time point. Angles are relative to the
// reference bus, which is pinned at exactly 0.
struct PhasorState {
  Eigen::VectorXd magnitudes;  // p.u., strictly positive
  Eigen::VectorXd angles;      // rad

  int bus_count() const { return static_cast<int>(magnitudes.size()); }
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double max_mismatch = 0.0;  // p.u. power
};

struct SolverSettings {
  double tolerance = 1e-8;  // max |mismatch| in p.u.
  int max_iterations = 30;
};

using ComplexVector = Eigen::VectorXcd;

// Bus admittance matrix over in-service branches plus bus shunts.
Eigen::MatrixXcd build_admittance(const PowerSystemCase& c);

// True when every bus is reachable over in-service branches.
bool is_connected(const PowerSystemCase& c);

// Newton-Raphson AC power flow in polar coordinates, flat start. `demand`
// holds per-bus complex power draw (p.u.); generator active injections are
// the case values times `generation_scale`, with the slack bus absorbing
// the residual. Does not converge -> report.converged == false.
std::pair<PhasorState, SolveReport> solve_ac(const PowerSystemCase& c,
                                             const ComplexVector& demand,
                                             double generation_scale,
                                             const SolverSettings& settings = {});

// Base-case demand as a complex vector (p.u.).
ComplexVector base_demand(const PowerSystemCase& c);

// Copy of `c` with every branch of the merged class out of service.
PowerSystemCase apply_outage(const PowerSystemCase& c, const OutageClass& cls);

struct FeasibilityResult {
  bool feasible = false;
  InfeasibilityReason reason = InfeasibilityReason::None;
};

// Infeasible iff the outage disconnects the grid or the post-outage power
// flow fails to converge at the given demand.
FeasibilityResult classify_feasibility(const PowerSystemCase& c,
                                       const OutageClass& cls,
                                       const ComplexVector& demand,
                                       double generation_scale,
                                       const SolverSettings& settings = {});

// Runs classify_feasibility over every merged class at base demand and
// assigns contiguous class indices 1..K to the feasible ones.
void screen_catalog(const PowerSystemCase& c, OutageCatalog& catalog,
                    const SolverSettings& settings = {});

// Active-power balance residual |generation - demand - losses| of a solved
// state (p.u.); diagnostic for tests and reports.
double power_balance_residual(const PowerSystemCase& c, const ComplexVector& demand,
                              double generation_scale, const PhasorState& state);

}  // namespace pmuplace
