#include "pmuplace/powerflow.hpp"

#include <cmath>
#include <numeric>

#include "pmuplace/errors.hpp"

namespace pmuplace {

namespace {

using Complex = std::complex<double>;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

Eigen::MatrixXcd build_admittance(const PowerSystemCase& c) {
  const int n = c.bus_count();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : c.branches) {
    if (!br.in_service) continue;
    Complex ys = 1.0 / Complex(br.resistance, br.reactance);
    Complex bc(0.0, br.charging_susceptance / 2.0);
    double tap = br.tap_ratio;
    Complex shift = std::polar(1.0, br.phase_shift);
    Complex t = tap * shift;  // complex tap on the from side
    int f = br.from_bus, to = br.to_bus;
    y(f, f) += (ys + bc) / std::norm(t);
    y(to, to) += ys + bc;
    y(f, to) += -ys / std::conj(t);
    y(to, f) += -ys / t;
  }
  for (int i = 0; i < n; ++i) y(i, i) += Complex(c.buses[i].shunt_g, c.buses[i].shunt_b);
  return y;
}

bool is_connected(const PowerSystemCase& c) {
  const int n = c.bus_count();
  if (n == 0) return false;
  UnionFind uf(n);
  for (const auto& br : c.branches)
    if (br.in_service) uf.unite(br.from_bus, br.to_bus);
  int root = uf.find(0);
  for (int i = 1; i < n; ++i)
    if (uf.find(i) != root) return false;
  return true;
}

ComplexVector base_demand(const PowerSystemCase& c) {
  ComplexVector d(c.bus_count());
  for (int i = 0; i < c.bus_count(); ++i)
    d(i) = Complex(c.buses[i].demand_p, c.buses[i].demand_q);
  return d;
}

std::pair<PhasorState, SolveReport> solve_ac(const PowerSystemCase& c,
                                             const ComplexVector& demand,
                                             double generation_scale,
                                             const SolverSettings& settings) {
  const int n = c.bus_count();
  if (demand.size() != n) throw DataError("demand vector length does not match bus count");
  if (!(generation_scale > 0)) throw DataError("generation_scale must be positive");

  const Eigen::MatrixXcd ybus = build_admittance(c);

  // Scheduled complex injection; reactive part is meaningful only at PQ buses.
  ComplexVector s_spec = -demand;
  for (const auto& g : c.generators)
    if (g.in_service) s_spec(g.bus) += Complex(g.active_power * generation_scale, 0.0);

  std::vector<int> pv, pq;
  for (int i = 0; i < n; ++i) {
    if (i == c.reference_bus) continue;
    if (c.buses[i].kind == BusKind::PV)
      pv.push_back(i);
    else
      pq.push_back(i);
  }
  std::vector<int> pvpq = pv;
  pvpq.insert(pvpq.end(), pq.begin(), pq.end());
  const int npv = static_cast<int>(pv.size());
  const int npq = static_cast<int>(pq.size());

  // Flat start: angles 0, PQ magnitudes 1, PV/slack at setpoints.
  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (c.buses[i].kind != BusKind::PQ) vm(i) = c.buses[i].voltage_setpoint;

  auto voltages = [&] {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
    return v;
  };

  auto mismatch = [&](const ComplexVector& v, Eigen::VectorXd& f) {
    ComplexVector s = v.array() * (ybus * v).conjugate().array();
    f.resize(npv + 2 * npq);
    for (int k = 0; k < npv + npq; ++k)
      f(k) = s(pvpq[k]).real() - s_spec(pvpq[k]).real();
    for (int k = 0; k < npq; ++k)
      f(npv + npq + k) = s(pq[k]).imag() - s_spec(pq[k]).imag();
  };

  SolveReport report;
  Eigen::VectorXd f;
  ComplexVector v = voltages();
  mismatch(v, f);
  double norm = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  report.max_mismatch = norm;

  while (norm > settings.tolerance && report.iterations < settings.max_iterations) {
    // dS/dVa, dS/dVm in complex form
    ComplexVector ibus = ybus * v;
    Eigen::MatrixXcd diag_v = v.asDiagonal();
    Eigen::MatrixXcd diag_i = ibus.asDiagonal();
    ComplexVector vnorm(n);
    for (int i = 0; i < n; ++i) vnorm(i) = v(i) / std::abs(v(i));
    Eigen::MatrixXcd ds_dva =
        Complex(0, 1) * diag_v * (diag_i - ybus * diag_v).conjugate();
    Eigen::MatrixXcd ds_dvm =
        diag_v * (ybus * Eigen::MatrixXcd(vnorm.asDiagonal())).conjugate() +
        diag_i.conjugate() * Eigen::MatrixXcd(vnorm.asDiagonal());

    const int m = npv + 2 * npq;
    Eigen::MatrixXd jac(m, m);
    for (int r = 0; r < npv + npq; ++r) {
      for (int cidx = 0; cidx < npv + npq; ++cidx)
        jac(r, cidx) = ds_dva(pvpq[r], pvpq[cidx]).real();
      for (int cidx = 0; cidx < npq; ++cidx)
        jac(r, npv + npq + cidx) = ds_dvm(pvpq[r], pq[cidx]).real();
    }
    for (int r = 0; r < npq; ++r) {
      for (int cidx = 0; cidx < npv + npq; ++cidx)
        jac(npv + npq + r, cidx) = ds_dva(pq[r], pvpq[cidx]).imag();
      for (int cidx = 0; cidx < npq; ++cidx)
        jac(npv + npq + r, npv + npq + cidx) = ds_dvm(pq[r], pq[cidx]).imag();
    }

    Eigen::VectorXd dx = jac.partialPivLu().solve(f);
    if (!dx.allFinite()) break;  // singular Jacobian; report non-convergence

    for (int k = 0; k < npv + npq; ++k) va(pvpq[k]) -= dx(k);
    for (int k = 0; k < npq; ++k) vm(pq[k]) -= dx(npv + npq + k);

    ++report.iterations;
    v = voltages();
    mismatch(v, f);
    norm = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    report.max_mismatch = norm;
    if (!std::isfinite(norm)) break;
  }

  report.converged = std::isfinite(norm) && norm <= settings.tolerance &&
                     (vm.array() > 0).all();

  PhasorState state;
  state.magnitudes = vm;
  state.angles = va;
  return {state, report};
}

PowerSystemCase apply_outage(const PowerSystemCase& c, const OutageClass& cls) {
  PowerSystemCase out = c;
  for (int b : cls.branch_ids) out.branches[b].in_service = false;
  return out;
}

FeasibilityResult classify_feasibility(const PowerSystemCase& c,
                                       const OutageClass& cls,
                                       const ComplexVector& demand,
                                       double generation_scale,
                                       const SolverSettings& settings) {
  PowerSystemCase outaged = apply_outage(c, cls);
  if (!is_connected(outaged))
    return {false, InfeasibilityReason::Disconnects};
  auto [state, report] = solve_ac(outaged, demand, generation_scale, settings);
  if (!report.converged) return {false, InfeasibilityReason::Diverges};
  return {true, InfeasibilityReason::None};
}

void screen_catalog(const PowerSystemCase& c, OutageCatalog& catalog,
                    const SolverSettings& settings) {
  ComplexVector demand = base_demand(c);
  int next_index = 1;
  for (auto& cls : catalog.classes) {
    auto res = classify_feasibility(c, cls, demand, 1.0, settings);
    cls.screened = true;
    cls.feasible = res.feasible;
    cls.reason = res.reason;
    cls.class_index = res.feasible ? next_index++ : 0;
  }
}

double power_balance_residual(const PowerSystemCase& c, const ComplexVector& demand,
                              double generation_scale, const PhasorState& state) {
  const int n = c.bus_count();
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(state.magnitudes(i), state.angles(i));
  Eigen::MatrixXcd ybus = build_admittance(c);
  ComplexVector s = v.array() * (ybus * v).conjugate().array();

  // Network + shunt losses from per-branch flows.
  double losses = 0.0;
  for (const auto& br : c.branches) {
    if (!br.in_service) continue;
    Complex ys = 1.0 / Complex(br.resistance, br.reactance);
    Complex bc(0.0, br.charging_susceptance / 2.0);
    Complex t = br.tap_ratio * std::polar(1.0, br.phase_shift);
    Complex vf = v(br.from_bus), vt = v(br.to_bus);
    Complex if_ = ((ys + bc) / std::norm(t)) * vf + (-ys / std::conj(t)) * vt;
    Complex it = (-ys / t) * vf + (ys + bc) * vt;
    losses += (vf * std::conj(if_)).real() + (vt * std::conj(it)).real();
  }
  for (int i = 0; i < n; ++i)
    losses += c.buses[i].shunt_g * state.magnitudes(i) * state.magnitudes(i);

  // Generation: scheduled at non-slack buses, recovered from the injection
  // at the slack bus.
  double gen = 0.0;
  for (const auto& g : c.generators)
    if (g.in_service && g.bus != c.reference_bus)
      gen += g.active_power * generation_scale;
  gen += s(c.reference_bus).real() + demand(c.reference_bus).real();

  double total_demand = demand.real().sum();
  return std::abs(gen - total_demand - losses);
}

}  // namespace pmuplace
