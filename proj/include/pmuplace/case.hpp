#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace pmuplace {

enum class BusKind { PQ, PV, Slack };

struct Bus {
  int id = 0;  // original bus number from the case file
  BusKind kind = BusKind::PQ;
  double demand_p = 0.0;  // p.u.
  double demand_q = 0.0;  // p.u.
  double shunt_g = 0.0;   // p.u. conductance at V = 1
  double shunt_b = 0.0;   // p.u. susceptance at V = 1
  double voltage_setpoint = 1.0;  // p.u.; regulated value for PV/slack
};

struct Branch {
  int from_bus = 0;  // internal 0-based index
  int to_bus = 0;
  double resistance = 0.0;
  double reactance = 0.0;
  double charging_susceptance = 0.0;
  double tap_ratio = 1.0;    // 1.0 when the file gives 0
  double phase_shift = 0.0;  // rad
  bool in_service = true;
};

struct Generator {
  int bus = 0;  // internal 0-based index
  double active_power = 0.0;  // p.u. scheduled output
  double voltage_setpoint = 1.0;
  bool in_service = true;
};

// A validated grid description. Bus indices are 0-based and contiguous;
// the original file numbering is kept in Bus::id.
struct PowerSystemCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  int reference_bus = 0;  // internal index of the slack bus

  int bus_count() const { return static_cast<int>(buses.size()); }
  int bus_index(int original_id) const;  // -1 when unknown
  // Buses with nonzero demand, in internal-index order.
  std::vector<int> load_buses() const;
};

enum class InfeasibilityReason { None, Disconnects, Diverges };

// One candidate outage: a merged set of parallel branches between the same
// bus pair. class_index is assigned over feasible classes only (1..K) once
// the catalog has been screened; 0 before that and for infeasible classes.
struct OutageClass {
  int class_index = 0;
  std::vector<int> branch_ids;   // positions in PowerSystemCase::branches
  std::array<int, 2> endpoints;  // internal bus indices, from < to
  bool screened = false;
  bool feasible = false;
  InfeasibilityReason reason = InfeasibilityReason::None;
};

struct OutageCatalog {
  std::vector<OutageClass> classes;

  int merged_count() const { return static_cast<int>(classes.size()); }
  int feasible_count() const;
  int infeasible_count() const { return merged_count() - feasible_count(); }
  // The class with index k in 1..K_feasible.
  const OutageClass& by_class_index(int k) const;
};

PowerSystemCase parse_case(const std::string& text);
PowerSystemCase load_case(const std::string& path);

// Canonical JSON form with stable key order; parse(serialize(c)) == c.
std::string serialize_case(const PowerSystemCase& c);
PowerSystemCase case_from_json(const std::string& json_text);

// Merge parallel in-service branches into outage classes. Feasibility is
// left unset; screen with classify_feasibility (powerflow.hpp).
OutageCatalog build_outage_catalog(const PowerSystemCase& c);

std::string serialize_catalog(const PowerSystemCase& c, const OutageCatalog& cat);

}  // namespace pmuplace
