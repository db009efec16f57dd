#include "pmuplace/case.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pmuplace/errors.hpp"

namespace pmuplace {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Minimal tokenizer for the MATPOWER case grammar subset: a `function`
// header, `%` comments, and `mpc.<field> = <scalar|'string'|[matrix]>;`
// assignments.
class CaseScanner {
public:
  explicit CaseScanner(const std::string& text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw ParseError(std::string("expected '") + c + "'", line_, col_);
    advance();
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      advance();
    if (pos_ == start) throw ParseError("expected identifier", line_, col_);
    return text_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    size_t start = pos_;
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("expected number", line_, col_);
    for (size_t i = 0; i < static_cast<size_t>(end - begin); ++i) advance();
    (void)start;
    return v;
  }

  void skip_quoted() {
    expect('\'');
    while (pos_ < text_.size() && text_[pos_] != '\'') advance();
    if (pos_ >= text_.size()) throw ParseError("unterminated string", line_, col_);
    advance();
  }

  // Reads `[ ... ]` into rows. A row ends at ';' or at a newline that
  // follows at least one entry.
  std::vector<std::vector<double>> matrix() {
    expect('[');
    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    auto flush = [&] {
      if (!row.empty()) {
        rows.push_back(row);
        row.clear();
      }
    };
    while (true) {
      // inline whitespace handling so newlines can terminate rows
      while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == '%') {
          while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        } else if (c == '\n') {
          flush();
          ++line_;
          col_ = 1;
          ++pos_;
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
          advance();
        } else {
          break;
        }
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated matrix", line_, col_);
      char c = text_[pos_];
      if (c == ']') {
        advance();
        flush();
        return rows;
      }
      if (c == ';') {
        advance();
        flush();
        continue;
      }
      row.push_back(number());
    }
  }

  int line() const { return line_; }
  int col() const { return col_; }

  void skip_to_eol() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

private:
  void advance() {
    ++col_;
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

BusKind kind_from_code(double code, int line) {
  int k = static_cast<int>(code);
  switch (k) {
    case 1: return BusKind::PQ;
    case 2: return BusKind::PV;
    case 3: return BusKind::Slack;
    default:
      throw DataError("unsupported bus type " + std::to_string(k) +
                      " (isolated buses are not handled), bus table row " +
                      std::to_string(line));
  }
}

}  // namespace

int PowerSystemCase::bus_index(int original_id) const {
  for (int i = 0; i < bus_count(); ++i)
    if (buses[i].id == original_id) return i;
  return -1;
}

std::vector<int> PowerSystemCase::load_buses() const {
  std::vector<int> out;
  for (int i = 0; i < bus_count(); ++i)
    if (buses[i].demand_p != 0.0 || buses[i].demand_q != 0.0) out.push_back(i);
  return out;
}

int OutageCatalog::feasible_count() const {
  int n = 0;
  for (const auto& c : classes)
    if (c.screened && c.feasible) ++n;
  return n;
}

const OutageClass& OutageCatalog::by_class_index(int k) const {
  for (const auto& c : classes)
    if (c.class_index == k && c.feasible) return c;
  throw DataError("no feasible outage class with index " + std::to_string(k));
}

PowerSystemCase parse_case(const std::string& text) {
  CaseScanner sc(text);
  std::string name = "case";
  double base_mva = 0.0;
  bool has_base = false;
  std::vector<std::vector<double>> bus_tbl, gen_tbl, branch_tbl;

  bool at_start = true;
  while (!sc.eof()) {
    std::string ident = sc.identifier();
    if (at_start && ident == "function") {
      sc.identifier();  // result variable
      sc.expect('=');
      name = sc.identifier();
      at_start = false;
      continue;
    }
    at_start = false;
    if (ident != "mpc")
      throw ParseError("expected 'mpc.<field>' assignment", sc.line(), sc.col());
    sc.expect('.');
    std::string field = sc.identifier();
    sc.expect('=');
    if (field == "version") {
      sc.skip_quoted();
    } else if (field == "baseMVA") {
      base_mva = sc.number();
      has_base = true;
    } else if (field == "bus") {
      bus_tbl = sc.matrix();
    } else if (field == "gen") {
      gen_tbl = sc.matrix();
    } else if (field == "branch") {
      branch_tbl = sc.matrix();
    } else if (field == "gencost") {
      sc.matrix();  // tolerated, not used
    } else {
      throw DataError("unknown case field mpc." + field);
    }
    sc.accept(';');
  }

  if (!has_base) throw DataError("case file has no baseMVA");
  if (base_mva <= 0) throw DataError("baseMVA must be positive");
  if (bus_tbl.empty()) throw DataError("case file has no bus table");
  if (gen_tbl.empty()) throw DataError("case file has no gen table");
  if (branch_tbl.empty()) throw DataError("case file has no branch table");

  PowerSystemCase c;
  c.name = name;
  c.base_mva = base_mva;

  std::unordered_map<int, int> id_to_index;
  int slack_count = 0;
  for (size_t r = 0; r < bus_tbl.size(); ++r) {
    const auto& row = bus_tbl[r];
    if (row.size() < 13)
      throw DataError("bus table row " + std::to_string(r + 1) +
                      " has fewer than 13 columns");
    Bus b;
    b.id = static_cast<int>(row[0]);
    b.kind = kind_from_code(row[1], static_cast<int>(r + 1));
    b.demand_p = row[2] / base_mva;
    b.demand_q = row[3] / base_mva;
    b.shunt_g = row[4] / base_mva;
    b.shunt_b = row[5] / base_mva;
    b.voltage_setpoint = row[7] > 0 ? row[7] : 1.0;
    if (!std::isfinite(b.demand_p) || !std::isfinite(b.demand_q))
      throw DataError("non-finite demand at bus " + std::to_string(b.id));
    if (b.kind == BusKind::Slack) ++slack_count;
    if (id_to_index.count(b.id))
      throw DataError("duplicate bus id " + std::to_string(b.id));
    id_to_index[b.id] = static_cast<int>(c.buses.size());
    c.buses.push_back(b);
  }
  if (slack_count == 0) throw DataError("case has no slack bus");
  if (slack_count > 1) throw DataError("case has multiple slack buses");
  for (int i = 0; i < c.bus_count(); ++i)
    if (c.buses[i].kind == BusKind::Slack) c.reference_bus = i;

  for (size_t r = 0; r < gen_tbl.size(); ++r) {
    const auto& row = gen_tbl[r];
    if (row.size() < 10)
      throw DataError("gen table row " + std::to_string(r + 1) +
                      " has fewer than 10 columns");
    Generator g;
    int id = static_cast<int>(row[0]);
    auto it = id_to_index.find(id);
    if (it == id_to_index.end())
      throw DataError("generator references unknown bus " + std::to_string(id));
    g.bus = it->second;
    g.active_power = row[1] / base_mva;
    g.voltage_setpoint = row[5];
    g.in_service = row[7] > 0;
    c.generators.push_back(g);
    // The regulated voltage comes from the generator table.
    if (g.in_service && g.voltage_setpoint > 0 &&
        c.buses[g.bus].kind != BusKind::PQ)
      c.buses[g.bus].voltage_setpoint = g.voltage_setpoint;
  }

  // PV buses without an in-service generator behave as PQ.
  {
    std::vector<bool> has_gen(c.bus_count(), false);
    for (const auto& g : c.generators)
      if (g.in_service) has_gen[g.bus] = true;
    for (int i = 0; i < c.bus_count(); ++i)
      if (c.buses[i].kind == BusKind::PV && !has_gen[i])
        c.buses[i].kind = BusKind::PQ;
    if (!has_gen[c.reference_bus])
      throw DataError("slack bus has no in-service generator");
  }

  for (size_t r = 0; r < branch_tbl.size(); ++r) {
    const auto& row = branch_tbl[r];
    if (row.size() < 11)
      throw DataError("branch table row " + std::to_string(r + 1) +
                      " has fewer than 11 columns");
    Branch br;
    int fid = static_cast<int>(row[0]);
    int tid = static_cast<int>(row[1]);
    auto fit = id_to_index.find(fid);
    auto tit = id_to_index.find(tid);
    if (fit == id_to_index.end() || tit == id_to_index.end())
      throw DataError("branch " + std::to_string(fid) + "-" +
                      std::to_string(tid) + " references an unknown bus");
    br.from_bus = fit->second;
    br.to_bus = tit->second;
    if (br.from_bus == br.to_bus)
      throw DataError("branch " + std::to_string(fid) + "-" +
                      std::to_string(tid) + " is a self-loop");
    br.resistance = row[2];
    br.reactance = row[3];
    br.charging_susceptance = row[4];
    if (br.resistance == 0.0 && br.reactance == 0.0)
      throw DataError("branch " + std::to_string(fid) + "-" +
                      std::to_string(tid) + " has zero impedance");
    br.tap_ratio = row[8] != 0.0 ? row[8] : 1.0;
    br.phase_shift = row[9] * kPi / 180.0;
    br.in_service = row[10] > 0;
    c.branches.push_back(br);
  }

  return c;
}

PowerSystemCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    PowerSystemCase c = parse_case(ss.str());
    return c;
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string serialize_case(const PowerSystemCase& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["base_mva"] = c.base_mva;
  j["reference_bus"] = c.reference_bus;
  auto& buses = j["buses"] = nlohmann::ordered_json::array();
  for (const auto& b : c.buses) {
    nlohmann::ordered_json jb;
    jb["id"] = b.id;
    jb["kind"] = b.kind == BusKind::Slack ? "slack"
                 : b.kind == BusKind::PV ? "pv"
                                         : "pq";
    jb["demand_p"] = b.demand_p;
    jb["demand_q"] = b.demand_q;
    jb["shunt_g"] = b.shunt_g;
    jb["shunt_b"] = b.shunt_b;
    jb["voltage_setpoint"] = b.voltage_setpoint;
    buses.push_back(jb);
  }
  auto& branches = j["branches"] = nlohmann::ordered_json::array();
  for (const auto& br : c.branches) {
    nlohmann::ordered_json jb;
    jb["from_bus"] = br.from_bus;
    jb["to_bus"] = br.to_bus;
    jb["resistance"] = br.resistance;
    jb["reactance"] = br.reactance;
    jb["charging_susceptance"] = br.charging_susceptance;
    jb["tap_ratio"] = br.tap_ratio;
    jb["phase_shift"] = br.phase_shift;
    jb["in_service"] = br.in_service;
    branches.push_back(jb);
  }
  auto& gens = j["generators"] = nlohmann::ordered_json::array();
  for (const auto& g : c.generators) {
    nlohmann::ordered_json jg;
    jg["bus"] = g.bus;
    jg["active_power"] = g.active_power;
    jg["voltage_setpoint"] = g.voltage_setpoint;
    jg["in_service"] = g.in_service;
    gens.push_back(jg);
  }
  return j.dump(2);
}

PowerSystemCase case_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  PowerSystemCase c;
  c.name = j.at("name").get<std::string>();
  c.base_mva = j.at("base_mva").get<double>();
  c.reference_bus = j.at("reference_bus").get<int>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    std::string k = jb.at("kind").get<std::string>();
    b.kind = k == "slack" ? BusKind::Slack : k == "pv" ? BusKind::PV : BusKind::PQ;
    b.demand_p = jb.at("demand_p").get<double>();
    b.demand_q = jb.at("demand_q").get<double>();
    b.shunt_g = jb.at("shunt_g").get<double>();
    b.shunt_b = jb.at("shunt_b").get<double>();
    b.voltage_setpoint = jb.at("voltage_setpoint").get<double>();
    c.buses.push_back(b);
  }
  for (const auto& jb : j.at("branches")) {
    Branch br;
    br.from_bus = jb.at("from_bus").get<int>();
    br.to_bus = jb.at("to_bus").get<int>();
    br.resistance = jb.at("resistance").get<double>();
    br.reactance = jb.at("reactance").get<double>();
    br.charging_susceptance = jb.at("charging_susceptance").get<double>();
    br.tap_ratio = jb.at("tap_ratio").get<double>();
    br.phase_shift = jb.at("phase_shift").get<double>();
    br.in_service = jb.at("in_service").get<bool>();
    c.branches.push_back(br);
  }
  for (const auto& jg : j.at("generators")) {
    Generator g;
    g.bus = jg.at("bus").get<int>();
    g.active_power = jg.at("active_power").get<double>();
    g.voltage_setpoint = jg.at("voltage_setpoint").get<double>();
    g.in_service = jg.at("in_service").get<bool>();
    c.generators.push_back(g);
  }
  return c;
}

OutageCatalog build_outage_catalog(const PowerSystemCase& c) {
  OutageCatalog cat;
  std::map<std::pair<int, int>, int> seen;  // bus pair -> class position
  for (int i = 0; i < static_cast<int>(c.branches.size()); ++i) {
    const auto& br = c.branches[i];
    if (!br.in_service) continue;
    auto key = std::minmax(br.from_bus, br.to_bus);
    auto it = seen.find(key);
    if (it == seen.end()) {
      OutageClass oc;
      oc.branch_ids = {i};
      oc.endpoints = {key.first, key.second};
      seen[key] = static_cast<int>(cat.classes.size());
      cat.classes.push_back(oc);
    } else {
      cat.classes[it->second].branch_ids.push_back(i);
    }
  }
  return cat;
}

std::string serialize_catalog(const PowerSystemCase& c, const OutageCatalog& cat) {
  nlohmann::ordered_json j;
  j["case"] = c.name;
  j["merged_classes"] = cat.merged_count();
  j["feasible_classes"] = cat.feasible_count();
  auto& arr = j["classes"] = nlohmann::ordered_json::array();
  for (const auto& oc : cat.classes) {
    nlohmann::ordered_json jc;
    jc["class_index"] = oc.class_index;
    auto& br = jc["branches"] = nlohmann::ordered_json::array();
    for (int b : oc.branch_ids) br.push_back(b);
    jc["endpoints"] = {c.buses[oc.endpoints[0]].id, c.buses[oc.endpoints[1]].id};
    jc["feasible"] = oc.screened ? nlohmann::ordered_json(oc.feasible)
                                 : nlohmann::ordered_json(nullptr);
    jc["reason"] = oc.reason == InfeasibilityReason::Disconnects ? "disconnects"
                   : oc.reason == InfeasibilityReason::Diverges  ? "diverges"
                                                                 : "none";
    arr.push_back(jc);
  }
  return j.dump(2);
}

}  // namespace pmuplace
