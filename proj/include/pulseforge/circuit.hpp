#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseforge/common.hpp"

namespace pulseforge {

enum class GateKind { RZX, PRZX, CNOT, CZ, X, Z, H, S, Sdg, SqrtX, X32, RZ };

inline const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::RZX: return "rzx";
    case GateKind::PRZX: return "przx";
    case GateKind::CNOT: return "cnot";
    case GateKind::CZ: return "cz";
    case GateKind::X: return "x";
    case GateKind::Z: return "z";
    case GateKind::H: return "h";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::SqrtX: return "sx";
    case GateKind::X32: return "x32";
    case GateKind::RZ: return "rz";
  }
  return "?";
}

// One gate of the abstract layer. Layout per kind:
//   RZX:  qubits = [control, target], params = [theta]
//   PRZX: qubits = [c_1..c_n, target], params = [theta_1..theta_n]
//   CNOT: qubits = [control, target]
//   CZ:   qubits = [a, b]
//   RZ:   qubits = [q], params = [angle]   (RZ(a) = exp(-i a Z / 2))
//   rest: qubits = [q]
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> qubits;
  std::vector<double> params;

  static Gate rzx(double theta, int control, int target) {
    if (control == target) throw SchemaError("rzx control and target must differ");
    return Gate{GateKind::RZX, {control, target}, {theta}};
  }
  static Gate przx(std::vector<double> thetas, std::vector<int> controls, int target) {
    if (thetas.size() != controls.size())
      throw SchemaError("przx needs one angle per control");
    if (controls.empty()) throw SchemaError("przx needs at least one control");
    std::set<int> seen(controls.begin(), controls.end());
    if (seen.size() != controls.size() || seen.count(target))
      throw SchemaError("przx controls must be distinct and exclude the target");
    for (double th : thetas)
      if (!std::isfinite(th)) throw SchemaError("przx angle must be finite");
    Gate g{GateKind::PRZX, std::move(controls), std::move(thetas)};
    g.qubits.push_back(target);
    return g;
  }
  static Gate cnot(int control, int target) {
    if (control == target) throw SchemaError("cnot control and target must differ");
    return Gate{GateKind::CNOT, {control, target}, {}};
  }
  static Gate cz(int a, int b) {
    if (a == b) throw SchemaError("cz qubits must differ");
    return Gate{GateKind::CZ, {a, b}, {}};
  }
  static Gate x(int q) { return Gate{GateKind::X, {q}, {}}; }
  static Gate z(int q) { return Gate{GateKind::Z, {q}, {}}; }
  static Gate h(int q) { return Gate{GateKind::H, {q}, {}}; }
  static Gate s(int q) { return Gate{GateKind::S, {q}, {}}; }
  static Gate sdg(int q) { return Gate{GateKind::Sdg, {q}, {}}; }
  static Gate sqrtx(int q) { return Gate{GateKind::SqrtX, {q}, {}}; }
  static Gate x32(int q) { return Gate{GateKind::X32, {q}, {}}; }
  static Gate rz(double angle, int q) { return Gate{GateKind::RZ, {q}, {angle}}; }

  bool is_single_qubit() const { return qubits.size() == 1; }

  bool is_przx() const { return kind == GateKind::PRZX; }

  int przx_target() const { return qubits.back(); }
  std::vector<int> przx_controls() const {
    return std::vector<int>(qubits.begin(), qubits.end() - 1);
  }

  Gate inverse() const {
    switch (kind) {
      case GateKind::S: return sdg(qubits[0]);
      case GateKind::Sdg: return s(qubits[0]);
      case GateKind::SqrtX: return x32(qubits[0]);
      case GateKind::X32: return sqrtx(qubits[0]);
      case GateKind::RZ: return rz(-params[0], qubits[0]);
      case GateKind::RZX: return Gate{GateKind::RZX, qubits, {-params[0]}};
      case GateKind::PRZX: {
        Gate g = *this;
        for (double& th : g.params) th = -th;
        return g;
      }
      default: return *this;  // X, Z, H, CNOT, CZ are involutions
    }
  }
};

// Gates are listed in application order: the first gate acts on the state
// first. Note paper-style operator products read the other way around.
struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;

  Circuit() = default;
  explicit Circuit(int n) : num_qubits(n) {}

  Circuit& add(Gate g) {
    for (int q : g.qubits)
      if (q < 0 || q >= num_qubits) throw SchemaError("gate qubit index out of range");
    gates.push_back(std::move(g));
    return *this;
  }

  Circuit& add(const Circuit& other) {
    if (other.num_qubits > num_qubits)
      throw SchemaError("appended circuit is wider than the host circuit");
    for (const auto& g : other.gates) add(g);
    return *this;
  }

  Circuit inverse() const {
    Circuit out(num_qubits);
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) out.add(it->inverse());
    return out;
  }
};

enum class Pauli { X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

// One term h * O_{q1} ... O_{qk} of a Pauli decomposition.
struct PauliTerm {
  double coefficient = 1.0;
  std::map<int, Pauli> paulis;  // qubit -> operator; each qubit appears once

  void validate() const {
    if (paulis.empty()) throw SchemaError("pauli term must touch at least one qubit");
  }
  std::vector<int> support() const {
    std::vector<int> qs;
    for (const auto& [q, p] : paulis) qs.push_back(q);
    return qs;
  }
};

// --- JSON ({"num_qubits": n, "gates": [{"kind","qubits","params"}]}) ---

inline nlohmann::ordered_json circuit_to_json(const Circuit& c) {
  nlohmann::ordered_json j;
  j["num_qubits"] = c.num_qubits;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : c.gates) {
    nlohmann::ordered_json gj;
    gj["kind"] = gate_kind_name(g.kind);
    gj["qubits"] = g.qubits;
    gj["params"] = g.params;
    arr.push_back(std::move(gj));
  }
  j["gates"] = std::move(arr);
  return j;
}

inline Circuit circuit_from_json(const nlohmann::ordered_json& j) {
  Circuit c(j.at("num_qubits").get<int>());
  if (c.num_qubits <= 0) throw SchemaError("num_qubits must be positive");
  for (const auto& gj : j.at("gates")) {
    const std::string kind = gj.at("kind").get<std::string>();
    std::vector<int> qs = gj.at("qubits").get<std::vector<int>>();
    std::vector<double> ps;
    if (gj.contains("params")) ps = gj.at("params").get<std::vector<double>>();
    auto need = [&](std::size_t nq, std::size_t np) {
      if (qs.size() != nq || ps.size() != np)
        throw SchemaError("gate '" + kind + "' has wrong qubit or param count");
    };
    if (kind == "rzx") {
      need(2, 1);
      c.add(Gate::rzx(ps[0], qs[0], qs[1]));
    } else if (kind == "przx") {
      if (qs.size() < 2 || ps.size() != qs.size() - 1)
        throw SchemaError("przx needs n controls, one target, n angles");
      c.add(Gate::przx(ps, std::vector<int>(qs.begin(), qs.end() - 1), qs.back()));
    } else if (kind == "cnot") {
      need(2, 0);
      c.add(Gate::cnot(qs[0], qs[1]));
    } else if (kind == "cz") {
      need(2, 0);
      c.add(Gate::cz(qs[0], qs[1]));
    } else if (kind == "rz") {
      need(1, 1);
      c.add(Gate::rz(ps[0], qs[0]));
    } else {
      need(1, 0);
      if (kind == "x") c.add(Gate::x(qs[0]));
      else if (kind == "z") c.add(Gate::z(qs[0]));
      else if (kind == "h") c.add(Gate::h(qs[0]));
      else if (kind == "s") c.add(Gate::s(qs[0]));
      else if (kind == "sdg") c.add(Gate::sdg(qs[0]));
      else if (kind == "sx") c.add(Gate::sqrtx(qs[0]));
      else if (kind == "x32") c.add(Gate::x32(qs[0]));
      else throw SchemaError("unknown gate kind '" + kind + "'");
    }
  }
  return c;
}

}  // namespace pulseforge
