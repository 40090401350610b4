#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "pulseforge/circuit.hpp"
#include "pulseforge/common.hpp"
#include "pulseforge/layout.hpp"

namespace pulseforge {

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  return theta - 2.0 * pi * std::ceil((theta - pi) / (2.0 * pi));
}

struct ReducedAngle {
  double theta = 0.0;  // |theta| <= pi/2
  int delta = 0;       // 1 when a Z/X correction is owed
};

// Map theta into [-pi/2, pi/2]; delta records whether the pi-shift branch
// fired, i.e. whether correction gates are owed.
inline ReducedAngle reduce_angle(double theta) {
  const double w = wrap_angle(theta);
  if (std::abs(w) > pi / 2.0) return {w - sign_of(w) * pi, 1};
  return {w, 0};
}

// RZX(theta) -> RZX(reduced) followed by Z_control X_target when needed.
// The leftover global phase i is discarded.
inline Circuit reduce_rzx(const Gate& g) {
  if (g.kind != GateKind::RZX) throw SchemaError("reduce_rzx expects an rzx gate");
  const int a = g.qubits[0], b = g.qubits[1];
  Circuit out(std::max(a, b) + 1);
  const ReducedAngle r = reduce_angle(g.params[0]);
  out.add(Gate::rzx(r.theta, a, b));
  if (r.delta) {
    out.add(Gate::z(a));
    out.add(Gate::x(b));
  }
  return out;
}

// PRZX angle reduction: one Z per reduced control, one X on the target when
// the number of reductions is odd.
inline Circuit reduce_przx(const Gate& g) {
  if (g.kind != GateKind::PRZX) throw SchemaError("reduce_przx expects a przx gate");
  const auto controls = g.przx_controls();
  const int target = g.przx_target();
  Circuit out(*std::max_element(g.qubits.begin(), g.qubits.end()) + 1);
  std::vector<double> reduced;
  std::vector<int> corrected;
  int total = 0;
  for (std::size_t i = 0; i < g.params.size(); ++i) {
    const ReducedAngle r = reduce_angle(g.params[i]);
    reduced.push_back(r.theta);
    if (r.delta) {
      corrected.push_back(controls[i]);
      ++total;
    }
  }
  out.add(Gate::przx(reduced, controls, target));
  for (int c : corrected) out.add(Gate::z(c));
  if (total % 2 == 1) out.add(Gate::x(target));
  return out;
}

// Echoed RZX: two half-angle pulses with the control flipped in between,
// canceling drive terms that act trivially on the control.
inline Circuit echo_rzx(double theta, int control, int target) {
  Circuit out(std::max(control, target) + 1);
  out.add(Gate::rzx(theta / 2.0, control, target));
  out.add(Gate::x(control));
  out.add(Gate::rzx(-theta / 2.0, control, target));
  out.add(Gate::x(control));
  return out;
}

inline Circuit echo_przx(const Gate& g) {
  if (g.kind != GateKind::PRZX) throw SchemaError("echo_przx expects a przx gate");
  const auto controls = g.przx_controls();
  const int target = g.przx_target();
  Circuit out(*std::max_element(g.qubits.begin(), g.qubits.end()) + 1);
  std::vector<double> half = g.params, neg_half = g.params;
  for (double& th : half) th /= 2.0;
  for (double& th : neg_half) th /= -2.0;
  out.add(Gate::przx(half, controls, target));
  for (int c : controls) out.add(Gate::x(c));
  out.add(Gate::przx(neg_half, controls, target));
  for (int c : controls) out.add(Gate::x(c));
  return out;
}

enum class CnotVariant { IBM, Simple };

// CNOT over RZX(pi/2) plus single-qubit corrections, phase-equivalent. The
// IBM variant is the device form with the echoed CR written out: the two
// half-angle pulses with the control flip in between, closed by the final X
// on the control. (A bare RZX(pi/2) followed by one X on the control cannot
// equal CNOT: CNOT is diagonal in the control while a lone X is not.)
inline Circuit decompose_cnot(int control, int target, CnotVariant variant) {
  if (control == target) throw DomainError("cnot control equals target");
  Circuit out(std::max(control, target) + 1);
  if (variant == CnotVariant::IBM) {
    out.add(Gate::z(target));
    out.add(Gate::sqrtx(target));
    out.add(Gate::z(target));
    out.add(Gate::sdg(control));
    out.add(Gate::rzx(pi / 4.0, control, target));
    out.add(Gate::x(control));
    out.add(Gate::rzx(-pi / 4.0, control, target));
    out.add(Gate::x(control));
  } else {
    out.add(Gate::sdg(control));
    out.add(Gate::x32(target));
    out.add(Gate::rzx(pi / 2.0, control, target));
  }
  return out;
}

// X^(3n/2 mod 2) on the shared target, reduced over half-integer exponents:
// n mod 4 = 1 -> X^{3/2}, 2 -> X, 3 -> X^{1/2}, 0 -> identity.
inline std::optional<Gate> parallel_group_correction(std::size_t n, int target) {
  switch (n % 4) {
    case 1: return Gate::x32(target);
    case 2: return Gate::x(target);
    case 3: return Gate::sqrtx(target);
    default: return std::nullopt;
  }
}

// Product of CNOTs with a shared target as one PRZX(pi/2) plus single-qubit
// corrections; phase-equivalent to the serial CNOT product.
inline Circuit parallel_cnot_group(const std::vector<int>& controls, int target) {
  std::set<int> seen(controls.begin(), controls.end());
  if (seen.size() != controls.size() || seen.count(target) || controls.empty())
    throw DomainError("parallel cnot group needs distinct controls excluding the target");
  int hi = target;
  for (int c : controls) hi = std::max(hi, c);
  Circuit out(hi + 1);
  for (int c : controls) out.add(Gate::sdg(c));
  if (auto q = parallel_group_correction(controls.size(), target)) out.add(*q);
  if (controls.size() == 1)
    out.add(Gate::rzx(pi / 2.0, controls[0], target));
  else
    out.add(Gate::przx(std::vector<double>(controls.size(), pi / 2.0), controls, target));
  return out;
}

// Product of CZs with a shared qubit; Hadamards on the shared qubit reduce it
// to the parallel CNOT form.
inline Circuit parallel_cz_group(const std::vector<int>& others, int shared) {
  std::set<int> seen(others.begin(), others.end());
  if (seen.size() != others.size() || seen.count(shared) || others.empty())
    throw DomainError("parallel cz group needs distinct qubits excluding the shared one");
  int hi = shared;
  for (int c : others) hi = std::max(hi, c);
  Circuit out(hi + 1);
  for (int c : others) out.add(Gate::sdg(c));
  out.add(Gate::h(shared));
  if (auto q = parallel_group_correction(others.size(), shared)) out.add(*q);
  out.add(Gate::przx(std::vector<double>(others.size(), pi / 2.0), others, shared));
  out.add(Gate::h(shared));
  return out;
}

// Single-qubit V with V O V^dag = target, from sqrt(X) Y sqrt(X)^dag = Z and
// its cyclic permutations. Targets are restricted to the gate-native X and Z.
inline Circuit basis_change(Pauli from, Pauli to, int qubit) {
  Circuit out(qubit + 1);
  if (to != Pauli::X && to != Pauli::Z)
    throw DomainError("basis change targets X or Z only");
  if (from == to) return out;
  if (to == Pauli::Z) {
    if (from == Pauli::X) out.add(Gate::h(qubit));
    else out.add(Gate::sqrtx(qubit));  // Y -> Z
  } else {
    if (from == Pauli::Z) out.add(Gate::h(qubit));
    else out.add(Gate::sdg(qubit));  // Y -> X
  }
  return out;
}

// CNOT collection/uncollection circuit for a scheduled parity tree, with an
// RZ(rz_angle) on the root in the middle. Merged-mode slots are emitted as
// parallel CNOT groups (one per shared target).
inline Circuit tree_to_circuit(const ParityTree& tree, double rz_angle,
                               ScheduleMode mode = ScheduleMode::Serial) {
  int hi = tree.root;
  for (const auto& [v, p] : tree.parent) hi = std::max({hi, v, p});
  Circuit out(hi + 1);
  const int depth = tree.depth();

  // slot -> target -> controls, deterministic order
  std::map<int, std::map<int, std::vector<int>>> slots;
  for (const auto& [v, p] : tree.parent) slots[tree.slot.at(v)][p].push_back(v);

  auto emit_slot = [&](int s) {
    auto it = slots.find(s);
    if (it == slots.end()) return;
    for (auto& [target, controls] : it->second) {
      std::sort(controls.begin(), controls.end());
      if (mode == ScheduleMode::ParallelMerged) {
        out.add(parallel_cnot_group(controls, target));
      } else {
        for (int c : controls) out.add(Gate::cnot(c, target));
      }
    }
  };

  for (int s = 1; s <= depth; ++s) emit_slot(s);
  out.add(Gate::rz(rz_angle, tree.root));
  for (int s = depth; s >= 1; --s) emit_slot(s);
  return out;
}

enum class PauliTermStyle { SerialChain, ParallelMerged };

// Time evolution exp(-i h t O_1...O_k) of one Pauli term: basis changes to
// Z...Z, a parity tree collected into `root`, RZ(2 h t) there, then the
// mirror. Under RZ(a) = exp(-i a Z / 2) the collected rotation angle is 2ht.
inline Circuit pauli_term_circuit(const PauliTerm& term, double angle, PauliTermStyle style,
                                  const CouplingGraph& graph, int root) {
  term.validate();
  const auto support = term.support();
  const ScheduleMode mode =
      style == PauliTermStyle::SerialChain ? ScheduleMode::Serial : ScheduleMode::ParallelMerged;
  const ParityTree tree = spanning_parity_tree(graph, support, root, mode);

  int hi = 0;
  for (int q : support) hi = std::max(hi, q);
  Circuit out(hi + 1);
  for (const auto& [q, p] : term.paulis) out.add(basis_change(p, Pauli::Z, q));
  out.add(tree_to_circuit(tree, 2.0 * term.coefficient * angle, mode));
  for (const auto& [q, p] : term.paulis) out.add(basis_change(p, Pauli::Z, q).inverse());
  return out;
}

// First-order Trotter circuit for the three-qubit Heisenberg chain
// XX+XX + YY+YY + ZZ+ZZ: per step, each pair of same-basis terms becomes a
// basis change plus one PRZX(2t/n) on the middle qubit.
inline Circuit trotter_heisenberg(int n_steps, double t) {
  if (n_steps < 1) throw DomainError("trotter step count must be at least 1");
  Circuit out(3);
  const double theta = 2.0 * t / double(n_steps);
  const std::vector<Pauli> bases{Pauli::Z, Pauli::Y, Pauli::X};
  for (int step = 0; step < n_steps; ++step) {
    for (Pauli basis : bases) {
      Circuit pre(3);
      pre.add(basis_change(basis, Pauli::Z, 0));
      pre.add(basis_change(basis, Pauli::X, 1));
      pre.add(basis_change(basis, Pauli::Z, 2));
      out.add(pre);
      out.add(Gate::przx({theta, theta}, {0, 2}, 1));
      out.add(pre.inverse());
    }
  }
  return out;
}

struct PhaseOracle {
  Circuit circuit;
  // Runs of consecutive CZs that share a common qubit; indices into
  // circuit.gates. Groups of size >= 2 can be lowered as one merged PRZX.
  std::vector<std::vector<std::size_t>> parallel_groups;
};

// Oracle U = I - 2 sum_{f(x)=1} |x><x| for f = sum of two-variable products
// (mod 2): one CZ per product term.
inline PhaseOracle phase_oracle(int num_vars, const std::vector<std::pair<int, int>>& pair_terms) {
  if (num_vars < 1) throw DomainError("phase oracle needs at least one variable");
  PhaseOracle out;
  out.circuit = Circuit(num_vars);
  for (auto [i, j] : pair_terms) out.circuit.add(Gate::cz(i, j));

  std::vector<std::size_t> group;
  std::set<int> shared;
  auto close = [&]() {
    if (!group.empty()) out.parallel_groups.push_back(group);
    group.clear();
    shared.clear();
  };
  for (std::size_t g = 0; g < out.circuit.gates.size(); ++g) {
    const auto& qs = out.circuit.gates[g].qubits;
    std::set<int> cur(qs.begin(), qs.end());
    if (group.empty()) {
      group = {g};
      shared = cur;
      continue;
    }
    std::set<int> inter;
    std::set_intersection(shared.begin(), shared.end(), cur.begin(), cur.end(),
                          std::inserter(inter, inter.begin()));
    if (inter.empty()) {
      close();
      group = {g};
      shared = cur;
    } else {
      group.push_back(g);
      shared = inter;
    }
  }
  close();
  return out;
}

// Angle-reduce every RZX/PRZX in a circuit, leaving other gates alone.
inline Circuit reduce_circuit_angles(const Circuit& c) {
  Circuit out(c.num_qubits);
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::RZX) out.add(reduce_rzx(g));
    else if (g.kind == GateKind::PRZX) out.add(reduce_przx(g));
    else out.add(g);
  }
  return out;
}

// Split every PRZX into its commuting RZX factors (serial concatenation).
inline Circuit split_przx(const Circuit& c) {
  Circuit out(c.num_qubits);
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::PRZX) {
      const auto controls = g.przx_controls();
      for (std::size_t i = 0; i < controls.size(); ++i)
        out.add(Gate::rzx(g.params[i], controls[i], g.przx_target()));
    } else {
      out.add(g);
    }
  }
  return out;
}

// Replace every RZX/PRZX with its echoed form.
inline Circuit expand_echo(const Circuit& c) {
  Circuit out(c.num_qubits);
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::RZX) out.add(echo_rzx(g.params[0], g.qubits[0], g.qubits[1]));
    else if (g.kind == GateKind::PRZX) out.add(echo_przx(g));
    else out.add(g);
  }
  return out;
}

// Fuse adjacent gates that the pulse layer can merge: runs of RZX sharing a
// target become one PRZX, runs of CNOTs sharing a target become a parallel
// CNOT group, and runs of CZs sharing a qubit become a parallel CZ group.
inline Circuit group_parallel_gates(const Circuit& c) {
  Circuit out(c.num_qubits);
  std::size_t i = 0;
  while (i < c.gates.size()) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::RZX || g.kind == GateKind::CNOT) {
      const int target = g.qubits[1];
      std::set<int> controls{g.qubits[0]};
      std::size_t j = i + 1;
      while (j < c.gates.size() && c.gates[j].kind == g.kind && c.gates[j].qubits[1] == target &&
             !controls.count(c.gates[j].qubits[0]) && c.gates[j].qubits[0] != target)
        controls.insert(c.gates[j++].qubits[0]);
      if (j - i >= 2) {
        std::vector<int> ctrl_list;
        std::vector<double> thetas;
        for (std::size_t k = i; k < j; ++k) {
          ctrl_list.push_back(c.gates[k].qubits[0]);
          if (g.kind == GateKind::RZX) thetas.push_back(c.gates[k].params[0]);
        }
        if (g.kind == GateKind::RZX) out.add(Gate::przx(thetas, ctrl_list, target));
        else out.add(parallel_cnot_group(ctrl_list, target));
        i = j;
        continue;
      }
    }
    if (g.kind == GateKind::CZ) {
      // a run of CZs sharing one common qubit
      std::size_t j = i + 1;
      std::set<int> shared(g.qubits.begin(), g.qubits.end());
      while (j < c.gates.size() && c.gates[j].kind == GateKind::CZ) {
        std::set<int> cur(c.gates[j].qubits.begin(), c.gates[j].qubits.end());
        std::set<int> inter;
        std::set_intersection(shared.begin(), shared.end(), cur.begin(), cur.end(),
                              std::inserter(inter, inter.begin()));
        if (inter.empty()) break;
        shared = inter;
        ++j;
      }
      if (j - i >= 2 && !shared.empty()) {
        const int pivot = *shared.begin();
        std::vector<int> others;
        bool distinct = true;
        std::set<int> seen;
        for (std::size_t k = i; k < j; ++k) {
          const int other =
              c.gates[k].qubits[0] == pivot ? c.gates[k].qubits[1] : c.gates[k].qubits[0];
          if (!seen.insert(other).second) distinct = false;
          others.push_back(other);
        }
        if (distinct) {
          out.add(parallel_cz_group(others, pivot));
          i = j;
          continue;
        }
      }
    }
    out.add(g);
    ++i;
  }
  return out;
}

// The standard pass order ahead of pulse lowering. The serial variant plays
// parallelizable gates one after another (each echoed on its own); the
// parallel variant fuses them first so the echo wraps the merged gate.
inline Circuit prepare_for_lowering(Circuit circuit, bool parallel, bool echo,
                                    bool angle_reduce) {
  circuit = parallel ? group_parallel_gates(circuit) : split_przx(circuit);
  if (angle_reduce) circuit = reduce_circuit_angles(circuit);
  if (echo) circuit = expand_echo(circuit);
  return circuit;
}

// Shared-control PRZX exp(-i sum theta_i/2 Z_c X_{t_i}), realized through the
// common-target gate conjugated by Hadamards on every involved qubit.
inline Circuit common_control_przx(int control, const std::vector<int>& targets,
                                   const std::vector<double>& thetas) {
  if (targets.size() != thetas.size())
    throw SchemaError("common-control przx needs one angle per target");
  std::set<int> seen(targets.begin(), targets.end());
  if (seen.size() != targets.size() || seen.count(control))
    throw DomainError("targets must be distinct and exclude the control");
  int hi = control;
  for (int t : targets) hi = std::max(hi, t);
  Circuit out(hi + 1);
  out.add(Gate::h(control));
  for (int t : targets) out.add(Gate::h(t));
  out.add(Gate::przx(thetas, targets, control));
  out.add(Gate::h(control));
  for (int t : targets) out.add(Gate::h(t));
  return out;
}

}  // namespace pulseforge
