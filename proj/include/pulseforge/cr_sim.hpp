#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "pulseforge/common.hpp"
#include "pulseforge/device.hpp"
#include "pulseforge/lower.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/unitary.hpp"

namespace pulseforge {

// Coupling constants of the driven two-transmon Hamiltonian, rad/s at unit
// drive amplitude. The ZX entry is the wanted interaction; the rest are
// spurious.
struct CRHamiltonianParams {
  double zi = 0.0;
  double zx = 0.0;
  double zy = 0.0;
  double zz = 0.0;
  double ix = 0.0;
  double iy = 0.0;
  double iz = 0.0;

  void validate() const {
    for (double w : {zi, zx, zy, zz, ix, iy, iz})
      if (!std::isfinite(w)) throw SchemaError("coupling constants must be finite");
  }
};

// H = u (Z_a B_b + I_a C_b) / 2 on (control, target), with the drive phase
// rotating the X/Y components of both B and C. All couplings scale linearly
// with the instantaneous normalized envelope value u.
inline Matrix cr_hamiltonian(const CRHamiltonianParams& w, double envelope_value, double phase) {
  w.validate();
  const double c = std::cos(phase), s = std::sin(phase);
  const double bx = w.zx * c - w.zy * s;
  const double by = w.zx * s + w.zy * c;
  const double cx = w.ix * c - w.iy * s;
  const double cy = w.ix * s + w.iy * c;
  const Matrix b = w.zi * pauli_i() + bx * pauli_x() + by * pauli_y() + w.zz * pauli_z();
  const Matrix cc = cx * pauli_x() + cy * pauli_y() + w.iz * pauli_z();
  return envelope_value * 0.5 * (kron(pauli_z(), b) + kron(pauli_i(), cc));
}

// Resonant drive on one qubit: u * omega_d (cos(phi) X + sin(phi) Y) / 2.
inline Matrix drive_hamiltonian(double envelope_value, double phase, double drive_coupling) {
  return envelope_value * drive_coupling * 0.5 *
         (std::cos(phase) * pauli_x() + std::sin(phase) * pauli_y());
}

// Everything the schedule simulator needs to turn channels into Hamiltonians.
struct SimModel {
  std::map<std::pair<int, int>, CRHamiltonianParams> edge_params;
  double drive_coupling = 0.0;  // rad/s per unit amplitude on drive channels

  const CRHamiltonianParams& edge(int control, int target) const {
    auto it = edge_params.find({control, target});
    if (it == edge_params.end()) throw DomainError("channel without Hamiltonian parameters");
    return it->second;
  }
};

// Model matching a device calibration exactly: the ZX rate reproduces the
// area calibration (theta = k |area|), the drive coupling makes the
// configured pi pulse rotate by pi, and the IX/IY couplings are the ones the
// configured compensation tone cancels. Remaining couplings are zero, so
// lowered gates propagate to their ideal unitaries.
inline SimModel ideal_model(const DeviceConfig& cfg) {
  SimModel model;
  model.drive_coupling = pi / (cfg.sq_amp * double(cfg.sq_gate_duration) * cfg.dt);
  for (const auto& [edge, cal] : cfg.edges) {
    CRHamiltonianParams w;
    w.zx = cfg.area_calibration(edge.first, edge.second).k / cfg.dt;
    if (cal.cr.amplitude > 0.0) {
      const double ratio = cal.comp.amplitude / cal.cr.amplitude;
      const double rel = cal.comp.phase - cal.cr.phase;
      w.ix = -model.drive_coupling * ratio * std::cos(rel);
      w.iy = -model.drive_coupling * ratio * std::sin(rel);
    }
    model.edge_params[edge] = w;
  }
  return model;
}

// Piecewise-constant propagation of a pulse schedule: one exponential per
// sample on ramps, one per plateau segment where every active envelope is
// flat. Exact for the piecewise-constant Hamiltonian model.
inline Matrix simulate_schedule(const Schedule& schedule, const SimModel& model, int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxSimQubits)
    throw DomainError("dense simulation supports 1 to 6 qubits");
  const auto violations = validate_schedule(schedule);
  if (!violations.empty()) throw DomainError("schedule is invalid: " + violations[0].message);
  for (const auto& inst : schedule.instructions) {
    int hi = std::max(inst.channel.q0,
                      inst.channel.kind == Channel::Kind::Control ? inst.channel.q1 : 0);
    if (hi >= num_qubits) throw SchemaError("instruction qubit outside the register");
    if (inst.channel.kind == Channel::Kind::Control)
      model.edge(inst.channel.q0, inst.channel.q1);  // fail early on missing params
  }

  // breakpoints: every envelope edge sample, plus plateau boundaries
  std::set<std::int64_t> cuts{0, schedule.duration_samples()};
  for (const auto& inst : schedule.instructions) {
    const auto& p = inst.envelope;
    if (p.duration == 0) continue;
    cuts.insert(inst.start);
    cuts.insert(inst.start + p.duration);
    if (p.kind == EnvelopeKind::GaussianSquare && p.risefall > 0) {
      for (std::int64_t t = 0; t <= p.risefall; ++t) {
        cuts.insert(inst.start + t);
        cuts.insert(inst.start + p.duration - 1 - t);
      }
    }
  }

  const int dim = 1 << num_qubits;
  Matrix u = Matrix::Identity(dim, dim);
  auto it = cuts.begin();
  std::int64_t prev = *it;
  for (++it; it != cuts.end(); ++it) {
    const std::int64_t next = *it;
    if (next <= prev) continue;
    Matrix h = Matrix::Zero(dim, dim);
    bool active = false;
    for (const auto& inst : schedule.instructions) {
      if (prev < inst.start || prev >= inst.end()) continue;
      const double value = inst.envelope.value_at(prev - inst.start);
      if (value == 0.0) continue;
      active = true;
      if (inst.channel.kind == Channel::Kind::Control) {
        const Matrix h2 =
            cr_hamiltonian(model.edge(inst.channel.q0, inst.channel.q1), value,
                           inst.envelope.phase);
        h += embed(h2, {inst.channel.q0, inst.channel.q1}, num_qubits);
      } else {
        const Matrix h1 = drive_hamiltonian(value, inst.envelope.phase, model.drive_coupling);
        h += embed(h1, {inst.channel.q0}, num_qubits);
      }
    }
    if (active) u = expm_hermitian(h, schedule.dt * double(next - prev)) * u;
    prev = next;
  }
  if (!is_unitary(u, 1e-8)) throw DomainError("schedule propagation lost unitarity");
  return u;
}

// Unitary owed by the leftover virtual-Z frames of a lowered circuit.
inline Matrix trailing_frame_unitary(const LoweredCircuit& lowered, int num_qubits) {
  const int dim = 1 << num_qubits;
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& [q, angle] : lowered.trailing_frames)
    u = embed(rz_matrix(angle), {q}, num_qubits) * u;
  return u;
}

// Simulate a lowered circuit including its trailing frames.
inline Matrix simulate_lowered(const LoweredCircuit& lowered, const SimModel& model,
                               int num_qubits) {
  return trailing_frame_unitary(lowered, num_qubits) *
         simulate_schedule(lowered.schedule, model, num_qubits);
}

}  // namespace pulseforge
