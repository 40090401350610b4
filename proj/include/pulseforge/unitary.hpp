#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pulseforge/circuit.hpp"
#include "pulseforge/common.hpp"

namespace pulseforge {

using Matrix = Eigen::MatrixXcd;

inline constexpr int kMaxSimQubits = 6;

inline Matrix pauli_i() { return Matrix::Identity(2, 2); }
inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Pauli by code 0..3 = I,X,Y,Z (the lexicographic string order used for PTMs).
inline Matrix pauli_by_code(int code) {
  switch (code) {
    case 0: return pauli_i();
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
  }
  throw SchemaError("pauli code out of range");
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// n-qubit Pauli string from per-qubit codes, qubit 0 most significant.
inline Matrix pauli_string(const std::vector<int>& codes) {
  Matrix m = Matrix::Identity(1, 1);
  for (int c : codes) m = kron(m, pauli_by_code(c));
  return m;
}

// exp(-i * scale * H) for Hermitian H, via eigen-decomposition.
inline Matrix expm_hermitian(const Matrix& h, double scale = 1.0) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  const auto& vals = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  Eigen::VectorXcd phases(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    phases(i) = std::polar(1.0, -scale * vals(i));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

// Embed a k-qubit operator onto an n-qubit register. `qubits` lists the
// register positions of the operator's qubits, most significant first.
inline Matrix embed(const Matrix& g, const std::vector<int>& qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  if (g.rows() != (1 << k)) throw SchemaError("operator dimension does not match qubit count");
  for (int q : qubits)
    if (q < 0 || q >= n) throw SchemaError("embed qubit out of range");
  const int dim = 1 << n;
  Matrix out = Matrix::Zero(dim, dim);
  const int rest = n - k;
  std::vector<int> others;
  {
    std::vector<bool> used(n, false);
    for (int q : qubits) used[q] = true;
    for (int q = 0; q < n; ++q)
      if (!used[q]) others.push_back(q);
  }
  for (int sub_r = 0; sub_r < (1 << k); ++sub_r) {
    for (int sub_c = 0; sub_c < (1 << k); ++sub_c) {
      const cplx v = g(sub_r, sub_c);
      if (v == cplx(0, 0)) continue;
      for (int env = 0; env < (1 << rest); ++env) {
        int r = 0, c = 0;
        for (int b = 0; b < k; ++b) {
          const int pos = n - 1 - qubits[b];
          r |= ((sub_r >> (k - 1 - b)) & 1) << pos;
          c |= ((sub_c >> (k - 1 - b)) & 1) << pos;
        }
        for (int b = 0; b < rest; ++b) {
          const int bit = (env >> (rest - 1 - b)) & 1;
          const int pos = n - 1 - others[b];
          r |= bit << pos;
          c |= bit << pos;
        }
        out(r, c) = v;
      }
    }
  }
  return out;
}

inline Matrix rz_matrix(double angle) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -angle / 2.0);
  m(1, 1) = std::polar(1.0, angle / 2.0);
  return m;
}

inline Matrix sqrtx_matrix() {
  Matrix m(2, 2);
  m << cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5);
  return m;
}

// RZX(theta) = exp(-i theta/2 Z x X), control first. Closed form per
// control-bit eigenvalue: the target sees exp(-i z theta/2 X).
inline Matrix rzx_matrix(double theta) {
  Matrix m = Matrix::Zero(4, 4);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  for (int zbit = 0; zbit < 2; ++zbit) {
    const double z = zbit == 0 ? 1.0 : -1.0;
    // 2x2 target block at row/col offset 2*zbit
    m(2 * zbit, 2 * zbit) = c;
    m(2 * zbit + 1, 2 * zbit + 1) = c;
    m(2 * zbit, 2 * zbit + 1) = cplx(0, -z * s);
    m(2 * zbit + 1, 2 * zbit) = cplx(0, -z * s);
  }
  return m;
}

// PRZX = exp(-i sum_i theta_i/2 Z_{c_i} X_t) on [c_1..c_n, t]. All terms
// commute, so each control bit pattern fixes a single X rotation angle on
// the target.
inline Matrix przx_matrix(const std::vector<double>& thetas) {
  const int n = static_cast<int>(thetas.size());
  const int dim = 1 << (n + 1);
  Matrix m = Matrix::Zero(dim, dim);
  for (int ctrl = 0; ctrl < (1 << n); ++ctrl) {
    double omega = 0.0;
    for (int i = 0; i < n; ++i) {
      const int bit = (ctrl >> (n - 1 - i)) & 1;
      omega += thetas[i] * (bit == 0 ? 1.0 : -1.0);
    }
    const double c = std::cos(omega / 2.0), s = std::sin(omega / 2.0);
    const int base = ctrl << 1;  // target is the least significant qubit here
    m(base, base) = c;
    m(base + 1, base + 1) = c;
    m(base, base + 1) = cplx(0, -s);
    m(base + 1, base) = cplx(0, -s);
  }
  return m;
}

// Exact unitary of a single gate, on the gate's own qubits in listed order.
inline Matrix unitary_of_gate(const Gate& g) {
  switch (g.kind) {
    case GateKind::RZX: return rzx_matrix(g.params[0]);
    case GateKind::PRZX: return przx_matrix(g.params);
    case GateKind::CNOT: {
      Matrix m = Matrix::Zero(4, 4);
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
      return m;
    }
    case GateKind::CZ: {
      Matrix m = Matrix::Identity(4, 4);
      m(3, 3) = -1;
      return m;
    }
    case GateKind::X: return pauli_x();
    case GateKind::Z: return pauli_z();
    case GateKind::H: {
      Matrix m(2, 2);
      const double r = 1.0 / std::sqrt(2.0);
      m << r, r, r, -r;
      return m;
    }
    case GateKind::S: {
      Matrix m = Matrix::Identity(2, 2);
      m(1, 1) = cplx(0, 1);
      return m;
    }
    case GateKind::Sdg: {
      Matrix m = Matrix::Identity(2, 2);
      m(1, 1) = cplx(0, -1);
      return m;
    }
    case GateKind::SqrtX: return sqrtx_matrix();
    case GateKind::X32: return pauli_x() * sqrtx_matrix();
    case GateKind::RZ: return rz_matrix(g.params[0]);
  }
  throw SchemaError("unknown gate kind");
}

// Ordered product of the circuit's gates embedded on the full register.
inline Matrix unitary_of_circuit(const Circuit& c) {
  if (c.num_qubits < 1 || c.num_qubits > kMaxSimQubits)
    throw DomainError("dense simulation supports 1 to 6 qubits");
  const int dim = 1 << c.num_qubits;
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& g : c.gates)
    u = embed(unitary_of_gate(g), g.qubits, c.num_qubits) * u;
  return u;
}

// |Tr(A^dag B)| / d: equals 1 iff A and B agree up to a global phase.
inline double phase_overlap(const Matrix& a, const Matrix& b) {
  return std::abs((a.adjoint() * b).trace()) / double(a.rows());
}

inline bool phase_equivalent(const Matrix& a, const Matrix& b, double tol = 1e-9) {
  return std::abs(phase_overlap(a, b) - 1.0) <= tol;
}

// Process fidelity of two unitaries: |Tr(U^dag V)|^2 / d^2.
inline double process_fidelity(const Matrix& u, const Matrix& v) {
  const double overlap = phase_overlap(u, v);
  return overlap * overlap;
}

inline bool is_unitary(const Matrix& u, double tol = 1e-9) {
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace pulseforge
