#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "pulseforge/common.hpp"
#include "pulseforge/unitary.hpp"

namespace pulseforge {

using RealMatrix = Eigen::MatrixXd;

// Pauli string label for index i in {I,X,Y,Z}^n lexicographic order, qubit 0
// first (most significant base-4 digit).
inline std::string pauli_label(int index, int n) {
  static const char names[4] = {'I', 'X', 'Y', 'Z'};
  std::string s(n, 'I');
  for (int q = n - 1; q >= 0; --q) {
    s[q] = names[index & 3];
    index >>= 2;
  }
  return s;
}

inline Matrix pauli_string_by_index(int index, int n) {
  std::vector<int> codes(n);
  for (int q = n - 1; q >= 0; --q) {
    codes[q] = index & 3;
    index >>= 2;
  }
  return pauli_string(codes);
}

// A 1-3 qubit quantum process in one of three representations. Choi matrices
// use the unnormalized convention Tr(C) = d for trace-preserving maps, with
// the input factor first, so the paper-style fidelity Tr{S_a S_b} carries a
// 1/d^2 normalization here.
class QuantumChannel {
 public:
  enum class Rep { Unitary, Choi, PTM };

  static QuantumChannel unitary(Matrix u) {
    if (!is_unitary(u, 1e-9)) throw DomainError("matrix is not unitary");
    QuantumChannel ch;
    ch.rep_ = Rep::Unitary;
    ch.num_qubits_ = qubits_for_dim(u.rows());
    ch.mat_ = std::move(u);
    return ch;
  }

  static QuantumChannel choi(Matrix c) {
    QuantumChannel ch;
    ch.rep_ = Rep::Choi;
    ch.num_qubits_ = qubits_for_dim(c.rows()) / 2;
    if ((1 << (2 * ch.num_qubits_)) != c.rows())
      throw SchemaError("choi matrix dimension must be d^2");
    ch.mat_ = std::move(c);
    return ch;
  }

  static QuantumChannel ptm(RealMatrix t) {
    QuantumChannel ch;
    ch.rep_ = Rep::PTM;
    int n = 0;
    while ((1 << (2 * n)) < t.rows()) ++n;
    if ((1 << (2 * n)) != t.rows() || t.rows() != t.cols())
      throw SchemaError("ptm dimension must be 4^n");
    ch.num_qubits_ = n;
    ch.real_mat_ = std::move(t);
    return ch;
  }

  Rep rep() const { return rep_; }
  int num_qubits() const { return num_qubits_; }
  int dim() const { return 1 << num_qubits_; }

  const Matrix& unitary_matrix() const {
    if (rep_ != Rep::Unitary) throw DomainError("channel is not unitary");
    return mat_;
  }
  const RealMatrix& ptm_matrix() const {
    if (rep_ != Rep::PTM) throw DomainError("channel is not in PTM form");
    return real_mat_;
  }

  // Choi matrix (computed on demand for unitary channels).
  Matrix choi_matrix() const {
    switch (rep_) {
      case Rep::Choi: return mat_;
      case Rep::Unitary: {
        const int d = dim();
        Eigen::VectorXcd vec = Eigen::VectorXcd::Zero(d * d);
        for (int i = 0; i < d; ++i) vec.segment(i * d, d) += mat_.col(i);
        return Matrix(vec * vec.adjoint());
      }
      case Rep::PTM: throw DomainError("choi form of a PTM is not supported");
    }
    throw DomainError("bad representation");
  }

  // Apply the channel to a density matrix.
  Matrix apply(const Matrix& rho) const {
    const int d = dim();
    if (rho.rows() != d) throw SchemaError("state dimension mismatch");
    switch (rep_) {
      case Rep::Unitary: return Matrix(mat_ * rho * mat_.adjoint());
      case Rep::Choi: {
        // Lambda(rho) = Tr_in[ C (rho^T x I) ]
        Matrix out = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k) {
            const cplx w = rho(i, k);
            if (w == cplx(0, 0)) continue;
            out += w * mat_.block(i * d, k * d, d, d);
          }
        return out;
      }
      case Rep::PTM: {
        // expand rho in normalized Paulis, map coefficients, reassemble
        const int np = 1 << (2 * num_qubits_);
        const double root_d = std::sqrt(double(d));
        Eigen::VectorXd coeff(np);
        for (int i = 0; i < np; ++i)
          coeff(i) = (pauli_string_by_index(i, num_qubits_) * rho).trace().real() / root_d;
        Eigen::VectorXd mapped = real_mat_ * coeff;
        Matrix out = Matrix::Zero(d, d);
        for (int i = 0; i < np; ++i)
          out += mapped(i) / root_d * pauli_string_by_index(i, num_qubits_);
        return out;
      }
    }
    throw DomainError("bad representation");
  }

 private:
  static int qubits_for_dim(Eigen::Index d) {
    int n = 0;
    while ((Eigen::Index(1) << n) < d) ++n;
    if ((Eigen::Index(1) << n) != d) throw SchemaError("dimension must be a power of two");
    return n;
  }

  Rep rep_ = Rep::Unitary;
  int num_qubits_ = 0;
  Matrix mat_;
  RealMatrix real_mat_;
};

inline QuantumChannel choi_of_unitary(const Matrix& u) {
  return QuantumChannel::choi(QuantumChannel::unitary(u).choi_matrix());
}

// PTM over the normalized Pauli basis P/sqrt(d): T_ij = Tr[P~_i Lambda(P~_j)],
// column j holding the image of P_j, so PTMs compose by left multiplication
// and entries stay in [-1, 1].
inline QuantumChannel ptm_of_channel(const QuantumChannel& ch) {
  if (ch.rep() == QuantumChannel::Rep::PTM) return ch;
  const int n = ch.num_qubits();
  const int d = ch.dim();
  const int np = 1 << (2 * n);
  RealMatrix t(np, np);
  for (int j = 0; j < np; ++j) {
    const Matrix image = ch.apply(pauli_string_by_index(j, n));
    for (int i = 0; i < np; ++i)
      t(i, j) = (pauli_string_by_index(i, n) * image).trace().real() / double(d);
  }
  return QuantumChannel::ptm(std::move(t));
}

inline RealMatrix ptm_diff(const QuantumChannel& a, const QuantumChannel& b) {
  const RealMatrix ta = ptm_of_channel(a).ptm_matrix();
  const RealMatrix tb = ptm_of_channel(b).ptm_matrix();
  if (ta.rows() != tb.rows()) throw SchemaError("ptm dimension mismatch");
  return ta - tb;
}

// Process fidelity. For unitary pairs this is |Tr(U^dag V)|^2 / d^2; in Choi
// form it is Tr{S_a S_b} normalized to 1 at equality.
inline double process_fidelity(const QuantumChannel& a, const QuantumChannel& b) {
  if (a.num_qubits() != b.num_qubits()) throw SchemaError("channel dimension mismatch");
  if (a.rep() == QuantumChannel::Rep::Unitary && b.rep() == QuantumChannel::Rep::Unitary)
    return process_fidelity(a.unitary_matrix(), b.unitary_matrix());
  const Matrix ca = a.choi_matrix();
  const Matrix cb = b.choi_matrix();
  const double d = double(a.dim());
  return (ca * cb).trace().real() / (d * d);
}

// T_ij = probability of measuring |j> given input |i>; rows sum to 1 for
// trace-preserving channels. Basis labels follow the register order with
// qubit 0 the most significant bit.
inline RealMatrix truth_table(const QuantumChannel& ch) {
  const int d = ch.dim();
  RealMatrix t(d, d);
  for (int i = 0; i < d; ++i) {
    Matrix rho = Matrix::Zero(d, d);
    rho(i, i) = 1.0;
    const Matrix out = ch.apply(rho);
    for (int j = 0; j < d; ++j) t(i, j) = out(j, j).real();
  }
  return t;
}

}  // namespace pulseforge
