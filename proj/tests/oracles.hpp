// Independent oracles for the test suites. Everything here is deliberately
// implemented by a different route than the library: series exponentials
// instead of eigen-decompositions, permutation+kron embeddings instead of
// direct index fills, explicit summation instead of closed forms.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

inline Matrix eye(int d) { return Matrix::Identity(d, d); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix Y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline Matrix H() {
  Matrix m(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  m << r, r, r, -r;
  return m;
}

// Taylor-series matrix exponential with scaling and squaring.
inline Matrix expm_series(const Matrix& a) {
  int squarings = 0;
  Matrix scaled = a;
  while (scaled.cwiseAbs().maxCoeff() > 0.25) {
    scaled /= 2.0;
    ++squarings;
  }
  Matrix term = eye(int(a.rows()));
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// exp(-i * t * G) for a (Hermitian) generator G, series route.
inline Matrix evolve(const Matrix& g, double t) { return expm_series(cplx(0, -t) * g); }

// Embed a k-qubit operator onto n qubits (qubit 0 = most significant bit)
// via an explicit index permutation: P maps |register basis> to the basis
// where the listed qubits come first, then G x I acts, then P^-1.
inline Matrix embed(const Matrix& g, const std::vector<int>& qubits, int n) {
  const int k = int(qubits.size());
  const int dim = 1 << n;
  std::vector<int> order = qubits;
  for (int q = 0; q < n; ++q)
    if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) order.push_back(q);
  Matrix perm = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    int j = 0;
    for (int b = 0; b < n; ++b) {
      const int bit = (i >> (n - 1 - order[b])) & 1;
      j |= bit << (n - 1 - b);
    }
    perm(j, i) = 1.0;
  }
  const Matrix big = kron(g, eye(1 << (n - k)));
  return perm.adjoint() * big * perm;
}

inline double phase_distance(const Matrix& a, const Matrix& b) {
  return std::abs(std::abs((a.adjoint() * b).trace()) / double(a.rows()) - 1.0);
}

inline Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

inline Matrix cz() {
  Matrix m = eye(4);
  m(3, 3) = -1;
  return m;
}

}  // namespace oracle
