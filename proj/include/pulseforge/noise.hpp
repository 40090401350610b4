#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pulseforge/channel.hpp"
#include "pulseforge/common.hpp"

namespace pulseforge {

struct DecoherenceParams {
  double beta = 0.0;   // 1/s
  double f0 = 0.125;   // maximally-mixed floor, 2^-n
  int n_qubits = 3;

  void validate() const {
    if (beta < 0.0) throw SchemaError("decay rate must be non-negative");
    if (std::abs(f0 - std::ldexp(1.0, -n_qubits)) > 1e-15)
      throw SchemaError("mixed-state floor must equal 2^-n exactly");
  }

  static DecoherenceParams for_qubits(int n, double beta) {
    DecoherenceParams p;
    p.n_qubits = n;
    p.f0 = std::ldexp(1.0, -n);
    p.beta = beta;
    p.validate();
    return p;
  }
};

// F(t) = (1 - F0) e^{-beta t} + F0
inline double fidelity_decay(double t, const DecoherenceParams& params) {
  params.validate();
  return (1.0 - params.f0) * std::exp(-params.beta * t) + params.f0;
}

// F_P = (1 - F0) ((F_S - F0)/(1 - F0))^{t_P/t_S} + F0. Reduces to
// F_S^{t_P/t_S} for vanishing F0, hence sqrt(F_S) at a 2:1 duration ratio
// and F_S^{1/n} at n:1.
inline double predict_parallel_fidelity(double f_serial, double t_parallel, double t_serial,
                                        double f0) {
  if (f_serial < f0) throw DomainError("below mixed-state floor");
  if (!(t_serial > 0.0)) throw DomainError("serial duration must be positive");
  if (f0 >= 1.0) throw DomainError("mixed-state floor must be below 1");
  const double base = (f_serial - f0) / (1.0 - f0);
  return (1.0 - f0) * std::pow(base, t_parallel / t_serial) + f0;
}

// Pauli mixture: string label ("XZI") -> probability. The identity keeps the
// remaining weight.
struct PauliNoiseModel {
  std::map<std::string, double> probabilities;

  void validate(int n) const {
    double total = 0.0;
    for (const auto& [label, prob] : probabilities) {
      if (int(label.size()) != n) throw SchemaError("pauli label length mismatch");
      for (char c : label)
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
          throw SchemaError("bad pauli label '" + label + "'");
      if (prob < 0.0) throw SchemaError("pauli probability must be non-negative");
      total += prob;
    }
    if (total > 1.0 + 1e-12) throw SchemaError("pauli probabilities exceed 1");
  }

  bool empty() const { return probabilities.empty(); }

  double identity_probability() const {
    double total = 0.0;
    for (const auto& [label, prob] : probabilities) total += prob;
    return 1.0 - total;
  }

  // Uniform mixture over all non-identity strings with total weight q.
  static PauliNoiseModel depolarizing(int n, double q) {
    PauliNoiseModel m;
    const int np = 1 << (2 * n);
    for (int i = 1; i < np; ++i) m.probabilities[pauli_label(i, n)] = q / double(np - 1);
    m.validate(n);
    return m;
  }

  // Depolarizing mixture whose per-channel Pauli fidelity equals p for every
  // non-identity channel: q = (1 - p) (4^n - 1) / 4^n.
  static PauliNoiseModel depolarizing_with_channel_fidelity(int n, double p) {
    const double np = double(1 << (2 * n));
    return depolarizing(n, (1.0 - p) * (np - 1.0) / np);
  }
};

inline Matrix pauli_matrix_of_label(const std::string& label) {
  std::vector<int> codes;
  for (char c : label)
    codes.push_back(c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3);
  return pauli_string(codes);
}

// rho -> sum_q p_q Q rho Q + p_id rho
inline Matrix apply_pauli_mixture(const PauliNoiseModel& noise, const Matrix& rho) {
  Matrix out = noise.identity_probability() * rho;
  for (const auto& [label, prob] : noise.probabilities) {
    const Matrix q = pauli_matrix_of_label(label);
    out += prob * q * rho * q;
  }
  return out;
}

// Choi matrix of (pauli mixture) after (unitary).
inline QuantumChannel apply_pauli_noise(const Matrix& u, const PauliNoiseModel& noise) {
  const int d = int(u.rows());
  int n = 0;
  while ((1 << n) < d) ++n;
  noise.validate(n);
  auto vec_of = [&](const Matrix& v) {
    Eigen::VectorXcd out(d * d);
    for (int i = 0; i < d; ++i) out.segment(i * d, d) = v.col(i);
    return out;
  };
  Matrix c = Matrix::Zero(d * d, d * d);
  const Eigen::VectorXcd base = vec_of(u);
  c += noise.identity_probability() * base * base.adjoint();
  for (const auto& [label, prob] : noise.probabilities) {
    const Eigen::VectorXcd v = vec_of(pauli_matrix_of_label(label) * u);
    c += prob * v * v.adjoint();
  }
  return QuantumChannel::choi(std::move(c));
}

struct SpamNormalization {
  QuantumChannel normalized;
  double alpha = 0.0;
};

// Blend S_norm = alpha S_mle + (1-alpha) S_ideal such that the paper-style
// fidelity F(S_norm, S_ideal) equals F_mle / F_id. By linearity the blended
// fidelity is alpha F_mle + (1 - alpha).
inline SpamNormalization spam_normalize(const QuantumChannel& s_mle,
                                        const QuantumChannel& s_ideal, double f_id) {
  if (!(f_id > 0.0) || f_id > 1.0) throw SchemaError("identity fidelity must lie in (0, 1]");
  const double f_mle = process_fidelity(s_mle, s_ideal);
  const double target = f_mle / f_id;
  if (target > 1.0 + 1e-12) throw DomainError("normalization needs alpha < 0 (F_mle > F_id)");
  double alpha = 0.0;
  if (std::abs(1.0 - f_mle) > 1e-15) alpha = (1.0 - target) / (1.0 - f_mle);
  const Matrix blended = alpha * s_mle.choi_matrix() + (1.0 - alpha) * s_ideal.choi_matrix();
  return {QuantumChannel::choi(blended), alpha};
}

inline RealMatrix normalized_truth_table(const QuantumChannel& s_norm) {
  return truth_table(s_norm);
}

}  // namespace pulseforge
