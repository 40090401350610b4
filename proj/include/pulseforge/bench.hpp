#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pulseforge/circuit.hpp"
#include "pulseforge/common.hpp"
#include "pulseforge/noise.hpp"
#include "pulseforge/unitary.hpp"

namespace pulseforge {

struct CBConfig {
  std::vector<int> depths{4, 8, 16, 32};
  int samples_per_depth = 28;
  int shots = 0;  // 0 = exact-expectation mode
  std::uint64_t seed = 0;

  void validate() const {
    if (depths.empty()) throw SchemaError("need at least one twirling depth");
    int prev = 0;
    for (int m : depths) {
      if (m < 1 || m <= prev) throw SchemaError("depths must be strictly increasing and >= 1");
      prev = m;
    }
    if (samples_per_depth < 1) throw SchemaError("need at least one sample per depth");
    if (shots < 0) throw SchemaError("shot count must be non-negative");
  }
};

struct DecayFit {
  double amplitude = 0.0;  // A in A p^m
  double p = 0.0;
  double p_stderr = 0.0;       // from the OLS slope covariance
  double max_log_residual = 0.0;
  bool ok = false;  // false when means were non-positive or underdetermined
};

// Least squares on log(mean) = log A + m log p. Non-positive means are
// dropped under the positivity guard; the fit is flagged not-ok if fewer
// than two usable points remain.
inline DecayFit fit_decay(const std::vector<int>& depths, const std::vector<double>& means) {
  if (depths.size() != means.size()) throw SchemaError("depths/means length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (means[i] > 0.0) {
      xs.push_back(double(depths[i]));
      ys.push_back(std::log(means[i]));
    }
  }
  DecayFit fit;
  if (xs.size() < 2) return fit;
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return fit;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  fit.amplitude = std::exp(intercept);
  fit.p = std::exp(slope);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
    fit.max_log_residual = std::max(fit.max_log_residual, std::abs(r));
  }
  if (xs.size() > 2) {
    const double s2 = ss_res / (n - 2.0);
    const double se_slope = std::sqrt(s2 * n / denom);
    fit.p_stderr = fit.p * se_slope;
  }
  fit.ok = fit.p > 0.0;
  return fit;
}

// Synthetic decay data straight from the model A p^m: exact means when
// shots == 0, otherwise per-depth averages of `shots` two-outcome draws.
inline std::vector<double> generate_decay_means(double amplitude, double p,
                                                const std::vector<int>& depths, int shots,
                                                Rng& rng) {
  std::vector<double> out;
  for (int m : depths) {
    const double expectation = amplitude * std::pow(p, m);
    if (shots == 0) {
      out.push_back(expectation);
      continue;
    }
    const double prob_plus = std::clamp((1.0 + expectation) / 2.0, 0.0, 1.0);
    long sum = 0;
    for (int s = 0; s < shots; ++s) sum += rng.uniform() < prob_plus ? 1 : -1;
    out.push_back(double(sum) / double(shots));
  }
  return out;
}

// Numeric Clifford test: the gate must conjugate every generator Pauli to a
// signed Pauli string.
inline bool is_clifford(const Matrix& u, double tol = 1e-8) {
  int n = 0;
  while ((1 << n) < u.rows()) ++n;
  const int d = 1 << n;
  const int np = 1 << (2 * n);
  for (int q = 0; q < n; ++q) {
    for (int gen = 1; gen <= 3; gen += 2) {  // X and Z generate the Pauli group
      std::vector<int> codes(n, 0);
      codes[q] = gen;
      const Matrix image = u * pauli_string(codes) * u.adjoint();
      int hits = 0;
      for (int i = 0; i < np; ++i) {
        const cplx c = (pauli_string_by_index(i, n) * image).trace() / double(d);
        if (std::abs(c) > tol) {
          ++hits;
          if (std::abs(std::abs(c.real()) - 1.0) > tol || std::abs(c.imag()) > tol) return false;
        }
      }
      if (hits != 1) return false;
    }
  }
  return true;
}

struct CBChannelResult {
  std::string channel;  // Pauli string label
  double p = 0.0;
  double p_ref = 1.0;
  double ratio = 0.0;
  double amplitude = 0.0;
  double max_log_residual = 0.0;
  double p_stderr = 0.0;
  bool fit_ok = false;
};

struct CBResult {
  std::vector<CBChannelResult> channels;

  double average_p() const {
    double sum = 0.0;
    for (const auto& c : channels) sum += c.p;
    return channels.empty() ? 0.0 : sum / double(channels.size());
  }
  double average_ratio() const {
    double sum = 0.0;
    for (const auto& c : channels) sum += c.ratio;
    return channels.empty() ? 0.0 : sum / double(channels.size());
  }
};

namespace detail {

// Pauli index codes per qubit: 0=I, 1=X, 2=Y, 3=Z. Two strings commute iff
// the symplectic form over their (x, z) bit masks vanishes.
inline void pauli_masks(int index, int n, unsigned& x_mask, unsigned& z_mask) {
  x_mask = z_mask = 0;
  for (int q = n - 1; q >= 0; --q) {
    const int code = index & 3;
    index >>= 2;
    if (code == 1 || code == 2) x_mask |= 1u << q;
    if (code == 2 || code == 3) z_mask |= 1u << q;
  }
}

inline int commute_sign(int a, int b, int n) {
  unsigned xa, za, xb, zb;
  pauli_masks(a, n, xa, za);
  pauli_masks(b, n, xb, zb);
  const int parity = __builtin_popcount(xa & zb) + __builtin_popcount(za & xb);
  return parity % 2 == 0 ? 1 : -1;
}

// Conjugation table of a Clifford unitary: U P_i U^dag = sign[i] P_{perm[i]}.
struct CliffordAction {
  std::vector<int> perm;
  std::vector<int> sign;
};

inline CliffordAction clifford_action(const Matrix& u, int n) {
  const int d = 1 << n;
  const int np = 1 << (2 * n);
  CliffordAction act;
  act.perm.assign(np, 0);
  act.sign.assign(np, 1);
  for (int i = 0; i < np; ++i) {
    const Matrix image = u * pauli_string_by_index(i, n) * u.adjoint();
    bool found = false;
    for (int j = 0; j < np; ++j) {
      const cplx c = (pauli_string_by_index(j, n) * image).trace() / double(d);
      if (std::abs(c) > 0.5) {
        if (std::abs(std::abs(c.real()) - 1.0) > 1e-8 || std::abs(c.imag()) > 1e-8)
          throw DomainError("cycle benchmarking requires a Clifford gate");
        act.perm[i] = j;
        act.sign[i] = c.real() > 0 ? 1 : -1;
        found = true;
        break;
      }
    }
    if (!found) throw DomainError("cycle benchmarking requires a Clifford gate");
  }
  return act;
}

// Per-Pauli damping factors of a Pauli mixture: conjugating P by the mixture
// scales its coefficient by f(P) = p_id + sum_q p_q * (+-1).
inline std::vector<double> mixture_damping(const PauliNoiseModel& noise, int n) {
  const int np = 1 << (2 * n);
  std::vector<double> f(np, 1.0);
  if (noise.empty()) return f;
  for (int p = 0; p < np; ++p) {
    double val = noise.identity_probability();
    for (const auto& [label, prob] : noise.probabilities) {
      int q_index = 0;
      for (char c : label) q_index = (q_index << 2) | (c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3);
      val += prob * commute_sign(q_index, p, n);
    }
    f[p] = val;
  }
  return f;
}

// One cycle-benchmark run (gate interleaved or not) for one Pauli channel.
// The state (I + P_k)/d stays a sparse Pauli combination under twirls,
// Clifford gates and Pauli noise, so the whole sequence is tracked as one
// damped, signed Pauli coefficient plus the measurement frame.
inline DecayFit cb_single_channel(const CliffordAction* gate, const std::vector<double>& gate_damp,
                                  const std::vector<double>& twirl_damp, int n, int channel_index,
                                  const CBConfig& cfg, const std::string& stream_tag) {
  const int np = 1 << (2 * n);
  std::vector<double> means;
  for (int m : cfg.depths) {
    double total = 0.0;
    long count = 0;
    for (int sample = 0; sample < cfg.samples_per_depth; ++sample) {
      Rng rng = Rng::substream(cfg.seed, stream_tag + "/" + pauli_label(channel_index, n) + "/" +
                                             std::to_string(m) + "/" + std::to_string(sample));
      // state coefficient r of P_state: rho = (I + r P_state)/d
      int state = channel_index;
      double r = 1.0;
      // measurement frame: s * P_frame tracks the ideal image of P_k
      int frame = channel_index;
      int s = 1;
      for (int cycle = 0; cycle < m; ++cycle) {
        const int twirl = int(rng.below(np));
        const int chi = commute_sign(twirl, state, n);
        r *= chi;
        s *= commute_sign(twirl, frame, n);
        r *= twirl_damp[state];
        if (gate) {
          r *= gate->sign[state];
          state = gate->perm[state];
          s *= gate->sign[frame];
          frame = gate->perm[frame];
          r *= gate_damp[state];
        }
      }
      // expectation of s*P_frame on (I + r P_state)/d
      const double expectation = frame == state ? s * r : 0.0;
      if (cfg.shots == 0) {
        total += expectation;
        ++count;
      } else {
        const double prob_plus = std::clamp((1.0 + expectation) / 2.0, 0.0, 1.0);
        for (int shot = 0; shot < cfg.shots; ++shot) {
          total += rng.uniform() < prob_plus ? 1.0 : -1.0;
          ++count;
        }
      }
    }
    means.push_back(total / double(count));
  }
  return fit_decay(cfg.depths, means);
}

}  // namespace detail

// Pauli-twirled cycle benchmarking of `gate` under a synthetic noise model.
// With interleave = true the gate (required Clifford) alternates with random
// Pauli twirls and a separate no-gate reference run supplies p_ref; with
// interleave = false only the twirl cycle itself is benchmarked (p_ref = 1).
inline CBResult cycle_benchmark(const Circuit& gate, const PauliNoiseModel& noise,
                                const CBConfig& cfg, bool interleave,
                                const PauliNoiseModel& twirl_noise = {}) {
  cfg.validate();
  const int n = gate.num_qubits;
  noise.validate(n);
  twirl_noise.validate(n);
  std::optional<detail::CliffordAction> action;
  if (interleave) {
    const Matrix u = unitary_of_circuit(gate);
    if (!is_clifford(u)) throw DomainError("cycle benchmarking requires a Clifford gate");
    action = detail::clifford_action(u, n);
  }
  const std::vector<double> gate_damp = detail::mixture_damping(noise, n);
  const std::vector<double> twirl_damp = detail::mixture_damping(twirl_noise, n);
  const int np = 1 << (2 * n);
  CBResult result;
  for (int k = 1; k < np; ++k) {
    CBChannelResult ch;
    ch.channel = pauli_label(k, n);
    const DecayFit main = detail::cb_single_channel(action ? &*action : nullptr, gate_damp,
                                                    twirl_damp, n, k, cfg, "cb/main");
    ch.p = main.p;
    ch.amplitude = main.amplitude;
    ch.max_log_residual = main.max_log_residual;
    ch.p_stderr = main.p_stderr;
    ch.fit_ok = main.ok;
    if (interleave) {
      const DecayFit ref =
          detail::cb_single_channel(nullptr, gate_damp, twirl_damp, n, k, cfg, "cb/ref");
      ch.p_ref = ref.ok ? ref.p : 0.0;
      ch.fit_ok = ch.fit_ok && ref.ok;
    } else {
      ch.p_ref = 1.0;
    }
    ch.ratio = ch.p_ref > 0.0 ? ch.p / ch.p_ref : 0.0;
    result.channels.push_back(std::move(ch));
  }
  return result;
}

// Linear-inversion process tomography with multinomial measurement sampling.
// Inputs run over the product states {|0>,|1>,|+>,|+i>}^n; measurements over
// the 3^n Pauli bases. shots == 0 uses exact expectations and reproduces the
// channel's Choi matrix up to roundoff.
inline QuantumChannel shot_tomography(const QuantumChannel& ch, int shots, std::uint64_t seed) {
  const int n = ch.num_qubits();
  if (n > 3) throw DomainError("tomography supports up to 3 qubits");
  const int d = ch.dim();
  const int np = 1 << (2 * n);

  // single-qubit input states and their Pauli expansions
  const Matrix ket0 = (Matrix(2, 2) << 1, 0, 0, 0).finished();
  const Matrix ket1 = (Matrix(2, 2) << 0, 0, 0, 1).finished();
  const Matrix ketp = (Matrix(2, 2) << 0.5, 0.5, 0.5, 0.5).finished();
  const Matrix keti = (Matrix(2, 2) << 0.5, cplx(0, -0.5), cplx(0, 0.5), 0.5).finished();
  const std::vector<Matrix> input_states{ket0, ket1, ketp, keti};

  int inputs_total = 1;
  for (int q = 0; q < n; ++q) inputs_total *= 4;

  // estimated output state for every product input
  std::vector<Matrix> outputs(inputs_total);
  for (int in = 0; in < inputs_total; ++in) {
    Matrix rho_in = Matrix::Identity(1, 1);
    int code = in;
    for (int q = 0; q < n; ++q) {
      rho_in = kron(rho_in, input_states[(code >> (2 * (n - 1 - q))) & 3]);
    }
    const Matrix rho_out = ch.apply(rho_in);
    // measure in each Pauli basis, estimate string expectations; shots == 0
    // uses the exact outcome distribution through the same path
    std::vector<double> expectations(np, 0.0);
    std::vector<int> hits(np, 0);
    int bases_total = 1;
    for (int q = 0; q < n; ++q) bases_total *= 3;
    for (int basis = 0; basis < bases_total; ++basis) {
      std::vector<int> axes(n);  // 1=X, 2=Y, 3=Z per qubit
      int b = basis;
      for (int q = n - 1; q >= 0; --q) {
        axes[q] = (b % 3) + 1;
        b /= 3;
      }
      // measurement projectors: rotate into the basis, measure Z^n
      Matrix rot = Matrix::Identity(1, 1);
      for (int q = 0; q < n; ++q) {
        Matrix v(2, 2);  // columns are the axis' +/- eigenvectors
        const double r = 1.0 / std::sqrt(2.0);
        if (axes[q] == 3) v = Matrix::Identity(2, 2);
        else if (axes[q] == 1) v << r, r, r, -r;
        else v << r, r, cplx(0, r), cplx(0, -r);
        rot = kron(rot, v);
      }
      const Matrix rotated = rot.adjoint() * rho_out * rot;
      std::vector<double> probs(d);
      for (int i = 0; i < d; ++i) probs[i] = std::max(0.0, rotated(i, i).real());
      double norm = 0.0;
      for (double p : probs) norm += p;
      for (double& p : probs) p /= norm;
      std::vector<double> freq = probs;
      if (shots > 0) {
        Rng rng = Rng::substream(seed, "tomo/" + std::to_string(in) + "/" + std::to_string(basis));
        std::vector<int> counts(d, 0);
        for (int s = 0; s < shots; ++s) {
          double r = rng.uniform();
          int outcome = 0;
          while (outcome < d - 1 && r >= probs[outcome]) {
            r -= probs[outcome];
            ++outcome;
          }
          counts[outcome] += 1;
        }
        for (int i = 0; i < d; ++i) freq[i] = double(counts[i]) / double(shots);
      }
      // every Pauli string supported on this basis gets an estimate
      for (int pidx = 0; pidx < np; ++pidx) {
        bool supported = true;
        int code2 = pidx;
        std::vector<int> codes(n);
        for (int q = n - 1; q >= 0; --q) {
          codes[q] = code2 & 3;
          code2 >>= 2;
        }
        for (int q = 0; q < n; ++q)
          if (codes[q] != 0 && codes[q] != axes[q]) supported = false;
        if (!supported) continue;
        double est = 0.0;
        for (int outcome = 0; outcome < d; ++outcome) {
          int sign = 1;
          for (int q = 0; q < n; ++q)
            if (codes[q] != 0 && ((outcome >> (n - 1 - q)) & 1)) sign = -sign;
          est += sign * freq[outcome];
        }
        expectations[pidx] += est;
        hits[pidx] += 1;
      }
    }
    Matrix rho_est = Matrix::Zero(d, d);
    for (int pidx = 0; pidx < np; ++pidx) {
      const double e = pidx == 0 ? 1.0 : expectations[pidx] / double(std::max(1, hits[pidx]));
      rho_est += e / double(d) * pauli_string_by_index(pidx, n);
    }
    outputs[in] = rho_est;
  }

  // Lambda(R) for every input Pauli string R by expanding R over the product
  // input states, then C = (1/d) sum_R R^T (x) Lambda(R).
  // single-qubit expansions: I = r0 + r1, X = 2r+ - r0 - r1,
  // Y = 2ri - r0 - r1, Z = r0 - r1.
  const double expansion[4][4] = {
      {1, 1, 0, 0},    // I
      {-1, -1, 2, 0},  // X
      {-1, -1, 0, 2},  // Y
      {1, -1, 0, 0},   // Z
  };
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (int pidx = 0; pidx < np; ++pidx) {
    std::vector<int> codes(n);
    int code2 = pidx;
    for (int q = n - 1; q >= 0; --q) {
      codes[q] = code2 & 3;
      code2 >>= 2;
    }
    Matrix lambda_r = Matrix::Zero(d, d);
    // iterate all product-input combinations contributing to this string
    std::vector<int> choice(n, 0);
    while (true) {
      double coeff = 1.0;
      for (int q = 0; q < n; ++q) coeff *= expansion[codes[q]][choice[q]];
      if (coeff != 0.0) {
        int in = 0;
        for (int q = 0; q < n; ++q) in |= choice[q] << (2 * (n - 1 - q));
        lambda_r += coeff * outputs[in];
      }
      int q = n - 1;
      while (q >= 0 && ++choice[q] == 4) choice[q--] = 0;
      if (q < 0) break;
    }
    const Matrix r_t = pauli_string_by_index(pidx, n).transpose();
    choi += kron(r_t, lambda_r) / double(d);
  }
  return QuantumChannel::choi(std::move(choi));
}

}  // namespace pulseforge
