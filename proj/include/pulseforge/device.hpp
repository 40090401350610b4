#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pulseforge/common.hpp"
#include "pulseforge/pulse.hpp"

namespace pulseforge {

// Reference pulses of one directed CR edge, calibrated to theta = pi/2. The
// compensation tone spans the same interval as the CR tone.
struct EdgeCalibration {
  PulseEnvelope cr;
  PulseEnvelope comp;
};

struct QubitParams {
  double t1 = 100e-6;
  double t2 = 100e-6;
};

// Gaussian square with the default shape rule: sigma = duration / 8,
// risefall = 2 sigma.
inline PulseEnvelope default_gaussian_square(double amplitude, std::int64_t duration,
                                             double phase = 0.0) {
  PulseEnvelope p;
  p.kind = EnvelopeKind::GaussianSquare;
  p.amplitude = amplitude;
  p.phase = phase;
  p.duration = duration;
  p.sigma = double(duration) / 8.0;
  p.risefall = std::int64_t(std::llround(2.0 * p.sigma));
  p.validate();
  return p;
}

struct DeviceConfig {
  double dt = 2.0 / 9.0 * 1e-9;       // seconds per sample
  double a_max = 1.0;                 // amplitude ceiling for merged tones
  std::int64_t sq_gate_duration = 160;  // single-qubit block, samples
  double sq_amp = 0.5;                // amplitude of the pi drive pulse
  std::vector<QubitParams> qubits;
  std::map<std::pair<int, int>, EdgeCalibration> edges;  // (control, target)

  void validate() const {
    if (!(dt > 0.0)) throw SchemaError("dt must be positive");
    if (!(a_max > 0.0) || a_max > 1.0) throw SchemaError("a_max must lie in (0, 1]");
    if (sq_gate_duration < 1) throw SchemaError("single-qubit duration must be positive");
    if (!(sq_amp > 0.0) || 1.5 * sq_amp > 1.0 + 1e-12)
      throw SchemaError("sq_amp must leave headroom for the 3/2 pulse");
    for (const auto& [edge, cal] : edges) {
      if (edge.first == edge.second) throw SchemaError("edge endpoints must differ");
      cal.cr.validate();
      cal.comp.validate();
      if (cal.cr.duration != cal.comp.duration)
        throw SchemaError("compensation tone must span the CR tone");
      if (cal.cr.amplitude > a_max + 1e-12 || cal.comp.amplitude > a_max + 1e-12)
        throw SchemaError("reference amplitude exceeds a_max");
      if (std::abs(pulse_area(cal.cr)) <= 0.0)
        throw SchemaError("degenerate CR reference pulse");
    }
  }

  bool has_edge(int control, int target) const { return edges.count({control, target}) != 0; }

  const EdgeCalibration& edge(int control, int target) const {
    auto it = edges.find({control, target});
    if (it == edges.end()) throw DomainError("no calibration for edge");
    return it->second;
  }

  // radians per (amplitude * sample) on this edge
  AreaCalibration area_calibration(int control, int target) const {
    return calibrate_area(edge(control, target).cr, pi / 2.0);
  }

  // Decoherence rate for a set of qubits: each contributes the mean of its
  // relaxation and dephasing rates. The exponential-decay beta is not pinned
  // by hardware tables, so this is the configured model.
  double beta_for(const std::vector<int>& involved) const {
    double beta = 0.0;
    for (int q : involved) {
      if (q < 0 || q >= int(qubits.size())) throw DomainError("qubit without T1/T2 data");
      beta += 0.5 * (1.0 / qubits[q].t1 + 1.0 / qubits[q].t2);
    }
    return beta;
  }
};

// Gaussian square with explicit edge shape.
inline PulseEnvelope make_gaussian_square(double amplitude, std::int64_t duration, double sigma,
                                          std::int64_t risefall, double phase = 0.0) {
  PulseEnvelope p;
  p.kind = EnvelopeKind::GaussianSquare;
  p.amplitude = amplitude;
  p.phase = phase;
  p.duration = duration;
  p.sigma = sigma;
  p.risefall = risefall;
  p.validate();
  return p;
}

// Three-qubit configuration shaped like the demonstration device: control
// qubits 0 and 2 coupled to the shared target 1, CR references of 400 ns and
// 378 ns (whose serial/parallel schedule ratio lands at 0.514), and
// Table-style T1/T2 values.
inline DeviceConfig belem_like_config() {
  DeviceConfig cfg;
  cfg.dt = 2.0 / 9.0 * 1e-9;
  cfg.a_max = 1.0;
  cfg.sq_gate_duration = 160;  // 35.6 ns at dt = 2/9 ns
  cfg.sq_amp = 0.5;
  cfg.qubits = {{69.3e-6, 38.6e-6}, {78.0e-6, 63.8e-6}, {53.6e-6, 56.5e-6}};
  EdgeCalibration e01;
  e01.cr = make_gaussian_square(0.36, 1800, 64.0, 128);
  e01.comp = make_gaussian_square(0.11, 1800, 64.0, 128, 0.15);
  EdgeCalibration e21;
  e21.cr = make_gaussian_square(0.39, 1702, 64.0, 128);
  e21.comp = make_gaussian_square(0.12, 1702, 64.0, 128, -0.10);
  cfg.edges[{0, 1}] = e01;
  cfg.edges[{2, 1}] = e21;
  cfg.validate();
  return cfg;
}

// --- JSON ---

inline nlohmann::ordered_json device_to_json(const DeviceConfig& cfg) {
  nlohmann::ordered_json j;
  j["dt"] = cfg.dt;
  j["a_max"] = cfg.a_max;
  j["sq_gate_duration"] = cfg.sq_gate_duration;
  j["sq_amp"] = cfg.sq_amp;
  auto qs = nlohmann::ordered_json::array();
  for (const auto& q : cfg.qubits) {
    nlohmann::ordered_json qj;
    qj["t1"] = q.t1;
    qj["t2"] = q.t2;
    qs.push_back(std::move(qj));
  }
  j["qubits"] = std::move(qs);
  auto es = nlohmann::ordered_json::array();
  for (const auto& [edge, cal] : cfg.edges) {
    nlohmann::ordered_json ej;
    ej["control"] = edge.first;
    ej["target"] = edge.second;
    ej["cr"] = envelope_to_json(cal.cr);
    ej["comp"] = envelope_to_json(cal.comp);
    es.push_back(std::move(ej));
  }
  j["edges"] = std::move(es);
  return j;
}

inline DeviceConfig device_from_json(const nlohmann::ordered_json& j) {
  DeviceConfig cfg;
  cfg.dt = j.at("dt").get<double>();
  cfg.a_max = j.at("a_max").get<double>();
  cfg.sq_gate_duration = j.at("sq_gate_duration").get<std::int64_t>();
  cfg.sq_amp = j.value("sq_amp", 0.5);
  for (const auto& qj : j.at("qubits"))
    cfg.qubits.push_back({qj.at("t1").get<double>(), qj.at("t2").get<double>()});
  for (const auto& ej : j.at("edges")) {
    EdgeCalibration cal;
    cal.cr = envelope_from_json(ej.at("cr"));
    cal.comp = envelope_from_json(ej.at("comp"));
    cfg.edges[{ej.at("control").get<int>(), ej.at("target").get<int>()}] = cal;
  }
  cfg.validate();
  return cfg;
}

}  // namespace pulseforge
