#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseforge/common.hpp"

namespace pulseforge {

using ordered_json = nlohmann::ordered_json;

enum class EnvelopeKind { GaussianSquare, Constant };

// A flat-top pulse with Gaussian rise/fall edges, on an integer sample grid.
// The Gaussian edges use the lifted convention: the raw Gaussian is shifted
// and rescaled so the envelope is exactly 0 at samples 0 and duration-1 and
// exactly `amplitude` on the plateau.
struct PulseEnvelope {
  double amplitude = 0.0;  // fraction of full drive, in [0, 1]
  double phase = 0.0;      // radians
  std::int64_t duration = 0;  // samples
  double sigma = 1.0;         // samples
  std::int64_t risefall = 0;  // samples per edge
  EnvelopeKind kind = EnvelopeKind::GaussianSquare;

  void validate() const {
    if (duration < 0) throw SchemaError("envelope duration must be non-negative");
    if (amplitude < 0.0 || amplitude > 1.0 + 1e-12)
      throw SchemaError("envelope amplitude must lie in [0, 1]");
    if (kind == EnvelopeKind::GaussianSquare) {
      if (sigma <= 0.0) throw SchemaError("envelope sigma must be positive");
      if (risefall < 0) throw SchemaError("envelope risefall must be non-negative");
      if (duration < 2 * risefall)
        throw SchemaError("envelope duration must cover both ramps (duration >= 2*risefall)");
    }
  }

  // Envelope value at integer sample t, without the phase factor.
  double value_at(std::int64_t t) const {
    if (t < 0 || t >= duration) return 0.0;
    if (kind == EnvelopeKind::Constant) return amplitude;
    if (risefall == 0) return amplitude;
    const double g0 = std::exp(-0.5 * double(risefall) * double(risefall) / (sigma * sigma));
    auto lifted = [&](double x) {
      // x = samples away from the plateau edge, x in [0, risefall]
      const double g = std::exp(-0.5 * x * x / (sigma * sigma));
      return (g - g0) / (1.0 - g0);
    };
    double rise = t < risefall ? lifted(double(risefall - t)) : 1.0;
    double fall = t > duration - 1 - risefall ? lifted(double(t - (duration - 1 - risefall))) : 1.0;
    return amplitude * std::min(rise, fall);
  }
};

// Sum of the envelope over all samples, per unit amplitude. Depends only on
// the shape (kind, duration, sigma, risefall).
inline double effective_width(const PulseEnvelope& p) {
  if (p.duration == 0) return 0.0;
  if (p.kind == EnvelopeKind::Constant) return double(p.duration);
  if (p.amplitude == 0.0) {
    PulseEnvelope unit = p;
    unit.amplitude = 1.0;
    return effective_width(unit);
  }
  double sum = 0.0;
  for (std::int64_t t = 0; t < p.duration; ++t) sum += p.value_at(t);
  return sum / p.amplitude;
}

// Complex pulse area: e^{i phase} * sum_t envelope(t), in amplitude*samples.
inline cplx pulse_area(const PulseEnvelope& p) {
  double sum = 0.0;
  for (std::int64_t t = 0; t < p.duration; ++t) sum += p.value_at(t);
  return std::polar(1.0, p.phase) * sum;
}

struct AreaCalibration {
  double k = 0.0;  // radians per (amplitude * sample)

  void validate() const {
    if (!(k > 0.0)) throw DomainError("area calibration constant must be positive");
  }
};

// Angle implemented by a pulse: theta = k * |area|, signed by the real part
// of the phased area, so a phase-pi pulse implements -theta.
inline double theta_of_pulse(const PulseEnvelope& p, const AreaCalibration& cal) {
  cal.validate();
  const cplx area = pulse_area(p);
  if (std::abs(area) == 0.0) return 0.0;
  return cal.k * std::abs(area) * sign_of(area.real());
}

inline AreaCalibration calibrate_area(const PulseEnvelope& reference, double theta_ref) {
  const double area = std::abs(pulse_area(reference));
  if (area <= 0.0) throw DomainError("degenerate calibration pulse");
  AreaCalibration cal{theta_ref / area};
  cal.validate();
  return cal;
}

// Smallest-duration shape change that makes |pulse_area| == target_area while
// keeping amplitude, sigma and risefall fixed. Returns nullopt if even the
// bare ramps carry more area than requested.
inline std::optional<std::int64_t> duration_for_area(const PulseEnvelope& shape,
                                                     double target_area) {
  if (shape.amplitude <= 0.0) return std::nullopt;
  PulseEnvelope probe = shape;
  const std::int64_t dmin = shape.kind == EnvelopeKind::Constant ? 1 : 2 * shape.risefall;
  probe.duration = dmin;
  const double base = probe.amplitude * effective_width(probe);
  if (target_area < base - probe.amplitude * 0.5) return std::nullopt;
  std::int64_t guess = dmin + std::llround(std::max(0.0, (target_area - base) / probe.amplitude));
  // effective width grows by one sample per added sample on the plateau;
  // scan the neighborhood to absorb edge effects near dmin.
  std::int64_t best = guess;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::int64_t d = std::max(dmin, guess - 2); d <= guess + 2; ++d) {
    probe.duration = d;
    const double err = std::abs(probe.amplitude * effective_width(probe) - target_area);
    if (err < best_err) {
      best_err = err;
      best = d;
    }
  }
  return best;
}

// Scale duration by `factor` (rounded to the sample grid), rescaling the
// amplitude so |pulse_area| is preserved.
inline PulseEnvelope stretch_pulse(const PulseEnvelope& p, double factor) {
  if (!(factor > 0.0)) throw DomainError("stretch factor must be positive");
  p.validate();
  PulseEnvelope out = p;
  out.duration = std::llround(double(p.duration) * factor);
  if (p.kind == EnvelopeKind::GaussianSquare && out.duration < 2 * p.risefall)
    throw DomainError("stretched duration shorter than ramps");
  if (out.duration <= 0) throw DomainError("stretched duration is zero");
  const double target = std::abs(pulse_area(p));
  if (target == 0.0) return out;
  const double width = effective_width(out);
  if (width <= 0.0) throw DomainError("stretched pulse has no area capacity");
  out.amplitude = target / width;
  if (out.amplitude > 1.0 + 1e-12) throw DomainError("amplitude saturation");
  return out;
}

struct Channel {
  enum class Kind { Drive, Control };
  Kind kind = Kind::Drive;
  int q0 = 0;  // drive qubit, or control qubit of a CR tone
  int q1 = 0;  // target qubit of a CR tone (Control only)

  static Channel drive(int qubit) { return Channel{Kind::Drive, qubit, qubit}; }
  static Channel control(int control_qubit, int target_qubit) {
    if (control_qubit == target_qubit)
      throw SchemaError("control channel endpoints must be distinct qubits");
    return Channel{Kind::Control, control_qubit, target_qubit};
  }

  bool operator==(const Channel& o) const {
    return kind == o.kind && q0 == o.q0 && (kind == Kind::Drive || q1 == o.q1);
  }
  bool operator<(const Channel& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (q0 != o.q0) return q0 < o.q0;
    return kind == Kind::Control && q1 < o.q1;
  }

  std::string str() const {
    std::ostringstream os;
    if (kind == Kind::Drive)
      os << "d" << q0;
    else
      os << "u" << q0 << "_" << q1;
    return os.str();
  }
};

struct ScheduleInstruction {
  std::int64_t start = 0;  // sample index
  Channel channel;
  PulseEnvelope envelope;

  std::int64_t end() const { return start + envelope.duration; }
};

struct Schedule {
  double dt = 2.0 / 9.0 * 1e-9;  // seconds per sample
  std::vector<ScheduleInstruction> instructions;

  std::int64_t duration_samples() const {
    std::int64_t end = 0;
    for (const auto& inst : instructions) end = std::max(end, inst.end());
    return end;
  }
  double duration_seconds() const { return double(duration_samples()) * dt; }

  void append(const Schedule& other, std::int64_t offset) {
    for (auto inst : other.instructions) {
      inst.start += offset;
      instructions.push_back(inst);
    }
  }
};

struct ScheduleViolation {
  Channel channel;
  std::int64_t sample = 0;
  std::string message;
};

// Reports every channel overlap and negative start. Order-independent: the
// violation set depends only on the instruction multiset.
inline std::vector<ScheduleViolation> validate_schedule(const Schedule& s) {
  std::vector<ScheduleViolation> out;
  for (const auto& inst : s.instructions) {
    if (inst.start < 0)
      out.push_back({inst.channel, inst.start, "instruction starts before sample 0"});
  }
  // Group by channel, then sweep for interval overlaps.
  std::vector<const ScheduleInstruction*> sorted;
  sorted.reserve(s.instructions.size());
  for (const auto& inst : s.instructions) sorted.push_back(&inst);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (!(a->channel == b->channel)) return a->channel < b->channel;
    return a->start < b->start;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto* prev = sorted[i - 1];
    const auto* cur = sorted[i];
    if (prev->channel == cur->channel && cur->start < prev->end() &&
        prev->envelope.duration > 0 && cur->envelope.duration > 0) {
      out.push_back({cur->channel, cur->start, "channel overlap"});
    }
  }
  return out;
}

inline bool schedule_ok(const Schedule& s) { return validate_schedule(s).empty(); }

// --- JSON (schema: dt, instructions[{start, channel{kind,qubits}, envelope}]) ---

inline ordered_json envelope_to_json(const PulseEnvelope& p) {
  ordered_json j;
  j["kind"] = p.kind == EnvelopeKind::GaussianSquare ? "gaussian_square" : "constant";
  j["amplitude"] = p.amplitude;
  j["phase"] = p.phase;
  j["duration"] = p.duration;
  j["sigma"] = p.sigma;
  j["risefall"] = p.risefall;
  return j;
}

inline PulseEnvelope envelope_from_json(const ordered_json& j) {
  PulseEnvelope p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian_square")
    p.kind = EnvelopeKind::GaussianSquare;
  else if (kind == "constant")
    p.kind = EnvelopeKind::Constant;
  else
    throw SchemaError("unknown envelope kind '" + kind + "'");
  p.amplitude = j.at("amplitude").get<double>();
  p.phase = j.at("phase").get<double>();
  p.duration = j.at("duration").get<std::int64_t>();
  p.sigma = j.value("sigma", 1.0);
  p.risefall = j.value("risefall", std::int64_t{0});
  p.validate();
  return p;
}

inline ordered_json channel_to_json(const Channel& c) {
  ordered_json j;
  j["kind"] = c.kind == Channel::Kind::Drive ? "drive" : "control";
  j["qubits"] = c.kind == Channel::Kind::Drive ? ordered_json::array({c.q0})
                                               : ordered_json::array({c.q0, c.q1});
  return j;
}

inline Channel channel_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& qs = j.at("qubits");
  if (kind == "drive") {
    if (qs.size() != 1) throw SchemaError("drive channel takes exactly one qubit");
    return Channel::drive(qs[0].get<int>());
  }
  if (kind == "control") {
    if (qs.size() != 2) throw SchemaError("control channel takes exactly two qubits");
    return Channel::control(qs[0].get<int>(), qs[1].get<int>());
  }
  throw SchemaError("unknown channel kind '" + kind + "'");
}

inline ordered_json schedule_to_json(const Schedule& s) {
  ordered_json j;
  j["dt"] = s.dt;
  auto arr = ordered_json::array();
  for (const auto& inst : s.instructions) {
    ordered_json ij;
    ij["start"] = inst.start;
    ij["channel"] = channel_to_json(inst.channel);
    ij["envelope"] = envelope_to_json(inst.envelope);
    arr.push_back(std::move(ij));
  }
  j["instructions"] = std::move(arr);
  return j;
}

inline Schedule schedule_from_json(const ordered_json& j) {
  Schedule s;
  s.dt = j.at("dt").get<double>();
  for (const auto& ij : j.at("instructions")) {
    ScheduleInstruction inst;
    inst.start = ij.at("start").get<std::int64_t>();
    inst.channel = channel_from_json(ij.at("channel"));
    inst.envelope = envelope_from_json(ij.at("envelope"));
    s.instructions.push_back(std::move(inst));
  }
  return s;
}

}  // namespace pulseforge
