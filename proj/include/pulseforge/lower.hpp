#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>
#include <vector>

#include "pulseforge/circuit.hpp"
#include "pulseforge/common.hpp"
#include "pulseforge/compiler.hpp"
#include "pulseforge/device.hpp"
#include "pulseforge/pulse.hpp"

namespace pulseforge {

// How an angle other than pi/2 is realized from the reference pulse. The
// default varies the duration at fixed peak amplitude; the alternative keeps
// the duration and scales the amplitude by theta/(pi/2).
enum class ThetaPolicy { VaryDuration, VaryAmplitude };

// Merged-compensation phase rule. ComplexSum combines tones as complex areas
// (sum of t_i A_i e^{i phi_i}); PaperLiteral applies the scalar formulas
// phi = sum(phi_i A_i t_i)/A with A = sum(A_i t_i)/t, kept as a
// compatibility mode.
enum class MergePhaseRule { ComplexSum, PaperLiteral };

struct LowerOptions {
  ThetaPolicy policy = ThetaPolicy::VaryDuration;
  MergePhaseRule phase_rule = MergePhaseRule::ComplexSum;
};

struct LoweredGate {
  Gate source;
  Schedule fragment;  // instructions all start at sample 0 offsets
  std::int64_t duration = 0;
};

namespace detail {

// Stretch or shrink to an exact sample count, amplitude solved so the pulse
// area is preserved.
inline PulseEnvelope reshape_to_duration(const PulseEnvelope& p, std::int64_t new_duration) {
  if (new_duration == p.duration) return p;
  PulseEnvelope out = p;
  out.duration = new_duration;
  if (p.kind == EnvelopeKind::GaussianSquare && new_duration < 2 * p.risefall)
    throw DomainError("stretched duration shorter than ramps");
  const double target = std::abs(pulse_area(p));
  const double width = effective_width(out);
  if (width <= 0.0) throw DomainError("pulse has no area capacity");
  out.amplitude = target / width;
  if (out.amplitude > 1.0 + 1e-12) throw DomainError("amplitude saturation");
  return out;
}

// Area deficit of a shape relative to a flat top of the same duration, per
// unit amplitude. Constant for durations beyond the ramp floor.
inline double ramp_deficit(const PulseEnvelope& shape) {
  if (shape.kind == EnvelopeKind::Constant) return 0.0;
  PulseEnvelope probe = shape;
  probe.duration = std::max<std::int64_t>(shape.duration, 2 * shape.risefall + 2);
  return double(probe.duration) - effective_width(probe);
}

}  // namespace detail

// Pulse realization of RZX(theta) on a calibrated edge: the CR tone on the
// control channel plus the compensation tone on the target's drive channel,
// both scaled from the pi/2 reference so the implemented angle matches theta
// within one sample's area.
inline LoweredGate lower_rzx(double theta, int control, int target, const DeviceConfig& cfg,
                             const LowerOptions& opt = {}) {
  if (std::abs(theta) > pi / 2.0 + 1e-12) throw DomainError("angle not reduced");
  LoweredGate out;
  out.source = Gate::rzx(theta, control, target);
  out.fragment.dt = cfg.dt;
  if (theta == 0.0) return out;

  const EdgeCalibration& cal = cfg.edge(control, target);
  const double scale = std::abs(theta) / (pi / 2.0);
  const double phase_flip = theta < 0.0 ? pi : 0.0;

  PulseEnvelope cr = cal.cr;
  PulseEnvelope comp = cal.comp;
  if (opt.policy == ThetaPolicy::VaryAmplitude) {
    cr.amplitude *= scale;
    comp.amplitude *= scale;
  } else {
    const double cr_target = std::abs(pulse_area(cal.cr)) * scale;
    const auto dur = duration_for_area(cal.cr, cr_target);
    if (dur) {
      cr.duration = *dur;
    } else {
      // below the ramp floor: keep the bare ramps and scale the amplitude
      cr.duration = cal.cr.kind == EnvelopeKind::Constant ? 1 : 2 * cal.cr.risefall;
      cr.amplitude = cr_target / effective_width(cr);
    }
    comp.duration = cr.duration;
    const double comp_target = std::abs(pulse_area(cal.comp)) * scale;
    const double width = effective_width(comp);
    comp.amplitude = width > 0.0 ? comp_target / width : 0.0;
  }
  cr.phase += phase_flip;
  comp.phase += phase_flip;
  out.fragment.instructions.push_back({0, Channel::control(control, target), cr});
  out.fragment.instructions.push_back({0, Channel::drive(target), comp});
  out.duration = cr.duration;
  return out;
}

// Merge of n simultaneous RZX fragments sharing a target: CR tones co-start
// on their own control channels (stretched to a common duration), and the
// compensation tones collapse into one pulse. When the combined tone would
// exceed a_max, the whole merged gate is stretched until it fits.
inline LoweredGate merge_n(const std::vector<LoweredGate>& fragments, const DeviceConfig& cfg,
                           MergePhaseRule rule = MergePhaseRule::ComplexSum) {
  if (fragments.empty()) throw DomainError("nothing to merge");
  if (fragments.size() == 1) return fragments.front();

  int target = -1;
  std::set<int> controls;
  std::vector<PulseEnvelope> crs, comps;
  std::vector<int> control_of;
  for (const auto& f : fragments) {
    if (f.source.kind != GateKind::RZX) throw DomainError("merge expects rzx fragments");
    const int c = f.source.qubits[0], t = f.source.qubits[1];
    if (target < 0) target = t;
    if (t != target) throw DomainError("no shared qubit");
    if (!controls.insert(c).second) throw DomainError("controls must be distinct");
    const ScheduleInstruction* cr = nullptr;
    const ScheduleInstruction* comp = nullptr;
    for (const auto& inst : f.fragment.instructions) {
      if (inst.channel.kind == Channel::Kind::Control) cr = &inst;
      if (inst.channel.kind == Channel::Kind::Drive) comp = &inst;
    }
    if (!cr || !comp) throw DomainError("fragment is missing its CR or compensation tone");
    crs.push_back(cr->envelope);
    comps.push_back(comp->envelope);
    control_of.push_back(c);
  }

  // combined compensation area, complex (amplitude-samples)
  cplx total_area(0, 0);
  double scalar_area = 0.0;  // paper-style sum of A_i t_i
  double phase_weight = 0.0;
  std::int64_t longest = 0;
  std::size_t longest_idx = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    total_area += pulse_area(comps[i]);
    scalar_area += comps[i].amplitude * double(comps[i].duration);
    phase_weight += comps[i].phase * comps[i].amplitude * double(comps[i].duration);
    if (comps[i].duration > longest) {
      longest = comps[i].duration;
      longest_idx = i;
    }
  }

  PulseEnvelope merged = comps[longest_idx];  // shape donor: sigma, risefall, kind
  std::int64_t t_total = longest;
  if (rule == MergePhaseRule::ComplexSum) {
    // area-exact: solve amplitude so the merged complex area equals the sum
    const double area_mag = std::abs(total_area);
    const double deficit = detail::ramp_deficit(merged);
    merged.duration = longest;
    if (area_mag > cfg.a_max * effective_width(merged) + 1e-9)
      t_total = std::int64_t(std::ceil(area_mag / cfg.a_max + deficit - 1e-9));
    merged.duration = t_total;
    const double width = effective_width(merged);
    merged.amplitude = width > 0.0 ? area_mag / width : 0.0;
    merged.phase = area_mag > 0.0 ? std::arg(total_area) : 0.0;
  } else {
    // the literal flat-top formulas: t = max(S/A_max, max t_i),
    // A = min(A_max, S/t), phi = sum(phi_i A_i t_i) / A
    t_total = std::max<std::int64_t>(
        longest, std::int64_t(std::ceil(scalar_area / cfg.a_max - 1e-9)));
    merged.duration = t_total;
    merged.amplitude = std::min(cfg.a_max, scalar_area / double(t_total));
    merged.phase = merged.amplitude > 0.0 ? phase_weight / merged.amplitude : 0.0;
  }
  if (merged.amplitude > cfg.a_max + 1e-12) throw DomainError("merged amplitude exceeds a_max");

  // CR tones share the merged interval
  LoweredGate out;
  out.fragment.dt = fragments.front().fragment.dt;
  std::vector<double> thetas;
  for (const auto& f : fragments) thetas.push_back(f.source.params[0]);
  out.source = Gate::przx(thetas, std::vector<int>(control_of.begin(), control_of.end()), target);
  for (std::size_t i = 0; i < crs.size(); ++i) {
    const PulseEnvelope stretched = detail::reshape_to_duration(crs[i], t_total);
    if (stretched.amplitude > cfg.a_max + 1e-12)
      throw DomainError("stretched CR amplitude exceeds a_max");
    out.fragment.instructions.push_back({0, Channel::control(control_of[i], target), stretched});
  }
  out.fragment.instructions.push_back({0, Channel::drive(target), merged});
  out.duration = t_total;
  return out;
}

// Two-fragment merge without the stretch escape hatch: a combined tone above
// a_max is an error here (the caller may re-stretch and call merge_n).
inline LoweredGate merge_two(const LoweredGate& a, const LoweredGate& b, const DeviceConfig& cfg,
                             MergePhaseRule rule = MergePhaseRule::ComplexSum) {
  const LoweredGate out = merge_n({a, b}, cfg, rule);
  // merge_n stretches past a_max; merge_two treats that as an error and
  // leaves re-stretching to the caller
  if (out.duration > std::max(a.duration, b.duration))
    throw DomainError("merged amplitude exceeds a_max");
  return out;
}

enum class LowerMode { Serial, Parallel };

struct LoweredCircuit {
  Schedule schedule;
  std::map<int, double> trailing_frames;  // per-qubit virtual RZ owed at the end
  std::int64_t duration = 0;

  double duration_seconds() const { return double(duration) * schedule.dt; }
};

namespace detail {

struct Placement {
  ScheduleInstruction inst;
  bool movable = false;  // single-qubit blocks may shift later (ALAP packing)
  std::vector<int> qubits;
};

class CircuitLowerer {
 public:
  CircuitLowerer(const DeviceConfig& cfg, LowerMode mode, const LowerOptions& opt)
      : cfg_(cfg), mode_(mode), opt_(opt) {}

  LoweredCircuit run(const Circuit& circuit) {
    for (const auto& g : circuit.gates) handle(g);
    // as-late-as-possible packing for single-qubit pulses
    std::int64_t total = 0;
    for (const auto& p : placements_) total = std::max(total, p.inst.end());
    std::map<int, std::int64_t> barrier;
    std::vector<std::size_t> order(placements_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return placements_[x].inst.start > placements_[y].inst.start;
    });
    for (std::size_t idx : order) {
      auto& p = placements_[idx];
      std::int64_t limit = total;
      for (int q : p.qubits) {
        auto it = barrier.find(q);
        if (it != barrier.end()) limit = std::min(limit, it->second);
      }
      if (p.movable && limit - p.inst.envelope.duration > p.inst.start)
        p.inst.start = limit - p.inst.envelope.duration;
      for (int q : p.qubits) {
        auto it = barrier.find(q);
        barrier[q] = it == barrier.end() ? p.inst.start : std::min(it->second, p.inst.start);
      }
    }
    LoweredCircuit out;
    out.schedule.dt = cfg_.dt;
    for (auto& p : placements_) out.schedule.instructions.push_back(p.inst);
    for (const auto& [q, angle] : frames_)
      if (std::abs(angle) > 1e-15) out.trailing_frames[q] = angle;
    out.duration = total;
    return out;
  }

 private:
  std::int64_t ready(int q) const {
    auto it = ready_.find(q);
    return it == ready_.end() ? 0 : it->second;
  }

  void advance(const std::vector<int>& qubits, std::int64_t to) {
    for (int q : qubits) ready_[q] = to;
  }

  void add_frame(int q, double angle) { frames_[q] += angle; }

  void place_fragment(const LoweredGate& lowered, const std::vector<int>& qubits) {
    std::int64_t start = 0;
    for (int q : qubits) start = std::max(start, ready(q));
    for (auto inst : lowered.fragment.instructions) {
      // drive/CR tones act on target-qubit axes; fold the target's frame in
      const int frame_qubit =
          inst.channel.kind == Channel::Kind::Drive ? inst.channel.q0 : inst.channel.q1;
      inst.envelope.phase -= frames_[frame_qubit];
      inst.start += start;
      std::vector<int> involved{inst.channel.q0};
      if (inst.channel.kind == Channel::Kind::Control) involved.push_back(inst.channel.q1);
      placements_.push_back({inst, false, involved});
    }
    advance(qubits, start + lowered.duration);
  }

  void place_drive_block(int q, double area_fraction, double nominal_phase) {
    // a rotation by pi * area_fraction about the (cos, sin) axis
    PulseEnvelope p;
    p.kind = EnvelopeKind::Constant;
    p.duration = cfg_.sq_gate_duration;
    p.amplitude = cfg_.sq_amp * area_fraction;
    p.phase = nominal_phase - frames_[q];
    const std::int64_t start = ready(q);
    placements_.push_back({{start, Channel::drive(q), p}, true, {q}});
    ready_[q] = start + p.duration;
  }

  void handle(const Gate& g) {
    switch (g.kind) {
      case GateKind::Z: add_frame(g.qubits[0], pi); return;
      case GateKind::S: add_frame(g.qubits[0], pi / 2.0); return;
      case GateKind::Sdg: add_frame(g.qubits[0], -pi / 2.0); return;
      case GateKind::RZ: add_frame(g.qubits[0], g.params[0]); return;
      case GateKind::X: place_drive_block(g.qubits[0], 1.0, 0.0); return;
      case GateKind::SqrtX: place_drive_block(g.qubits[0], 0.5, 0.0); return;
      case GateKind::X32: place_drive_block(g.qubits[0], 1.5, 0.0); return;
      case GateKind::H:
        // H = RZ(pi/2) sqrtX RZ(pi/2) up to a global phase
        add_frame(g.qubits[0], pi / 2.0);
        place_drive_block(g.qubits[0], 0.5, 0.0);
        add_frame(g.qubits[0], pi / 2.0);
        return;
      case GateKind::RZX: {
        const LoweredGate lowered =
            lower_rzx(g.params[0], g.qubits[0], g.qubits[1], cfg_, opt_);
        place_fragment(lowered, g.qubits);
        return;
      }
      case GateKind::PRZX: {
        const auto controls = g.przx_controls();
        const int target = g.przx_target();
        if (mode_ == LowerMode::Serial) {
          for (std::size_t i = 0; i < controls.size(); ++i) {
            const LoweredGate lowered =
                lower_rzx(g.params[i], controls[i], target, cfg_, opt_);
            place_fragment(lowered, {controls[i], target});
          }
          return;
        }
        std::vector<LoweredGate> parts;
        for (std::size_t i = 0; i < controls.size(); ++i)
          parts.push_back(lower_rzx(g.params[i], controls[i], target, cfg_, opt_));
        // zero-angle members contribute nothing
        std::vector<LoweredGate> live;
        for (auto& part : parts)
          if (part.duration > 0) live.push_back(std::move(part));
        if (live.empty()) return;
        const LoweredGate merged = merge_n(live, cfg_, opt_.phase_rule);
        place_fragment(merged, g.qubits);
        return;
      }
      case GateKind::CNOT:
        for (const auto& sub : decompose_cnot(g.qubits[0], g.qubits[1], CnotVariant::Simple).gates)
          handle(sub);
        return;
      case GateKind::CZ:
        handle(Gate::h(g.qubits[1]));
        for (const auto& sub : decompose_cnot(g.qubits[0], g.qubits[1], CnotVariant::Simple).gates)
          handle(sub);
        handle(Gate::h(g.qubits[1]));
        return;
    }
    throw DomainError("gate kind cannot be lowered");
  }

  const DeviceConfig& cfg_;
  LowerMode mode_;
  LowerOptions opt_;
  std::map<int, std::int64_t> ready_;
  std::map<int, double> frames_;
  std::vector<Placement> placements_;
};

}  // namespace detail

// Lower a compiled circuit to a pulse schedule. Serial mode plays every gate
// back to back per qubit; Parallel mode realizes PRZX gates as one merged
// pulse block. The result carries the leftover virtual-Z frames.
inline LoweredCircuit lower_circuit(const Circuit& circuit, const DeviceConfig& cfg,
                                    LowerMode mode, const LowerOptions& opt = {}) {
  cfg.validate();
  detail::CircuitLowerer lowerer(cfg, mode, opt);
  LoweredCircuit out = lowerer.run(circuit);
  const auto violations = validate_schedule(out.schedule);
  if (!violations.empty()) throw DomainError("lowered schedule is invalid: " + violations[0].message);
  return out;
}

struct DurationReport {
  double t_serial = 0.0;    // seconds
  double t_parallel = 0.0;  // seconds
  double ratio = 0.0;       // t_parallel / t_serial
};

// Serial and parallel realizations of the same abstract circuit. Each side
// gets its own preparation: the serial one splits parallel groups apart and
// echoes per gate, the parallel one fuses mergeable runs first.
inline DurationReport duration_report(const Circuit& circuit, const DeviceConfig& cfg,
                                      bool echo = false, bool angle_reduce = false,
                                      const LowerOptions& opt = {}) {
  DurationReport rep;
  const Circuit serial = prepare_for_lowering(circuit, false, echo, angle_reduce);
  const Circuit parallel = prepare_for_lowering(circuit, true, echo, angle_reduce);
  rep.t_serial = lower_circuit(serial, cfg, LowerMode::Serial, opt).duration_seconds();
  rep.t_parallel = lower_circuit(parallel, cfg, LowerMode::Parallel, opt).duration_seconds();
  rep.ratio = rep.t_serial > 0.0 ? rep.t_parallel / rep.t_serial : 1.0;
  return rep;
}

}  // namespace pulseforge
