#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "pulseforge/compiler.hpp"
#include "pulseforge/cr_sim.hpp"
#include "pulseforge/device.hpp"
#include "pulseforge/lower.hpp"

using namespace pulseforge;

namespace {

DeviceConfig test_config() {
  DeviceConfig cfg;
  cfg.dt = 2.0 / 9.0 * 1e-9;
  cfg.a_max = 1.0;
  cfg.sq_gate_duration = 160;
  cfg.sq_amp = 0.5;
  cfg.qubits = {{70e-6, 50e-6}, {80e-6, 60e-6}, {55e-6, 55e-6}};
  EdgeCalibration e;
  e.cr = default_gaussian_square(0.4, 1440);
  e.comp.kind = EnvelopeKind::GaussianSquare;
  e.comp = e.cr;
  e.comp.amplitude = 0.0;  // pure-ZX test setup needs no compensation
  cfg.edges[{0, 1}] = e;
  cfg.edges[{2, 1}] = e;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("cr hamiltonian assembly") {
  SECTION("zero drive gives the zero matrix") {
    CRHamiltonianParams w;
    w.zx = 2.0e6;
    CHECK(cr_hamiltonian(w, 0.0, 0.0).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("pure ZX at unit drive is Z x X / 2") {
    CRHamiltonianParams w;
    w.zx = 1.0;
    const auto h = cr_hamiltonian(w, 1.0, 0.0);
    const oracle::Matrix expected = 0.5 * oracle::kron(oracle::Z(), oracle::X());
    CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("full coupling vector assembles term by term") {
    CRHamiltonianParams w{0.3, 1.0, -0.2, 0.15, 0.05, -0.07, 0.01};
    const auto h = cr_hamiltonian(w, 0.8, 0.0);
    oracle::Matrix expected =
        0.3 * oracle::kron(oracle::Z(), oracle::eye(2)) +
        1.0 * oracle::kron(oracle::Z(), oracle::X()) +
        -0.2 * oracle::kron(oracle::Z(), oracle::Y()) +
        0.15 * oracle::kron(oracle::Z(), oracle::Z()) +
        0.05 * oracle::kron(oracle::eye(2), oracle::X()) +
        -0.07 * oracle::kron(oracle::eye(2), oracle::Y()) +
        0.01 * oracle::kron(oracle::eye(2), oracle::Z());
    expected *= 0.8 * 0.5;
    CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("a pi drive phase flips the X coupling") {
    CRHamiltonianParams w;
    w.zx = 1.0;
    const auto h = cr_hamiltonian(w, 1.0, pi);
    const oracle::Matrix expected = -0.5 * oracle::kron(oracle::Z(), oracle::X());
    CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("schedule simulation reproduces ideal gates") {
  const auto cfg = test_config();
  const auto model = ideal_model(cfg);

  SECTION("empty schedule is the identity") {
    Schedule s;
    s.dt = cfg.dt;
    CHECK((simulate_schedule(s, model, 2) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SECTION("lowered rzx(pi/2) matches the closed form") {
    const auto lowered = lower_rzx(pi / 2.0, 0, 1, cfg);
    const Matrix u = simulate_schedule(lowered.fragment, model, 2);
    CHECK(process_fidelity(u, rzx_matrix(pi / 2.0)) >= 1.0 - 1e-6);
  }
  SECTION("other angles track the calibration within a sample") {
    for (double theta : {pi / 4.0, -pi / 3.0, 0.4}) {
      const auto lowered = lower_rzx(theta, 0, 1, cfg);
      const Matrix u = simulate_schedule(lowered.fragment, model, 2);
      CHECK(process_fidelity(u, rzx_matrix(theta)) >= 1.0 - 1e-5);
    }
  }
  SECTION("merged przx matches the ideal three-qubit gate") {
    Circuit c(3);
    c.add(Gate::przx({pi / 2.0, pi / 2.0}, {0, 2}, 1));
    const auto lowered = lower_circuit(c, cfg, LowerMode::Parallel);
    const Matrix u = simulate_lowered(lowered, model, 3);
    const Matrix ideal = unitary_of_circuit(c);
    CHECK(process_fidelity(u, ideal) >= 1.0 - 1e-6);
  }
  SECTION("serial and parallel lowerings agree with each other") {
    Circuit c(3);
    c.add(Gate::przx({pi / 2.0, pi / 3.0}, {0, 2}, 1));
    const auto serial = lower_circuit(c, cfg, LowerMode::Serial);
    const auto parallel = lower_circuit(c, cfg, LowerMode::Parallel);
    const Matrix us = simulate_lowered(serial, model, 3);
    const Matrix up = simulate_lowered(parallel, model, 3);
    CHECK(process_fidelity(us, up) >= 1.0 - 1e-6);
  }
  SECTION("propagation stays unitary") {
    Circuit c(3);
    c.add(Gate::przx({0.7, -0.5}, {0, 2}, 1));
    const auto lowered = lower_circuit(expand_echo(c), cfg, LowerMode::Parallel);
    const Matrix u = simulate_schedule(lowered.schedule, model, 3);
    CHECK(is_unitary(u, 1e-8));
  }
  SECTION("channels without parameters are rejected") {
    Schedule s;
    s.dt = cfg.dt;
    PulseEnvelope p;
    p.kind = EnvelopeKind::Constant;
    p.amplitude = 0.1;
    p.duration = 10;
    s.instructions.push_back({0, Channel::control(1, 0), p});  // reversed edge, uncalibrated
    CHECK_THROWS_AS(simulate_schedule(s, model, 2), DomainError);
  }
}

TEST_CASE("single-qubit pulses and virtual frames") {
  const auto cfg = test_config();
  const auto model = ideal_model(cfg);

  SECTION("an X block implements X up to phase") {
    Circuit c(1);
    c.add(Gate::x(0));
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 1);
    CHECK(process_fidelity(u, pauli_x()) >= 1.0 - 1e-9);
  }
  SECTION("sqrt-x and its inverse cancel") {
    Circuit c(1);
    c.add(Gate::sqrtx(0));
    c.add(Gate::x32(0));
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 1);
    CHECK(process_fidelity(u, Matrix::Identity(2, 2)) >= 1.0 - 1e-9);
  }
  SECTION("hadamard from frames and one sqrt-x block") {
    Circuit c(1);
    c.add(Gate::h(0));
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 1);
    CHECK(process_fidelity(u, unitary_of_gate(Gate::h(0))) >= 1.0 - 1e-9);
  }
  SECTION("virtual z frames commute through drive pulses correctly") {
    Circuit c(1);
    c.add(Gate::s(0));
    c.add(Gate::x(0));
    c.add(Gate::sdg(0));
    c.add(Gate::sqrtx(0));
    c.add(Gate::z(0));
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 1);
    CHECK(process_fidelity(u, unitary_of_circuit(c)) >= 1.0 - 1e-9);
  }
  SECTION("a decomposed cnot survives the full pulse round trip") {
    const Circuit c = decompose_cnot(0, 1, CnotVariant::Simple);
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 2);
    CHECK(process_fidelity(u, unitary_of_gate(Gate::cnot(0, 1))) >= 1.0 - 1e-5);
  }
  SECTION("echoed rzx under ideal couplings still matches") {
    const Circuit c = echo_rzx(pi / 2.0, 0, 1);
    const auto lowered = lower_circuit(c, cfg, LowerMode::Serial);
    const Matrix u = simulate_lowered(lowered, model, 2);
    CHECK(process_fidelity(u, rzx_matrix(pi / 2.0)) >= 1.0 - 1e-5);
  }
}

TEST_CASE("echo suppresses spurious couplings") {
  const auto cfg = test_config();
  SimModel model = ideal_model(cfg);
  auto& w = model.edge_params.at({0, 1});
  w.zz = 0.05 * w.zx;
  w.ix = 0.05 * w.zx;
  model.edge_params.at({2, 1}) = w;

  Circuit plain(2);
  plain.add(Gate::rzx(pi / 2.0, 0, 1));
  const Circuit echoed = expand_echo(plain);

  const Matrix ideal = rzx_matrix(pi / 2.0);
  const Matrix u_plain =
      simulate_lowered(lower_circuit(plain, cfg, LowerMode::Serial), model, 2);
  const Matrix u_echo =
      simulate_lowered(lower_circuit(echoed, cfg, LowerMode::Serial), model, 2);
  const double f_plain = process_fidelity(u_plain, ideal);
  const double f_echo = process_fidelity(u_echo, ideal);
  CHECK(f_echo > f_plain);
  CHECK(f_echo > 0.99);
}
