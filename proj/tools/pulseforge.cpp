// pulseforge - pulse-level compiler and simulator for parallelized RZX gates.
//
// Subcommands
//   compile         lower a circuit to a pulse schedule, report durations
//   verify          simulate serial vs parallel schedules and predict fidelity
//   bench           synthetic Pauli-twirled cycle benchmarking
//   layout          coupling-graph gain analysis
//   export-figdata  CSV bundles for external plotting
//
// Exit codes: 0 success, 1 domain error, 2 input/schema error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pulseforge/pulseforge.hpp"

namespace fs = std::filesystem;
using namespace pulseforge;

namespace {

nlohmann::ordered_json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // report the line of the parse failure
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw SchemaError(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::string device_path_or_env(std::string explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("PULSEFORGE_CONFIG")) return env;
  throw SchemaError("no device config given (pass one or set PULSEFORGE_CONFIG)");
}

std::vector<int> circuit_qubits(const Circuit& c) {
  std::set<int> qs;
  for (const auto& g : c.gates) qs.insert(g.qubits.begin(), g.qubits.end());
  return std::vector<int>(qs.begin(), qs.end());
}

void write_with_manifest(const std::string& path, const std::string& content,
                         RunManifest manifest) {
  write_text_file(path, content);
  manifest.outputs.push_back(path);
  manifest.write(path + ".manifest.json");
}

CouplingGraph parse_layout_spec(const std::string& spec) {
  auto split_dims = [&](const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw SchemaError("expected WxH in layout spec");
    return std::pair<int, int>{std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  };
  if (spec.rfind("lattice:", 0) == 0) {
    auto [w, h] = split_dims(spec.substr(8));
    return lattice_layout(w, h);
  }
  if (spec.rfind("hexagonal:", 0) == 0) return hexagonal_layout(std::stoi(spec.substr(10)));
  if (spec.rfind("heavyhex:", 0) == 0) {
    auto [r, c] = split_dims(spec.substr(9));
    return heavy_hex_eagle_layout(r, c);
  }
  if (spec == "fragment") return heavy_hex_fragment();
  return layout_from_json(parse_json_file(spec));
}

std::vector<int> parse_depths(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

PauliNoiseModel noise_from_json(const nlohmann::ordered_json& j, const std::string& key) {
  PauliNoiseModel m;
  if (!j.contains(key)) return m;
  for (const auto& [label, prob] : j.at(key).items())
    m.probabilities[label] = prob.get<double>();
  return m;
}

int cmd_compile(const std::string& circuit_path, const std::string& device_path,
                const std::string& mode, bool echo, bool angle_reduce, const std::string& out,
                std::uint64_t seed) {
  const DeviceConfig cfg = device_from_json(parse_json_file(device_path));
  const Circuit raw = circuit_from_json(parse_json_file(circuit_path));
  const bool parallel = mode == "parallel";
  const Circuit circuit = prepare_for_lowering(raw, parallel, echo, angle_reduce);

  const auto rep = duration_report(raw, cfg, echo, angle_reduce);
  const auto lowered =
      lower_circuit(circuit, cfg, parallel ? LowerMode::Parallel : LowerMode::Serial);

  std::cout << "t_serial_s=" << format_double(rep.t_serial) << "\n";
  std::cout << "t_parallel_s=" << format_double(rep.t_parallel) << "\n";
  std::cout << "ratio=" << format_double(rep.ratio) << "\n";

  RunManifest manifest;
  manifest.command = "compile";
  manifest.inputs = {circuit_path, device_path};
  manifest.seed = seed;
  manifest.config_hash = hash_files(manifest.inputs);
  write_with_manifest(out, schedule_to_json(lowered.schedule).dump(2) + "\n", manifest);
  return 0;
}

int cmd_verify(const std::string& circuit_path, const std::string& device_path, bool echo,
               bool angle_reduce, double spurious_zz, double spurious_ix, double beta_override,
               const std::string& dump_prefix) {
  const DeviceConfig cfg = device_from_json(parse_json_file(device_path));
  const Circuit raw = circuit_from_json(parse_json_file(circuit_path));
  const auto qubits = circuit_qubits(raw);
  const int n = raw.num_qubits;
  if (n > kMaxSimQubits) throw DomainError("verification is limited to 6 qubits");

  const Matrix ideal = unitary_of_circuit(raw);
  SimModel model = ideal_model(cfg);
  // spurious couplings sit on top of the compensated baseline
  for (auto& [edge, w] : model.edge_params) {
    w.zz += spurious_zz * w.zx;
    w.ix += spurious_ix * w.zx;
  }

  const Circuit serial_circuit = prepare_for_lowering(raw, false, echo, angle_reduce);
  const Circuit parallel_circuit = prepare_for_lowering(raw, true, echo, angle_reduce);
  const auto serial = lower_circuit(serial_circuit, cfg, LowerMode::Serial);
  const auto parallel = lower_circuit(parallel_circuit, cfg, LowerMode::Parallel);

  const Matrix u_serial = simulate_lowered(serial, model, n);
  const Matrix u_parallel = simulate_lowered(parallel, model, n);
  const double f_coh_s = process_fidelity(u_serial, ideal);
  const double f_coh_p = process_fidelity(u_parallel, ideal);
  if (!dump_prefix.empty()) {
    RunManifest manifest;
    manifest.command = "verify";
    manifest.inputs = {circuit_path, device_path};
    manifest.config_hash = hash_files(manifest.inputs);
    write_with_manifest(dump_prefix + "_serial_unitary.csv", complex_matrix_csv(u_serial),
                        manifest);
    write_with_manifest(dump_prefix + "_parallel_unitary.csv", complex_matrix_csv(u_parallel),
                        manifest);
  }

  const double beta = beta_override >= 0.0 ? beta_override : cfg.beta_for(qubits);
  const auto decay = DecoherenceParams::for_qubits(n, beta);
  const double t_s = serial.duration_seconds();
  const double t_p = parallel.duration_seconds();
  const double f_s = f_coh_s * fidelity_decay(t_s, decay);
  const double f_p = f_coh_p * fidelity_decay(t_p, decay);
  const double predicted = predict_parallel_fidelity(f_s, t_p, t_s, decay.f0);

  std::cout << "t_serial_s=" << format_double(t_s) << "\n";
  std::cout << "t_parallel_s=" << format_double(t_p) << "\n";
  std::cout << "F_serial=" << format_double(f_s) << "\n";
  std::cout << "F_parallel=" << format_double(f_p) << "\n";
  std::cout << "F_parallel_predicted=" << format_double(predicted) << "\n";
  return 0;
}

int cmd_bench(const std::string& gate_path, const std::string& noise_path,
              const std::string& cb_path, const std::string& out, std::uint64_t seed,
              std::optional<int> shots_override) {
  const Circuit gate = circuit_from_json(parse_json_file(gate_path));
  const auto noise_json = parse_json_file(noise_path);
  const PauliNoiseModel gate_noise = noise_from_json(noise_json, "gate_noise");
  const PauliNoiseModel twirl_noise = noise_from_json(noise_json, "twirl_noise");

  CBConfig cfg;
  const auto cb_json = parse_json_file(cb_path);
  if (cb_json.contains("depths")) cfg.depths = cb_json.at("depths").get<std::vector<int>>();
  cfg.samples_per_depth = cb_json.value("samples_per_depth", 28);
  cfg.shots = cb_json.value("shots", 0);
  cfg.seed = cb_json.value("seed", std::uint64_t{0});
  if (seed != 0) cfg.seed = seed;
  if (shots_override) cfg.shots = *shots_override;
  cfg.validate();

  const bool interleave = cb_json.value("interleave", true);
  const CBResult result = cycle_benchmark(gate, gate_noise, cfg, interleave, twirl_noise);

  std::cout << "average_p=" << format_double(result.average_p()) << "\n";
  std::cout << "average_ratio=" << format_double(result.average_ratio()) << "\n";

  RunManifest manifest;
  manifest.command = "bench";
  manifest.inputs = {gate_path, noise_path, cb_path};
  manifest.seed = cfg.seed;
  manifest.config_hash = hash_files(manifest.inputs);
  write_with_manifest(out, cb_result_csv(result), manifest);
  return 0;
}

int cmd_layout(const std::string& spec, const std::string& depths_text, const std::string& out,
               int exact_limit) {
  const CouplingGraph graph = parse_layout_spec(spec);
  const auto depths = parse_depths(depths_text);
  const auto curve = gain_curve(graph, depths, exact_limit);
  for (const auto& p : curve)
    std::cout << "depth=" << p.depth << " serial=" << p.serial << " parallel=" << p.parallel
              << " gain=" << p.gain << "\n";
  RunManifest manifest;
  manifest.command = "layout";
  manifest.inputs = {};
  manifest.config_hash = fnv1a(spec + "/" + depths_text);
  write_with_manifest(out, gain_curve_csv(curve), manifest);
  return 0;
}

int cmd_export_figdata(const std::string& which, const std::string& out_dir,
                       const std::string& device_path, std::uint64_t seed) {
  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "export-figdata:" + which;
  manifest.seed = seed;

  Circuit przx(3);
  przx.add(Gate::przx({pi / 2.0, pi / 2.0}, {0, 2}, 1));

  if (which == "fig1") {
    const DeviceConfig cfg = device_from_json(parse_json_file(device_path));
    manifest.inputs = {device_path};
    manifest.config_hash = hash_files(manifest.inputs);
    const auto serial = lower_circuit(przx, cfg, LowerMode::Serial);
    const auto parallel = lower_circuit(przx, cfg, LowerMode::Parallel);
    write_with_manifest(out_dir + "/fig1_serial_schedule.json",
                        schedule_to_json(serial.schedule).dump(2) + "\n", manifest);
    write_with_manifest(out_dir + "/fig1_parallel_schedule.json",
                        schedule_to_json(parallel.schedule).dump(2) + "\n", manifest);
    std::ostringstream csv;
    csv << "variant,duration_s\n";
    csv << "serial," << format_double(serial.duration_seconds()) << "\n";
    csv << "parallel," << format_double(parallel.duration_seconds()) << "\n";
    write_with_manifest(out_dir + "/fig1_durations.csv", csv.str(), manifest);
    return 0;
  }
  if (which == "fig2") {
    manifest.config_hash = fnv1a(which);
    const auto table = truth_table(QuantumChannel::unitary(unitary_of_circuit(przx)));
    write_with_manifest(out_dir + "/fig2_truth_table.csv", truth_table_csv(table, 3), manifest);
    return 0;
  }
  if (which == "fig5") {
    manifest.config_hash = fnv1a(which);
    const struct {
      const char* name;
      const char* spec;
    } layouts[] = {{"lattice", "lattice:9x9"},
                   {"hexagonal", "hexagonal:3"},
                   {"heavyhex", "heavyhex:4x3"}};
    for (const auto& l : layouts) {
      const auto curve = gain_curve(parse_layout_spec(l.spec), {1, 2, 3, 4}, 128);
      write_with_manifest(out_dir + "/fig5_" + std::string(l.name) + ".csv",
                          gain_curve_csv(curve), manifest);
    }
    return 0;
  }
  if (which == "fig7") {
    manifest.config_hash = fnv1a(which);
    // decay-model curve through the measured operating point
    std::ostringstream csv;
    csv << "f_serial,ratio,f_parallel_predicted\n";
    for (double fs : {0.95, 0.96, 0.97, 0.9816, 0.99}) {
      const double fp = predict_parallel_fidelity(fs, 0.514, 1.0, 0.0);
      csv << format_double(fs) << ",0.514," << format_double(fp) << "\n";
    }
    write_with_manifest(out_dir + "/fig7_decay_model.csv", csv.str(), manifest);
    // synthetic cycle benchmark of the parallel gate under depolarizing noise
    CBConfig cfg;
    cfg.seed = seed;
    const auto noise = PauliNoiseModel::depolarizing_with_channel_fidelity(3, 0.9915);
    const auto result = cycle_benchmark(przx, noise, cfg, true);
    write_with_manifest(out_dir + "/fig7_cycle_benchmark.csv", cb_result_csv(result), manifest);
    return 0;
  }
  if (which == "ptm") {
    manifest.config_hash = fnv1a(which);
    const auto ptm = ptm_of_channel(QuantumChannel::unitary(unitary_of_circuit(przx)));
    write_with_manifest(out_dir + "/ptm_przx_half_pi.csv", ptm_csv(ptm.ptm_matrix(), 3),
                        manifest);
    return 0;
  }
  throw SchemaError("unknown figure bundle '" + which + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse-level compiler and simulator for parallelized RZX gates"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for all pseudo-random draws")->capture_default_str();

  // compile
  auto* compile = app.add_subcommand("compile", "lower a circuit to a pulse schedule");
  std::string circuit_path, device_path, mode = "serial", out_path = "schedule.json";
  bool echo = false, angle_reduce = false;
  compile->add_option("circuit", circuit_path, "circuit JSON")->required();
  compile->add_option("device", device_path, "device config JSON (or PULSEFORGE_CONFIG)");
  compile->add_option("--mode", mode, "serial|parallel")
      ->check(CLI::IsMember({"serial", "parallel"}));
  compile->add_flag("--echo", echo, "expand RZX/PRZX gates into echoed form");
  compile->add_flag("--angle-reduce", angle_reduce, "reduce angles into [-pi/2, pi/2]");
  compile->add_option("--out", out_path, "output schedule path")->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "simulate and compare serial vs parallel");
  std::string v_circuit, v_device;
  bool v_echo = false, v_angle = false;
  double spurious_zz = 0.0, spurious_ix = 0.0, beta_override = -1.0;
  verify->add_option("circuit", v_circuit, "circuit JSON")->required();
  verify->add_option("device", v_device, "device config JSON (or PULSEFORGE_CONFIG)");
  verify->add_flag("--echo", v_echo, "expand gates into echoed form");
  verify->add_flag("--angle-reduce", v_angle, "reduce angles first");
  verify->add_option("--spurious-zz", spurious_zz, "ZZ coupling as a fraction of ZX");
  verify->add_option("--spurious-ix", spurious_ix, "IX coupling as a fraction of ZX");
  verify->add_option("--beta", beta_override, "decay rate 1/s (default: from T1/T2)");
  std::string v_dump;
  verify->add_option("--dump-unitaries", v_dump, "prefix for simulated-unitary CSV exports");

  // bench
  auto* bench = app.add_subcommand("bench", "synthetic cycle benchmarking");
  std::string b_gate, b_noise, b_cb, b_out = "cb.csv";
  int shots_flag = -1;
  bench->add_option("gate", b_gate, "gate circuit JSON")->required();
  bench->add_option("noise", b_noise, "noise model JSON")->required();
  bench->add_option("cb", b_cb, "cycle-benchmark config JSON")->required();
  bench->add_option("--out", b_out, "output CSV path")->capture_default_str();
  bench->add_option("--shots", shots_flag, "override shot count (0 = exact expectations)");

  // layout
  auto* layout = app.add_subcommand("layout", "coupling-graph gain analysis");
  std::string l_spec, l_depths = "1..4", l_out = "gain.csv";
  int exact_limit = kExactSearchMaxQubits;
  layout->add_option("spec", l_spec,
                     "lattice:WxH | hexagonal:R | heavyhex:RxC | fragment | layout.json")
      ->required();
  layout->add_option("--depths", l_depths, "depths, e.g. 1..4 or 2,3")->capture_default_str();
  layout->add_option("--out", l_out, "output CSV path")->capture_default_str();
  layout->add_option("--exact-limit", exact_limit, "largest graph searched exactly")
      ->capture_default_str();

  // export-figdata
  auto* figdata = app.add_subcommand("export-figdata", "CSV bundles for plotting");
  std::string f_which, f_out = "figdata", f_device;
  figdata->add_option("which", f_which, "fig1|fig2|fig5|fig7|ptm")->required();
  figdata->add_option("--out", f_out, "output directory")->capture_default_str();
  figdata->add_option("--device", f_device, "device config (fig1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed())
      return cmd_compile(circuit_path, device_path_or_env(device_path), mode, echo, angle_reduce,
                         out_path, seed);
    if (verify->parsed())
      return cmd_verify(v_circuit, device_path_or_env(v_device), v_echo, v_angle, spurious_zz,
                        spurious_ix, beta_override, v_dump);
    if (bench->parsed())
      return cmd_bench(b_gate, b_noise, b_cb, b_out, seed,
                       shots_flag >= 0 ? std::optional<int>(shots_flag) : std::nullopt);
    if (layout->parsed()) return cmd_layout(l_spec, l_depths, l_out, exact_limit);
    if (figdata->parsed())
      return cmd_export_figdata(f_which, f_out, f_device.empty() ? std::string() : f_device,
                                seed);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
