// End-to-end checks of the pulseforge binary: exit codes, output files,
// manifests, and byte-level determinism. Usage:
//   test_cli <path-to-binary> <path-to-configs>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pulseforge/noise.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "ok" : "FAIL") << " - " << what << "\n";
  if (!ok) ++failures;
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& cmd) {
  RunResult r;
  const std::string out = (fs::temp_directory_path() / "pf_cli_stdout.txt").string();
  const std::string err = (fs::temp_directory_path() / "pf_cli_stderr.txt").string();
  const int status = std::system((cmd + " >" + out + " 2>" + err).c_str());
  r.exit_code = WEXITSTATUS(status);
  r.stdout_text = slurp(out);
  r.stderr_text = slurp(err);
  return r;
}

double parse_kv(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) throw std::runtime_error("missing key " + key);
  return std::stod(text.substr(pos + key.size() + 1));
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: test_cli <binary> <configs-dir>\n";
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path configs = argv[2];
  const fs::path work = fs::temp_directory_path() / "pf_cli_work";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string device = (configs / "belem_like.json").string();
  const std::string demo = (configs / "demo_two_rzx.json").string();

  // --- compile ---
  {
    const std::string sched = (work / "sched.json").string();
    const auto r = run(bin + " compile " + demo + " " + device + " --mode parallel --out " + sched);
    check(r.exit_code == 0, "compile exits 0");
    check(parse_kv(r.stdout_text, "ratio") <= 0.52, "two-gate demo ratio is at most 0.52");
    check(parse_kv(r.stdout_text, "ratio") > 0.5, "demo ratio reflects the unequal edges");
    check(fs::exists(sched), "schedule written");
    check(fs::exists(sched + ".manifest.json"), "manifest written next to the schedule");

    const std::string first = slurp(sched);
    run(bin + " compile " + demo + " " + device + " --mode parallel --out " + sched);
    check(slurp(sched) == first, "recompilation is byte-identical");
  }

  // --- compile: single gate has ratio 1 ---
  {
    const std::string single = (work / "single.json").string();
    std::ofstream(single) << R"({"num_qubits":3,"gates":[{"kind":"rzx","qubits":[0,1],)"
                          << R"("params":[1.5707963267948966]}]})";
    const auto r = run(bin + " compile " + single + " " + device + " --out " +
                       (work / "s1.json").string());
    check(r.exit_code == 0, "single-gate compile exits 0");
    check(std::abs(parse_kv(r.stdout_text, "ratio") - 1.0) < 1e-12, "single gate ratio is 1");
  }

  // --- schema errors ---
  {
    const std::string broken = (work / "broken.json").string();
    std::ofstream(broken) << "{\n  \"num_qubits\": 3,\n  gates: []\n}";
    const auto r = run(bin + " compile " + broken + " " + device);
    check(r.exit_code == 2, "malformed json exits 2");
    check(r.stderr_text.find(":3:") != std::string::npos, "parse error names the line");
  }
  {
    const auto r = run(bin + " compile " + (work / "absent.json").string() + " " + device);
    check(r.exit_code == 2, "missing input exits 2");
  }

  // --- domain errors ---
  {
    const std::string bad = (work / "badedge.json").string();
    std::ofstream(bad) << R"({"num_qubits":3,"gates":[{"kind":"rzx","qubits":[1,2],)"
                       << R"("params":[0.5]}]})";
    const auto r = run(bin + " compile " + bad + " " + device);
    check(r.exit_code == 1, "uncalibrated edge exits 1");
  }

  // --- verify ---
  {
    const auto r = run(bin + " verify " + demo + " " + device);
    check(r.exit_code == 0, "verify exits 0");
    const double fs = parse_kv(r.stdout_text, "F_serial");
    const double fp = parse_kv(r.stdout_text, "F_parallel");
    const double fpred = parse_kv(r.stdout_text, "F_parallel_predicted");
    const double ts = parse_kv(r.stdout_text, "t_serial_s");
    const double tp = parse_kv(r.stdout_text, "t_parallel_s");
    check(fp > fs, "parallel fidelity beats serial under decay");
    const double expect = pulseforge::predict_parallel_fidelity(fs, tp, ts, 0.125);
    check(std::abs(fpred - expect) < 1e-9, "prediction column matches the model");
  }
  {
    const auto r = run(bin + " verify " + demo + " " + device + " --beta 0");
    check(parse_kv(r.stdout_text, "F_serial") > 1.0 - 1e-9, "ideal couplings give fidelity 1");
  }
  {
    const std::string prefix = (work / "sim").string();
    run(bin + " verify " + demo + " " + device + " --dump-unitaries " + prefix);
    const std::string csv = slurp(prefix + "_parallel_unitary.csv");
    check(count_lines(csv) == 8, "unitary export has one row per basis state");
    const std::string row = csv.substr(0, csv.find('\n'));
    check(std::count(row.begin(), row.end(), ',') == 15,
          "unitary export interleaves real and imaginary parts");
  }

  // --- bench ---
  {
    const std::string csv = (work / "cb.csv").string();
    const auto r = run(bin + " bench " + (configs / "gate_przx_half_pi.json").string() + " " +
                       (configs / "noise_depolarizing.json").string() + " " +
                       (configs / "cb_default.json").string() + " --out " + csv);
    check(r.exit_code == 0, "bench exits 0");
    check(std::abs(parse_kv(r.stdout_text, "average_ratio") - 0.99) < 1e-6,
          "depolarizing bench recovers the channel fidelity");
    check(count_lines(slurp(csv)) == 64, "cb csv has 63 channels plus header");
    const std::string first = slurp(csv);
    run(bin + " bench " + (configs / "gate_przx_half_pi.json").string() + " " +
        (configs / "noise_depolarizing.json").string() + " " +
        (configs / "cb_default.json").string() + " --out " + csv);
    check(slurp(csv) == first, "bench rerun is byte-identical");
  }

  // --- layout ---
  {
    const std::string csv = (work / "gain.csv").string();
    const auto r = run(bin + " layout fragment --depths 3 --out " + csv);
    check(r.exit_code == 0, "layout exits 0");
    check(slurp(csv) == "depth,serial,parallel,gain\n3,7,13,6\n",
          "fragment depth-3 gain curve");
  }

  // --- export-figdata ---
  {
    const std::string dir = (work / "figdata").string();
    check(run(bin + " export-figdata fig2 --out " + dir).exit_code == 0, "fig2 exports");
    check(count_lines(slurp(dir + "/fig2_truth_table.csv")) == 65,
          "fig2 bundle holds all 64 table entries");
    check(run(bin + " export-figdata ptm --out " + dir).exit_code == 0, "ptm exports");
    {
      const std::string ptm = slurp(dir + "/ptm_przx_half_pi.csv");
      check(count_lines(ptm) == 65, "ptm bundle is 64 rows plus header");
      const std::string header = ptm.substr(0, ptm.find('\n'));
      check(std::count(header.begin(), header.end(), ',') == 64, "ptm header lists 64 strings");
    }
    check(run(bin + " export-figdata fig5 --out " + dir).exit_code == 0, "fig5 exports");
    const std::string gain = (work / "hh.csv").string();
    run(bin + " layout heavyhex:4x3 --depths 1..4 --exact-limit 128 --out " + gain);
    check(slurp(gain) == slurp(dir + "/fig5_heavyhex.csv"),
          "fig5 heavy-hex bundle matches the layout command byte-for-byte");
    check(run(bin + " export-figdata fig1 --out " + dir + " --device " + device).exit_code == 0,
          "fig1 exports");
    check(run(bin + " export-figdata fig7 --out " + dir).exit_code == 0, "fig7 exports");
    check(run(bin + " export-figdata nope --out " + dir).exit_code == 2,
          "unknown bundle exits 2");
  }

  // --- PULSEFORGE_CONFIG fallback ---
  {
    const auto r = run("PULSEFORGE_CONFIG=" + device + " " + bin + " verify " + demo +
                       " --beta 0");
    check(r.exit_code == 0, "device config comes from the environment when omitted");
  }

  std::cout << (failures == 0 ? "all cli checks passed\n" : "cli checks FAILED\n");
  return failures == 0 ? 0 : 1;
}
