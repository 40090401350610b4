#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseforge/bench.hpp"
#include "pulseforge/channel.hpp"
#include "pulseforge/common.hpp"
#include "pulseforge/layout.hpp"

namespace pulseforge {

// Full-precision, locale-independent float formatting so exports are
// byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open output file '" + path + "'");
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string gain_curve_csv(const std::vector<GainPoint>& points) {
  std::ostringstream out;
  out << "depth,serial,parallel,gain\n";
  for (const auto& p : points)
    out << p.depth << "," << p.serial << "," << p.parallel << "," << p.gain << "\n";
  return out.str();
}

inline std::string cb_result_csv(const CBResult& result) {
  std::ostringstream out;
  out << "channel,p,p_ref,ratio,A,residual\n";
  for (const auto& ch : result.channels)
    out << ch.channel << "," << format_double(ch.p) << "," << format_double(ch.p_ref) << ","
        << format_double(ch.ratio) << "," << format_double(ch.amplitude) << ","
        << format_double(ch.max_log_residual) << "\n";
  return out.str();
}

inline std::string basis_label(int index, int n) {
  std::string s(n, '0');
  for (int q = 0; q < n; ++q)
    if ((index >> (n - 1 - q)) & 1) s[q] = '1';
  return s;
}

// Truth table in long format: input,output,probability.
inline std::string truth_table_csv(const RealMatrix& table, int n) {
  std::ostringstream out;
  out << "input,output,probability\n";
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j)
      out << basis_label(i, n) << "," << basis_label(j, n) << "," << format_double(table(i, j))
          << "\n";
  return out.str();
}

// PTM as a square table with Pauli-string headers.
inline std::string ptm_csv(const RealMatrix& t, int n) {
  std::ostringstream out;
  out << "pauli";
  for (int j = 0; j < t.cols(); ++j) out << "," << pauli_label(j, n);
  out << "\n";
  for (int i = 0; i < t.rows(); ++i) {
    out << pauli_label(i, n);
    for (int j = 0; j < t.cols(); ++j) out << "," << format_double(t(i, j));
    out << "\n";
  }
  return out.str();
}

// Complex matrix as CSV of interleaved real/imag entries, row-major.
inline std::string complex_matrix_csv(const Matrix& m) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ",";
      out << format_double(m(i, j).real()) << "," << format_double(m(i, j).imag());
    }
    out << "\n";
  }
  return out.str();
}

// Reproducibility sidecar written next to every output file.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::string> outputs;
  std::string version = "0.1.0";

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["seed"] = seed;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash;
    j["outputs"] = outputs;
    j["version"] = version;
    return j;
  }

  void write(const std::string& path) const { write_text_file(path, to_json().dump(2) + "\n"); }
};

inline std::uint64_t hash_files(const std::vector<std::string>& paths) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : paths) h = fnv1a(read_text_file(p), h);
  return h;
}

}  // namespace pulseforge
