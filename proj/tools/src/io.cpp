/* Copyright 2026 The spectral_clt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spectral_clt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spectral_clt::io {

namespace {

std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

std::string at(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& require(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(at(ptr, key), "required field is missing");
  return *it;
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  return v;
}

long long integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return j.get<long long>();
}

int int_field(const json& j, const std::string& ptr) {
  const long long v = integer(j, ptr);
  if (v < 0 || v > 100000000) throw ConfigError(ptr, "integer out of range");
  return static_cast<int>(v);
}

std::string string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array");
  return j;
}

bool boolean(const json& j, const std::string& ptr) {
  if (!j.is_boolean()) throw ConfigError(ptr, "expected true or false");
  return j.get<bool>();
}

Eigen::MatrixXd matrix_rows(const json& j, const std::string& ptr, int cols) {
  array(j, ptr);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = at(ptr, r);
    array(j[r], rp);
    if (static_cast<int>(j[r].size()) != cols)
      throw ConfigError(rp, "row must have " + std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) m(r, c) = number(j[r][c], at(rp, c));
  }
  return m;
}

json pairs_to_json(const std::vector<std::pair<double, double>>& v) {
  json out = json::array();
  for (const auto& [a, b] : v) out.push_back({a, b});
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  std::string t = s.substr(b, e - b + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

} // namespace

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

std::string canonical(const json& j) { return j.dump(); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto r = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, r.ptr);
  return std::string(16 - s.size(), '0') + s;
}

SpikedPopulation model_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  const int p = int_field(require(j, "p", ptr), at(ptr, "p"));
  const int n = int_field(require(j, "n", ptr), at(ptr, "n"));

  std::vector<Spike> spikes;
  if (j.contains("spikes")) {
    const std::string sp = at(ptr, "spikes");
    const json& arr = array(j["spikes"], sp);
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string kp = at(sp, k);
      const double alpha = number(require(arr[k], "alpha", kp), at(kp, "alpha"));
      int d = 1;
      if (arr[k].contains("multiplicity"))
        d = int_field(arr[k]["multiplicity"], at(kp, "multiplicity"));
      spikes.push_back({alpha, d});
    }
  }

  std::vector<SpectralDistribution::Atom> atoms{{1.0, 1.0}};
  if (j.contains("bulk")) {
    const std::string bp = at(ptr, "bulk");
    const json& arr = array(j["bulk"], bp);
    if (arr.empty()) throw ConfigError(bp, "bulk needs at least one atom");
    atoms.clear();
    for (std::size_t a = 0; a < arr.size(); ++a) {
      const std::string ap = at(bp, a);
      atoms.push_back({number(require(arr[a], "value", ap), at(ap, "value")),
                       number(require(arr[a], "weight", ap), at(ap, "weight"))});
    }
  }

  int M = 0;
  for (const auto& s : spikes) M += s.multiplicity;
  std::optional<Eigen::MatrixXcd> u1;
  if (j.contains("u1")) {
    Eigen::MatrixXcd u = matrix_rows(j["u1"], at(ptr, "u1"), M).cast<cplx>();
    if (u.rows() != p) throw ConfigError(at(ptr, "u1"), "needs p rows");
    if (j.contains("u1_imag")) {
      const Eigen::MatrixXd im = matrix_rows(j["u1_imag"], at(ptr, "u1_imag"), M);
      if (im.rows() != p) throw ConfigError(at(ptr, "u1_imag"), "needs p rows");
      u += cplx(0.0, 1.0) * im.cast<cplx>();
    }
    u1 = std::move(u);
  }
  try {
    return SpikedPopulation(std::move(spikes), SpectralDistribution(std::move(atoms)), p, n,
                            std::move(u1));
  } catch (const ArgumentError& e) {
    throw ConfigError(ptr, e.what());
  }
}

MomentProfile profile_from_json(const json& j, const std::string& ptr) {
  if (j.is_string()) return entry_from_json(j, ptr).implied_profile();
  const double a = number(require(j, "alpha_x", ptr), at(ptr, "alpha_x"));
  const double b = number(require(j, "beta_x", ptr), at(ptr, "beta_x"));
  try {
    return MomentProfile::make(a, b);
  } catch (const ArgumentError& e) {
    throw ConfigError(ptr, e.what());
  }
}

KernelFunction kernel_from_json(const json& j, const std::string& ptr) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "lrt") return KernelFunction::lrt();
    if (s == "nt") return KernelFunction::nt();
    if (s == "linear") return KernelFunction::linear();
    if (s == "log") return KernelFunction::log();
    throw ConfigError(ptr, "unknown kernel '" + s + "'");
  }
  if (j.is_object() && j.contains("power"))
    return KernelFunction::power(number(j["power"], at(ptr, "power")));
  throw ConfigError(ptr, "expected a kernel name or {\"power\": q}");
}

EntryDistribution entry_from_json(const json& j, const std::string& ptr) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "gaussian_real") return EntryDistribution::gaussian_real();
    if (s == "gaussian_complex") return EntryDistribution::gaussian_complex();
    if (s == "rademacher") return EntryDistribution::rademacher();
    if (s == "uniform_pm_sqrt3") return EntryDistribution::uniform_pm_sqrt3();
    throw ConfigError(ptr, "unknown entry law '" + s + "'");
  }
  if (j.is_object() && j.contains("two_point")) {
    const std::string tp = at(ptr, "two_point");
    const json& o = j["two_point"];
    try {
      return EntryDistribution::two_point(number(require(o, "a", tp), at(tp, "a")),
                                          number(require(o, "b", tp), at(tp, "b")),
                                          number(require(o, "prob", tp), at(tp, "prob")));
    } catch (const ConfigError&) {
      throw;
    } catch (const ArgumentError& e) {
      throw ConfigError(tp, e.what());
    }
  }
  throw ConfigError(ptr, "expected an entry law name or {\"two_point\": {...}}");
}

CltMode mode_from_string(const std::string& s, const std::string& ptr) {
  if (s == "general_finite_n") return CltMode::general_finite_n;
  if (s == "limit_with_assumptions") return CltMode::limit_with_assumptions;
  if (s == "identity_bulk_closed_form") return CltMode::identity_bulk_closed_form;
  throw ConfigError(ptr, "unknown mode '" + s + "'");
}

TestKind test_from_string(const std::string& s, const std::string& ptr) {
  if (s == "lrt") return TestKind::lrt;
  if (s == "nt") return TestKind::nt;
  throw ConfigError(ptr, "test must be lrt or nt");
}

Normalization normalization_from_string(const std::string& s, const std::string& ptr) {
  for (Normalization n : {Normalization::general, Normalization::limit, Normalization::lrt_null,
                          Normalization::lrt_alternative, Normalization::nt_null,
                          Normalization::nt_alternative})
    if (s == to_string(n)) return n;
  throw ConfigError(ptr, "unknown normalization '" + s + "'");
}

SimulationConfig simulation_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "expected an object");
  SimulationConfig c(model_from_json(require(j, "model", ""), "/model"));
  if (j.contains("entry")) c.entry = entry_from_json(j["entry"], "/entry");
  if (j.contains("test")) c.test = test_from_string(string(j["test"], "/test"));
  if (j.contains("kernel")) c.kernel = kernel_from_json(j["kernel"], "/kernel");
  if (c.test.has_value() == c.kernel.has_value())
    throw ConfigError("/test", "set exactly one of test and kernel");
  if (j.contains("replications")) {
    c.replications = int_field(j["replications"], "/replications");
    if (c.replications < 1) throw ConfigError("/replications", "must be at least 1");
  }
  if (j.contains("seed")) {
    const long long s = integer(j["seed"], "/seed");
    if (s < 0) throw ConfigError("/seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("normalization")) {
    c.normalization =
      normalization_from_string(string(j["normalization"], "/normalization"));
  } else if (c.test) {
    const bool null = c.model.M() == 0;
    c.normalization = *c.test == TestKind::lrt
                        ? (null ? Normalization::lrt_null : Normalization::lrt_alternative)
                        : (null ? Normalization::nt_null : Normalization::nt_alternative);
  }
  if (j.contains("spike_form")) {
    const std::string f = string(j["spike_form"], "/spike_form");
    if (f == "exact") c.spike_form = SpikeVarianceForm::exact;
    else if (f == "leading_order") c.spike_form = SpikeVarianceForm::leading_order;
    else throw ConfigError("/spike_form", "must be exact or leading_order");
  }
  if (j.contains("attest")) c.attest = boolean(j["attest"], "/attest");
  return c;
}

json model_to_json(const SpikedPopulation& m) {
  json j;
  j["p"] = m.p();
  j["n"] = m.n();
  j["spikes"] = json::array();
  for (const auto& s : m.spikes())
    j["spikes"].push_back({{"alpha", s.alpha}, {"multiplicity", s.multiplicity}});
  j["bulk"] = json::array();
  for (const auto& a : m.bulk().atoms())
    j["bulk"].push_back({{"value", a.value}, {"weight", a.weight}});
  if (m.u1()) {
    const Eigen::MatrixXcd& u = *m.u1();
    j["u1"] = matrix_to_json(u.real());
    if (u.imag().cwiseAbs().maxCoeff() > 0.0) j["u1_imag"] = matrix_to_json(u.imag());
  }
  return j;
}

json entry_to_json(const EntryDistribution& e) {
  if (e.kind() == EntryKind::two_point)
    return {{"two_point", {{"a", e.a()}, {"b", e.b()}, {"prob", e.prob()}}}};
  return e.name();
}

json simulation_config_to_json(const SimulationConfig& c) {
  json j;
  j["model"] = model_to_json(c.model);
  j["entry"] = entry_to_json(c.entry);
  if (c.test) j["test"] = to_string(*c.test);
  if (c.kernel) {
    if (c.kernel->id() == KernelId::power) j["kernel"] = {{"power", c.kernel->exponent()}};
    else j["kernel"] = c.kernel->name();
  }
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["normalization"] = to_string(c.normalization);
  j["spike_form"] = c.spike_form == SpikeVarianceForm::exact ? "exact" : "leading_order";
  j["attest"] = c.attest;
  return j;
}

json diagnostics_to_json(const Diagnostics& d) {
  json q = json::array();
  for (const auto& [what, err] : d.quadrature_errors) q.push_back({{"stage", what}, {"error", err}});
  return {{"notes", d.notes},
          {"max_solver_iterations", d.max_solver_iterations},
          {"max_solver_residual", d.max_solver_residual},
          {"quadrature_errors", q}};
}

json to_json(const CltSummary& s) {
  json j;
  j["mode"] = to_string(s.mode);
  j["attested"] = s.attested;
  j["kernels"] = json::array();
  for (const auto& k : s.kernels) {
    j["kernels"].push_back({{"name", k.name},
                            {"centering_bulk", k.centering_bulk},
                            {"centering_spike", k.centering_spike},
                            {"m_correction", k.m_correction},
                            {"mu", k.mu},
                            {"total_centering", k.total_centering()},
                            {"spike_var", k.spike_var},
                            {"bulk_var", k.bulk_var},
                            {"sigma_sq", k.sigma_sq},
                            {"varpi", k.varpi}});
  }
  j["spikes"] = json::array();
  for (const auto& sp : s.spikes) {
    j["spikes"].push_back({{"alpha", sp.alpha},
                           {"multiplicity", sp.multiplicity},
                           {"phi", sp.phi},
                           {"theta", sp.theta},
                           {"nu", sp.nu},
                           {"s_squared", sp.s_squared}});
  }
  j["kappa"] = matrix_to_json(s.kappa);
  j["psi"] = matrix_to_json(s.psi);
  j["psi_min_eigenvalue"] = s.psi_min_eigenvalue;
  j["diagnostics"] = diagnostics_to_json(s.diagnostics);
  return j;
}

json to_json(const TestReport& r) {
  return {{"test", to_string(r.test)},
          {"hypothesis_mode", r.null_hypothesis ? "null" : "alternative"},
          {"statistic", r.statistic},
          {"centering", r.centering},
          {"scale", r.scale},
          {"z_score", r.z_score},
          {"p_value", r.p_value},
          {"level", r.level},
          {"reject", r.reject}};
}

json to_json(const SimulationResult& r, const json& config) {
  return {{"config", config},
          {"statistics", r.statistics},
          {"normalized_samples", r.normalized_samples},
          {"location", r.location},
          {"scale", r.scale},
          {"empirical_mean", r.empirical_mean},
          {"empirical_var", r.empirical_var},
          {"ks_distance", r.ks_distance},
          {"max_trace_error", r.max_trace_error},
          {"notes", r.notes},
          {"density_grid", pairs_to_json(r.density_grid)},
          {"qq_points", pairs_to_json(r.qq_points)}};
}

json RunManifest::to_json() const {
  return {{"command", command},
          {"config_digest", hex64(digest)},
          {"seed", seed},
          {"version", version},
          {"wall_clock_seconds", wall_clock_seconds},
          {"diagnostics", diagnostics}};
}

RunManifest make_manifest(const std::string& command, const json& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.digest = fnv1a64(canonical(config));
  m.seed = seed;
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      const std::string t = trim(cell);
      double v = 0.0;
      const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        std::ostringstream os;
        os << path << ": row " << lineno << ", column " << col << ": not a number '" << t << "'";
        throw DataError(os.str());
      }
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << path << ": row " << lineno << ", column " << col << ": non-finite value";
        throw DataError(os.str());
      }
      row.push_back(v);
    }
    if (!line.empty() && line.back() == ',') {
      std::ostringstream os;
      os << path << ": row " << lineno << ", column " << col + 1 << ": empty field";
      throw DataError(os.str());
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      std::ostringstream os;
      os << path << ": row " << lineno << " has " << row.size() << " fields, expected " << width;
      throw DataError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) m(r, c) = rows[r][c];
  return m;
}

std::string csv_pairs(const std::string& h1, const std::string& h2,
                      const std::vector<std::pair<double, double>>& rows) {
  std::string out = h1 + "," + h2 + "\r\n";
  for (const auto& [a, b] : rows) out += format_double(a) + "," + format_double(b) + "\r\n";
  return out;
}

} // namespace spectral_clt::io
