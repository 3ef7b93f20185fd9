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

#include "spectral_clt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include <CLI11.hpp>

#include "spectral_clt/io.hpp"

namespace spectral_clt::cli {

namespace {

using io::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void emit_manifest(std::ostream& err, io::RunManifest m, Clock::time_point t0) {
  m.wall_clock_seconds = seconds_since(t0);
  err << m.to_json().dump() << "\n";
}

// p / n with n >= 1000 approximating c to 1e-12 where possible.
std::pair<int, int> dimensions_for(double c) {
  int best_n = 1;
  double best = 1.0;
  for (int n = 1; n <= 100000; ++n) {
    const double err = std::abs(c * n - std::round(c * n)) / n;
    if (err < best) {
      best = err;
      best_n = n;
      if (err < 1e-15) break;
    }
  }
  const int scale = (1000 + best_n - 1) / best_n;
  const int n = best_n * scale;
  return {static_cast<int>(std::round(c * best_n)) * scale, n};
}

struct Row {
  double c;
  std::string quantity;
  double numeric = 0.0;
  double analytic = 0.0;
  std::string status;
};

int cmd_verify_integrals(const std::vector<double>& cs, int nodes, std::ostream& out,
                         std::ostream& err) {
  const auto t0 = Clock::now();
  std::vector<Row> rows;
  const KernelFunction nt = KernelFunction::nt();
  const KernelFunction lrt = KernelFunction::lrt();
  for (double c : cs) {
    if (!(c > 0.0)) throw ArgumentError("c values must be positive");
    const auto v = identity_bulk_I1_I2_J1_J2(nt, nt, c, nodes);
    rows.push_back({c, "I1_nt", v.I1, c, ""});
    rows.push_back({c, "I2_nt", v.I2, c, ""});
    rows.push_back({c, "J1_nt", v.J1, 4 * c * c * c + 2 * c * c, ""});
    rows.push_back({c, "J2_nt", v.J2, 4 * c * c * c, ""});

    const auto [p, n] = dimensions_for(c);
    const SpikedPopulation model({{10.0 * (1.0 + c) * (1.0 + c), 1}},
                                 SpectralDistribution::point_mass(1.0), p, n);
    const double cn = model.c_n();
    EngineOptions opts;
    opts.nodes = nodes;
    if (cn < 1.0) {
      rows.push_back({c, "lrt_correction", m_correction(lrt, model, opts),
                      -(cn + std::log1p(-cn)), ""});
    } else {
      rows.push_back({c, "lrt_correction", NAN, NAN, "skipped: needs c < 1"});
    }
    rows.push_back({c, "nt_correction", m_correction(nt, model, opts), -cn * cn, ""});
  }
  bool ok = true;
  out << "c,quantity,numeric,analytic,abs_diff,status\r\n";
  for (auto& r : rows) {
    double diff = NAN;
    if (r.status.empty()) {
      diff = std::abs(r.numeric - r.analytic);
      r.status = diff <= 1e-6 ? "pass" : "fail";
      ok = ok && diff <= 1e-6;
    }
    out << io::format_double(r.c) << "," << r.quantity << "," << io::format_double(r.numeric)
        << "," << io::format_double(r.analytic) << "," << io::format_double(diff) << ","
        << r.status << "\r\n";
  }
  emit_manifest(err, io::make_manifest("verify-integrals", {{"c", cs}, {"nodes", nodes}}), t0);
  return ok ? ExitCode::ok : ExitCode::numerical;
}

int cmd_clt_params(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const json cfg = io::read_json_file(path);
  if (!cfg.is_object()) throw io::ConfigError("", "expected an object");
  if (!cfg.contains("kernels")) throw io::ConfigError("/kernels", "required field is missing");
  const json& ks = cfg["kernels"];
  if (!ks.is_array()) throw io::ConfigError("/kernels", "expected an array");
  if (ks.empty()) throw io::ConfigError("/kernels", "kernel list is empty");
  std::vector<KernelFunction> kernels;
  for (std::size_t i = 0; i < ks.size(); ++i)
    kernels.push_back(io::kernel_from_json(ks[i], "/kernels/" + std::to_string(i)));
  if (!cfg.contains("model")) throw io::ConfigError("/model", "required field is missing");
  const SpikedPopulation model = io::model_from_json(cfg["model"], "/model");
  const MomentProfile profile = cfg.contains("profile")
                                  ? io::profile_from_json(cfg["profile"], "/profile")
                                  : MomentProfile::gaussian_real();
  CltMode mode = CltMode::general_finite_n;
  if (cfg.contains("mode")) {
    if (!cfg["mode"].is_string()) throw io::ConfigError("/mode", "expected a string");
    mode = io::mode_from_string(cfg["mode"].get<std::string>());
  }
  bool attest = false;
  if (cfg.contains("attest")) {
    if (!cfg["attest"].is_boolean()) throw io::ConfigError("/attest", "expected true or false");
    attest = cfg["attest"].get<bool>();
  }
  EngineOptions opts;
  if (cfg.contains("options")) {
    const json& o = cfg["options"];
    if (o.contains("nodes")) {
      if (!o["nodes"].is_number_integer())
        throw io::ConfigError("/options/nodes", "expected an integer");
      opts.nodes = o["nodes"].get<int>();
    }
  }
  const CltSummary s = clt_params(kernels, model, profile, mode, attest, opts);
  out << io::to_json(s).dump(2) << "\n";
  io::RunManifest m = io::make_manifest("clt-params", cfg);
  m.diagnostics = io::diagnostics_to_json(s.diagnostics);
  emit_manifest(err, m, t0);
  return ExitCode::ok;
}

struct SimulateArgs {
  std::string config;
  int case_id = 0;
  int n = 900;
  std::string out;
  std::optional<long long> seed;
  std::optional<int> reps;
  int threads = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  if (a.config.empty() == (a.case_id == 0))
    throw ArgumentError("give either a config file or --case");
  std::optional<SimulationConfig> cfg;
  if (a.case_id != 0) {
    if (a.n % 3 != 0) throw ArgumentError("--n must be divisible by 3 for case presets");
    cfg = case_preset(a.case_id, a.n / 3, a.n);
  } else {
    cfg = io::simulation_from_json(io::read_json_file(a.config));
  }
  if (a.seed) {
    if (*a.seed < 0) throw ArgumentError("--seed must be nonnegative");
    cfg->seed = static_cast<std::uint64_t>(*a.seed);
  }
  if (a.reps) cfg->replications = *a.reps;
  cfg->threads = a.threads;
  const json config = io::simulation_config_to_json(*cfg);

  const SimulationResult r = simulate(*cfg);
  io::RunManifest m = io::make_manifest("simulate", config, cfg->seed);
  m.diagnostics = {{"max_trace_error", r.max_trace_error}, {"notes", r.notes}};
  m.wall_clock_seconds = seconds_since(t0);
  json result = io::to_json(r, config);
  result["manifest"] = m.to_json();

  const std::string prefix = a.out;
  io::write_text_file(prefix + ".result.json", result.dump(2) + "\n");
  io::write_text_file(prefix + ".density.csv", io::csv_pairs("x", "density", r.density_grid));
  io::write_text_file(prefix + ".qq.csv", io::csv_pairs("theoretical", "empirical", r.qq_points));
  out << json{{"result", prefix + ".result.json"},
              {"empirical_mean", r.empirical_mean},
              {"empirical_var", r.empirical_var},
              {"ks_distance", r.ks_distance}}
           .dump()
      << "\n";
  emit_manifest(err, m, t0);
  return ExitCode::ok;
}

struct TestArgs {
  std::string data;
  std::string eigs;
  std::string test = "lrt";
  double level = 0.05;
  int n = 0;
  bool centered = false;
  std::string profile = "gaussian_real";
  std::string alternative;
};

int cmd_test(const TestArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const TestKind kind = io::test_from_string(a.test, "--test");
  const MomentProfile profile = io::profile_from_json(json(a.profile), "--profile");
  std::vector<double> eigs;
  int n = a.n;
  if (!a.data.empty()) {
    const Eigen::MatrixXd X = io::read_csv_matrix(a.data);
    eigs = data_eigenvalues(X, a.centered);
    n = static_cast<int>(X.cols()) - (a.centered ? 1 : 0);
  } else {
    if (a.centered) throw ArgumentError("--centered applies to --data only");
    if (n < 1) throw ArgumentError("--eigs needs --n");
    const Eigen::MatrixXd E = io::read_csv_matrix(a.eigs);
    if (E.cols() != 1) throw DataError(a.eigs + ": expected a single column of eigenvalues");
    eigs.assign(E.data(), E.data() + E.rows());
  }
  const int p = static_cast<int>(eigs.size());
  Hypothesis h = Hypothesis::null();
  if (!a.alternative.empty())
    h = Hypothesis::under(io::model_from_json(io::read_json_file(a.alternative), "/"));
  const TestReport r = run_test(eigs, p, n, kind, a.level, profile, h);
  out << io::to_json(r).dump(2) << "\n";
  const json cfg = {{"data", a.data},   {"eigs", a.eigs},         {"test", a.test},
                    {"level", a.level}, {"n", n},                 {"centered", a.centered},
                    {"profile", a.profile}, {"alternative", a.alternative}};
  emit_manifest(err, io::make_manifest("test", cfg), t0);
  return ExitCode::ok;
}

struct PowerArgs {
  std::string test = "lrt";
  std::vector<double> alpha1;
  double c = 1.0 / 3.0;
  int n = 900;
  double level = 0.05;
  std::string profile = "gaussian_real";
};

int cmd_power(const PowerArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const TestKind kind = io::test_from_string(a.test, "--test");
  if (a.alpha1.empty()) throw ArgumentError("--alpha1 grid is empty");
  if (kind == TestKind::lrt && !(a.c < 1.0)) throw ArgumentError("lrt power needs c < 1");
  const MomentProfile profile = io::profile_from_json(json(a.profile), "--profile");
  std::vector<std::pair<double, double>> rows;
  for (double al : a.alpha1) rows.emplace_back(al, power(kind, al, a.c, a.n, a.level, profile));
  out << io::csv_pairs("alpha1", "power", rows);
  const json cfg = {{"test", a.test}, {"alpha1", a.alpha1}, {"c", a.c},
                    {"n", a.n},       {"level", a.level},   {"profile", a.profile}};
  emit_manifest(err, io::make_manifest("power", cfg), t0);
  return ExitCode::ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral statistics of spiked sample covariance matrices", "spectral-clt"};
  app.set_version_flag("--version", io::kVersion);
  app.require_subcommand(1);

  std::vector<double> cs{0.1, 1.0 / 3.0, 0.5};
  int nodes = 2048;
  auto* verify = app.add_subcommand("verify-integrals", "Check contour integrals against closed forms");
  verify->add_option("--c", cs, "Ratios to check")->delimiter(',');
  verify->add_option("--nodes", nodes, "Contour nodes")->check(CLI::Range(256, 1 << 20));

  std::string clt_config;
  auto* clt = app.add_subcommand("clt-params", "Centering and covariance of LSS");
  clt->add_option("config", clt_config, "JSON configuration")->required();

  SimulateArgs sim;
  auto* simc = app.add_subcommand("simulate", "Monte Carlo replication study");
  simc->add_option("config", sim.config, "JSON configuration");
  simc->add_option("--case", sim.case_id, "Preset case 1-6")->check(CLI::Range(1, 6));
  simc->add_option("--n", sim.n, "Sample size for presets (p = n / 3)")->check(CLI::PositiveNumber);
  simc->add_option("--out", sim.out, "Output prefix")->required();
  simc->add_option("--seed", sim.seed, "Seed override");
  simc->add_option("--reps", sim.reps, "Replication override")->check(CLI::PositiveNumber);
  simc->add_option("--threads", sim.threads, "Worker threads (0: default)")
    ->check(CLI::NonNegativeNumber);

  TestArgs ta;
  auto* testc = app.add_subcommand("test", "Sphericity test on data or eigenvalues");
  auto* data_opt = testc->add_option("--data", ta.data, "p x n data CSV, observations in columns");
  auto* eigs_opt = testc->add_option("--eigs", ta.eigs, "Eigenvalue CSV, one column");
  data_opt->excludes(eigs_opt);
  testc->add_option("--test", ta.test, "lrt or nt")->check(CLI::IsMember({"lrt", "nt"}));
  testc->add_option("--level", ta.level, "Test level")->check(CLI::Range(0.0, 1.0));
  testc->add_option("--n", ta.n, "Sample size behind --eigs");
  testc->add_flag("--centered", ta.centered, "Subtract row means and divide by n - 1");
  testc->add_option("--profile", ta.profile, "Entry law giving (alpha_x, beta_x)");
  testc->add_option("--alternative", ta.alternative, "Spiked model JSON for H1 normalization");

  PowerArgs pa;
  auto* powc = app.add_subcommand("power", "Asymptotic power over an alpha_1 grid");
  powc->add_option("--test", pa.test, "lrt or nt")->check(CLI::IsMember({"lrt", "nt"}));
  powc->add_option("--alpha1", pa.alpha1, "Spike grid")->delimiter(',')->required();
  powc->add_option("--c", pa.c, "Dimension ratio")->check(CLI::PositiveNumber);
  powc->add_option("--n", pa.n, "Sample size")->check(CLI::PositiveNumber);
  powc->add_option("--level", pa.level, "Test level")->check(CLI::Range(0.0, 1.0));
  powc->add_option("--profile", pa.profile, "Entry law giving (alpha_x, beta_x)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForVersion&) {
    out << io::kVersion << "\n";
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return ExitCode::usage;
  }

  try {
    if (*verify) return cmd_verify_integrals(cs, nodes, out, err);
    if (*clt) return cmd_clt_params(clt_config, out, err);
    if (*simc) return cmd_simulate(sim, out, err);
    if (*testc) {
      if (ta.data.empty() && ta.eigs.empty()) throw ArgumentError("give --data or --eigs");
      return cmd_test(ta, out, err);
    }
    if (*powc) return cmd_power(pa, out, err);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return ExitCode::data;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return ExitCode::io_failure;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return ExitCode::usage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return ExitCode::numerical;
  } catch (const SolverError& e) {
    err << "numerical error: " << e.what() << "\n";
    return ExitCode::numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::numerical;
  }
  return ExitCode::usage;
}

} // namespace spectral_clt::cli
