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

#ifndef SPECTRAL_CLT_MONTECARLO_HPP
#define SPECTRAL_CLT_MONTECARLO_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spectral_clt/hypothesis_tests.hpp"
#include "spectral_clt/spectral_model.hpp"

namespace spectral_clt {

enum class EntryKind { gaussian_real, gaussian_complex, rademacher, two_point, uniform_pm_sqrt3 };

/// Law of the i.i.d. entries of X; mean 0 and variance 1.
class EntryDistribution {
public:
  static EntryDistribution gaussian_real();
  static EntryDistribution gaussian_complex();
  static EntryDistribution rademacher();
  static EntryDistribution uniform_pm_sqrt3();
  /// Value a with probability `prob`, b otherwise.
  static EntryDistribution two_point(double a, double b, double prob);

  EntryKind kind() const noexcept { return kind_; }
  bool is_complex() const noexcept { return kind_ == EntryKind::gaussian_complex; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double prob() const noexcept { return prob_; }
  /// (alpha_x, beta_x) of the law.
  MomentProfile implied_profile() const;
  std::string name() const;

  double draw_real(std::mt19937_64& rng) const;
  cplx draw(std::mt19937_64& rng) const;

private:
  explicit EntryDistribution(EntryKind kind) : kind_(kind) {}
  EntryKind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  double prob_ = 0.0;
};

/// Stream of replication `rep` under `seed`; independent of scheduling.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep);

/// Worker count: SPECTRAL_CLT_THREADS if set, else hardware parallelism.
int default_thread_count();

/// Descending eigenvalues of B = (1/n) Y Y^* with Y = D^{1/2} U^* X.
std::vector<double> sample_eigenvalues(const SpikedPopulation& model,
                                       const EntryDistribution& entry, std::uint64_t seed,
                                       std::uint64_t rep = 0);

/// The Hermitian matrix B behind sample_eigenvalues.
Eigen::MatrixXcd sample_covariance(const SpikedPopulation& model,
                                   const EntryDistribution& entry, std::uint64_t seed,
                                   std::uint64_t rep = 0);

/// Descending eigenvalues of the sample covariance of a p x n data matrix
/// (observations in columns): X X^T / n, or with row means removed and
/// divisor n - 1 when `centered`.
std::vector<double> data_eigenvalues(const Eigen::MatrixXd& X, bool centered = false);

enum class Normalization { general, limit, lrt_null, lrt_alternative, nt_null, nt_alternative };

struct SimulationConfig {
  explicit SimulationConfig(SpikedPopulation m) : model(std::move(m)) {}

  SpikedPopulation model;
  EntryDistribution entry = EntryDistribution::gaussian_real();
  /// Exactly one of `test` and `kernel` is set.
  std::optional<TestKind> test;
  std::optional<KernelFunction> kernel;
  int replications = 1000;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::general;
  SpikeVarianceForm spike_form = SpikeVarianceForm::exact;
  /// Required by Normalization::limit.
  bool attest = false;
  /// 0 picks default_thread_count().
  int threads = 0;
};

struct SimulationResult {
  std::vector<double> statistics;
  std::vector<double> normalized_samples;
  double location = 0.0;
  double scale = 1.0;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double ks_distance = 1.0;
  std::vector<std::pair<double, double>> density_grid;
  std::vector<std::pair<double, double>> qq_points;
  double max_trace_error = 0.0;
  std::vector<std::string> notes;

  /// Fraction of normalized samples above the upper a-quantile.
  double rejection_rate(double level) const;
};

/// Runs `fn` on the eigenvalues of every replication; out[r] = fn(eigs_r).
std::vector<std::vector<double>> replicate(
  const SpikedPopulation& model, const EntryDistribution& entry, int replications,
  std::uint64_t seed, const std::function<std::vector<double>(const std::vector<double>&)>& fn,
  int threads = 0, double* max_trace_error = nullptr);

/// (location, scale) of the configured normalization.
std::pair<double, double> normalization_of(const SimulationConfig& config,
                                           std::vector<std::string>* notes = nullptr);

SimulationResult simulate(const SimulationConfig& config);

/// Fills the aggregate fields of `r` from r.normalized_samples.
void summarize(SimulationResult& r);

/// Cases 1-3 (lrt, alpha_1 in {3, n^1/2, n^2/3}) and 4-6 (nt, alpha_1 in
/// {3, n^1/4, n^1/3}); p / n must be 1/3.
SimulationConfig case_preset(int case_id, int p = 300, int n = 900);

/// Gaussian KDE on 201 points over mean +- 4 sd; Silverman bandwidth by default.
std::vector<std::pair<double, double>> kde(const std::vector<double>& samples,
                                           std::optional<double> bandwidth = std::nullopt);

/// Exact one-sample Kolmogorov-Smirnov distance to the standard normal.
double ks_distance(const std::vector<double>& samples);

/// (Phi^{-1}((i - 1/2) / R), i-th order statistic).
std::vector<std::pair<double, double>> qq_points(const std::vector<double>& samples);

struct MomentEstimate {
  MomentProfile profile;
  double se_alpha;
  double se_beta;
};

MomentEstimate estimate_moment_profile(const EntryDistribution& entry, int draws,
                                       std::uint64_t seed);

const char* to_string(Normalization n) noexcept;

} // namespace spectral_clt

#endif
