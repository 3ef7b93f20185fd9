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

#ifndef SPECTRAL_CLT_HYPOTHESIS_TESTS_HPP
#define SPECTRAL_CLT_HYPOTHESIS_TESTS_HPP

#include <optional>
#include <vector>

#include "spectral_clt/spectral_model.hpp"

namespace spectral_clt {

enum class TestKind { lrt, nt };

/// Spike contribution to the variance. `exact` uses theta = phi^2 m2(phi)
/// and nu = phi^2 m(phi)^2 for the identity bulk; `leading_order` keeps
/// only the (phi - 1)^4 terms of the closed-form sphericity results.
enum class SpikeVarianceForm { exact, leading_order };

/// H0 (Sigma = I) when `alternative` is empty.
struct Hypothesis {
  std::optional<SpikedPopulation> alternative;

  static Hypothesis null() { return {}; }
  static Hypothesis under(SpikedPopulation model) { return {std::move(model)}; }
  bool is_null() const noexcept { return !alternative.has_value(); }
};

/// Normalization of a sphericity statistic: (T - centering - mu) / sqrt(varsigma_sq).
struct TestParams {
  /// p l (H0) or (p - M) l-breve (H1).
  double centering = 0.0;
  /// Full mean, spike and M-correction terms included.
  double mu = 0.0;
  double varsigma_sq = 0.0;
  double spike_mean = 0.0;
  double m_correction = 0.0;
  double spike_var = 0.0;
  std::vector<double> phi;

  double location() const noexcept { return centering + mu; }
};

/// sum(lambda) - sum(log lambda) - p.
double lrt_statistic(const std::vector<double>& eigenvalues, int p);
/// sum((lambda - 1)^2).
double nt_statistic(const std::vector<double>& eigenvalues, int p);
double statistic(TestKind test, const std::vector<double>& eigenvalues, int p);

/// Closed-form parameters; the alternative needs an identity bulk and must
/// match (p, n). lrt needs p < n.
TestParams lrt_params(const Hypothesis& h, const MomentProfile& profile, int p, int n,
                      SpikeVarianceForm form = SpikeVarianceForm::exact);
TestParams nt_params(const Hypothesis& h, const MomentProfile& profile, int p, int n,
                     SpikeVarianceForm form = SpikeVarianceForm::exact);
TestParams test_params(TestKind test, const Hypothesis& h, const MomentProfile& profile,
                       int p, int n, SpikeVarianceForm form = SpikeVarianceForm::exact);

/// Asymptotic power for Sigma = diag(alpha_1, 1, ..., 1), evaluated as
/// Phi((shift - z_a varsigma) / varsigma-breve) with phi_1 = alpha_1 + c alpha_1 / (alpha_1 - 1).
double power(TestKind test, double alpha_1, double c, int n, double level,
             const MomentProfile& profile);

/// Finite-n counterpart: H0 threshold and H1 location/scale from the
/// closed-form parameters of `model`.
double power_for_model(TestKind test, const SpikedPopulation& model, double level,
                       const MomentProfile& profile,
                       SpikeVarianceForm form = SpikeVarianceForm::exact);

struct TestReport {
  TestKind test;
  bool null_hypothesis = true;
  double statistic = 0.0;
  double centering = 0.0;
  double scale = 1.0;
  double z_score = 0.0;
  /// Upper tail 1 - Phi(z).
  double p_value = 1.0;
  double level = 0.05;
  bool reject = false;
};

TestReport run_test(const std::vector<double>& eigenvalues, int p, int n, TestKind test,
                    double level, const MomentProfile& profile,
                    const Hypothesis& h = Hypothesis::null(),
                    SpikeVarianceForm form = SpikeVarianceForm::exact);

/// Upper a-quantile of the standard normal.
double upper_quantile(double a);
double normal_cdf(double x);

const char* to_string(TestKind test) noexcept;

} // namespace spectral_clt

#endif
