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

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "spectral_clt/clt_engine.hpp"
#include "spectral_clt/errors.hpp"
#include "spectral_clt/hypothesis_tests.hpp"

namespace spectral_clt {
namespace {

const MomentProfile kGauss = MomentProfile::gaussian_real();
constexpr double kZ95 = 1.6448536269514722;

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SpikedPopulation spiked(double alpha, int p = 300, int n = 900) {
  return SpikedPopulation({{alpha, 1}}, make_bulk_identity(p - 1), p, n);
}

TEST(Statistics, HandValues) {
  EXPECT_DOUBLE_EQ(lrt_statistic({1.0, 1.0, 1.0}, 3), 0.0);
  EXPECT_NEAR(lrt_statistic({2.0, 0.5}, 2), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(nt_statistic({1.0, 1.0}, 2), 0.0);
  EXPECT_DOUBLE_EQ(nt_statistic({3.0, 1.0, 1.0}, 3), 4.0);
  EXPECT_DOUBLE_EQ(nt_statistic({0.0, 2.0}, 2), 2.0);
  EXPECT_THROW(lrt_statistic({1.0, 0.0}, 2), ArgumentError);
  EXPECT_THROW(lrt_statistic({1.0, -1.0}, 2), ArgumentError);
  EXPECT_THROW(nt_statistic({1.0}, 2), ArgumentError);
}

TEST(NullParams, LrtClosedForms) {
  const TestParams t = lrt_params(Hypothesis::null(), kGauss, 300, 900);
  EXPECT_NEAR(t.mu, -std::log(2.0 / 3.0) / 2.0, 1e-9);
  EXPECT_NEAR(t.mu, 0.202732, 1e-6);
  EXPECT_NEAR(t.varsigma_sq, -2 * std::log(2.0 / 3.0) - 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(t.varsigma_sq, 0.144264, 1e-6);
  EXPECT_NEAR(t.centering, 300 * (1 - (1.0 / 3 - 1) * 3 * std::log(2.0 / 3.0)), 1e-8);
}

TEST(NullParams, NtClosedForms) {
  const TestParams t = nt_params(Hypothesis::null(), kGauss, 300, 900);
  EXPECT_NEAR(t.mu, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(t.varsigma_sq, 2 * (4.0 / 27 + 2.0 / 9), 1e-9);
  EXPECT_NEAR(t.varsigma_sq, 0.740740, 1e-6);
  EXPECT_NEAR(t.centering, 100.0, 1e-8);
}

TEST(NullParams, AlternativeWithoutSpikesIsBitIdentical) {
  const SpikedPopulation none({}, make_bulk_identity(300), 300, 900);
  for (TestKind k : {TestKind::lrt, TestKind::nt}) {
    for (const MomentProfile& prof : {kGauss, MomentProfile::rademacher()}) {
      const TestParams a = test_params(k, Hypothesis::null(), prof, 300, 900);
      const TestParams b = test_params(k, Hypothesis::under(none), prof, 300, 900);
      EXPECT_EQ(std::memcmp(&a.centering, &b.centering, sizeof(double)), 0);
      EXPECT_EQ(std::memcmp(&a.mu, &b.mu, sizeof(double)), 0);
      EXPECT_EQ(std::memcmp(&a.varsigma_sq, &b.varsigma_sq, sizeof(double)), 0);
    }
  }
}

TEST(AlternativeParams, LrtSpikeTerms) {
  const TestParams t = lrt_params(Hypothesis::under(spiked(3.0)), kGauss, 300, 900);
  const double phi = 3.0 + 3.0 * (299.0 / 900.0) / 2.0;
  ASSERT_EQ(t.phi.size(), 1u);
  EXPECT_NEAR(t.phi[0], phi, 1e-12);
  EXPECT_NEAR(t.spike_mean, phi - std::log(phi) - 1.0, 1e-12);
  EXPECT_NEAR(t.spike_mean, 1.246108, 1e-4);
  EXPECT_NEAR(t.m_correction, -(1.0 / 3.0 + std::log(2.0 / 3.0)), 1e-8);
  const TestParams lo = lrt_params(Hypothesis::under(spiked(3.0)), kGauss, 300, 900,
                                   SpikeVarianceForm::leading_order);
  EXPECT_NEAR(lo.spike_var, 2 * std::pow(phi - 1, 4) / (900 * phi * phi), 1e-12);
  EXPECT_NEAR(lo.spike_var, 0.0070737, 1e-6);
}

TEST(AlternativeParams, NtSpikeTerms) {
  const double phi = 3.0 + 3.0 * (299.0 / 900.0) / 2.0;
  const TestParams lo = nt_params(Hypothesis::under(spiked(3.0)), kGauss, 300, 900,
                                  SpikeVarianceForm::leading_order);
  EXPECT_NEAR(lo.spike_var, 8 * std::pow(phi - 1, 4) / 900, 1e-12);
  EXPECT_NEAR(lo.spike_var, 0.346175, 1e-3 * 0.346175);
  EXPECT_NEAR(lo.spike_mean, (phi - 1) * (phi - 1), 1e-12);
  EXPECT_NEAR(lo.m_correction, -(1.0 / 3.0) * (1.0 / 3.0), 1e-8);
}

TEST(AlternativeParams, ExactFormMatchesEngine) {
  for (TestKind k : {TestKind::lrt, TestKind::nt}) {
    const auto f = k == TestKind::lrt ? KernelFunction::lrt() : KernelFunction::nt();
    const auto m = spiked(4.0);
    const TestParams t = test_params(k, Hypothesis::under(m), kGauss, 300, 900);
    const auto s = clt_params({f}, m, kGauss, CltMode::general_finite_n);
    EXPECT_NEAR(t.spike_var, s.kernels[0].spike_var, 1e-9);
    EXPECT_NEAR(t.location(), s.kernels[0].total_centering(), 1e-6);
  }
}

TEST(AlternativeParams, Preconditions) {
  EXPECT_THROW(lrt_params(Hypothesis::null(), kGauss, 900, 900), ArgumentError);
  EXPECT_THROW(lrt_params(Hypothesis::under(spiked(3.0)), kGauss, 300, 1000), ArgumentError);
  const SpikedPopulation twoatom({{9.0, 1}}, SpectralDistribution({{1.0, 0.5}, {2.0, 0.5}}), 301,
                                 900);
  EXPECT_THROW(nt_params(Hypothesis::under(twoatom), kGauss, 301, 900), ArgumentError);
}

// Oracle: the printed expressions evaluated directly.
double printed_power(TestKind k, double alpha, double c, int n) {
  const double phi = alpha + c * alpha / (alpha - 1);
  double var0, shift, spike;
  if (k == TestKind::lrt) {
    var0 = -2 * std::log(1 - c) - 2 * c;
    shift = -c + phi - std::log(phi) - 1;
    spike = 2 * std::pow(phi - 1, 4) / (n * phi * phi);
  } else {
    var0 = 2 * (4 * c * c * c + 2 * c * c);
    shift = -2 * c + (phi - 1) * (phi - 1) - c * c;
    spike = 8 * std::pow(phi - 1, 4) / n;
  }
  return phi_cdf((shift - kZ95 * std::sqrt(var0)) / std::sqrt(var0 + spike));
}

TEST(Power, MatchesPrintedExpression) {
  const double c = 1.0 / 3.0;
  for (TestKind k : {TestKind::lrt, TestKind::nt}) {
    for (double a : {1.0 + std::sqrt(c) + 0.01, 2.0, 3.0, 5.0}) {
      for (int n : {900, 10000}) {
        EXPECT_NEAR(power(k, a, c, n, 0.05, kGauss), printed_power(k, a, c, n), 1e-12);
      }
    }
  }
}

TEST(Power, MonotoneAndDivergent) {
  for (TestKind k : {TestKind::lrt, TestKind::nt}) {
    double prev = 0.0;
    for (double a : {2.0, 3.0, 5.0, 10.0, 50.0}) {
      const double pw = power(k, a, 1.0 / 3.0, 900, 0.05, kGauss);
      EXPECT_GE(pw, prev);
      prev = pw;
    }
    EXPECT_GT(power(k, 1e6, 1.0 / 3.0, 900, 0.05, kGauss), 1 - 1e-6);
  }
  EXPECT_THROW(power(TestKind::lrt, 3.0, 1.5, 900, 0.05, kGauss), ArgumentError);
  EXPECT_THROW(power(TestKind::nt, 1.0, 0.5, 900, 0.05, kGauss), ArgumentError);
}

TEST(Power, FiniteSampleWithoutSpikeEqualsLevel) {
  const SpikedPopulation none({}, make_bulk_identity(300), 300, 900);
  for (TestKind k : {TestKind::lrt, TestKind::nt})
    EXPECT_NEAR(power_for_model(k, none, 0.05, kGauss), 0.05, 1e-12);
}

TEST(RunTest, AllOnesIsDeepInAcceptance) {
  const std::vector<double> ones(100, 1.0);
  for (TestKind k : {TestKind::lrt, TestKind::nt}) {
    const TestReport r = run_test(ones, 100, 400, k, 0.05, kGauss);
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_LT(r.z_score, 0.0);
    EXPECT_FALSE(r.reject);
    EXPECT_GT(r.p_value, 0.5);
  }
}

TEST(RunTest, UpperTailDecision) {
  const TestParams t = nt_params(Hypothesis::null(), kGauss, 3, 9);
  std::vector<double> e = {1.0, 1.0, 1.0};
  // Place the statistic exactly 2 standard deviations above the location.
  const double target = t.location() + 2.0 * std::sqrt(t.varsigma_sq);
  e[0] = 1.0 + std::sqrt(target);
  const TestReport r = run_test(e, 3, 9, TestKind::nt, 0.05, kGauss);
  EXPECT_NEAR(r.z_score, 2.0, 1e-9);
  EXPECT_NEAR(r.p_value, 1 - phi_cdf(2.0), 1e-12);
  EXPECT_TRUE(r.reject);
  EXPECT_THROW(run_test(e, 3, 9, TestKind::nt, 1.5, kGauss), ArgumentError);
}

TEST(Normal, QuantileAndCdf) {
  EXPECT_NEAR(upper_quantile(0.05), kZ95, 1e-12);
  EXPECT_NEAR(normal_cdf(kZ95), 0.95, 1e-12);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
}

} // namespace
} // namespace spectral_clt
