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
#include <numbers>

#include <gtest/gtest.h>

#include "spectral_clt/clt_engine.hpp"
#include "spectral_clt/contour.hpp"
#include "spectral_clt/errors.hpp"

namespace spectral_clt {
namespace {

const cplx kTwoPiI(0.0, 2.0 * std::numbers::pi);

TEST(Integrate, ResidueOnUnitCircle) {
  const auto c = ContourSpec::circle(1.0, 0.0, 512);
  const auto r = integrate([](cplx z) { return 1.0 / z; }, c);
  EXPECT_LT(std::abs(r.value - kTwoPiI), 1e-12);
  EXPECT_TRUE(r.converging);
}

TEST(Integrate, EntireFunctionVanishes) {
  const auto c = ContourSpec::rectangle({1.0, 3.0, false}, 0.5, 0.5);
  EXPECT_LT(std::abs(integrate([](cplx) { return cplx(1.0); }, c).value), 1e-12);
  EXPECT_LT(std::abs(integrate([](cplx z) { return std::exp(z) * z * z; }, c).value), 1e-10);
}

TEST(Integrate, SimplePoleInsideRectangle) {
  const auto c = ContourSpec::rectangle({1.0, 3.0, false}, 0.5, 0.5);
  const auto r = integrate([](cplx z) { return 1.0 / (z - 2.0); }, c);
  EXPECT_LT(std::abs(r.value - kTwoPiI), 1e-10);
  EXPECT_LT(r.error_estimate, 1e-8);
  const auto outside = integrate([](cplx z) { return 1.0 / (z - 6.0); }, c);
  EXPECT_LT(std::abs(outside.value), 1e-10);
}

TEST(Integrate, ValuesVariantAgrees) {
  const auto c = ContourSpec::rectangle({0.2, 2.5, false}, 0.3, 0.4, 1024);
  std::vector<cplx> vals;
  for (const auto& node : c.nodes()) vals.push_back(std::log(node.z) / (node.z - 1.0));
  const auto a = integrate_values(vals, c);
  const auto b = integrate([](cplx z) { return std::log(z) / (z - 1.0); }, c);
  EXPECT_LT(std::abs(a.value - b.value), 1e-14);
}

TEST(DoubleIntegral, ProductOfResidues) {
  const auto outer = ContourSpec::rectangle({1.0, 3.0, false}, 0.5, 0.5);
  const auto inner = ContourSpec::rectangle({1.0, 3.0, false}, 0.25, 0.25);
  const auto r = double_integral(
    [](cplx a, cplx b) { return 1.0 / ((a - 2.0) * (b - 2.0)); }, outer, inner);
  EXPECT_LT(std::abs(r.value - kTwoPiI * kTwoPiI), 1e-9);
  const auto zero = double_integral([](cplx, cplx) { return cplx(1.0); }, outer, inner);
  EXPECT_LT(std::abs(zero.value), 1e-9);
}

TEST(Contours, NestingRules) {
  const auto outer = ContourSpec::rectangle({1.0, 3.0, false}, 0.5, 0.5);
  const auto inner = ContourSpec::rectangle({1.0, 3.0, false}, 0.25, 0.25);
  EXPECT_NO_THROW(check_nonoverlapping(outer, inner));
  EXPECT_THROW(check_nonoverlapping(outer, outer), ArgumentError);
  const auto crossing = ContourSpec::rectangle({1.0, 3.0, false}, 1.0, 0.25);
  EXPECT_THROW(check_nonoverlapping(outer, crossing), ArgumentError);
  EXPECT_TRUE(outer.contains(2.0));
  EXPECT_FALSE(outer.contains(cplx(2.0, 0.6)));
}

TEST(Contours, RightHalfPlaneGuard) {
  EXPECT_THROW(require_right_half_plane(ContourSpec::rectangle({0.1, 2.0, false}, 0.5, 0.5)),
               ArgumentError);
  EXPECT_THROW(default_rectangle({0.1, 2.0, false}, true), ArgumentError);
  EXPECT_NO_THROW(default_rectangle({0.1, 2.0, false}, false));
  const auto safe = default_rectangle({0.1, 2.0, false}, true, 0.05);
  EXPECT_GT(safe.min_real(), 0.0);
  EXPECT_LT(safe.left(), 0.1);
}

TEST(RLimit, LinearExtrapolation) {
  const auto v = r_limit([](double r) { return cplx(3.0 * r * r - 1.0, r); });
  EXPECT_NEAR(v.real(), 2.0, 1e-7);
  EXPECT_NEAR(v.imag(), 1.0, 1e-12);
}

TEST(IdentityBulkIntegrals, NtClosedForms) {
  const double c = 1.0 / 3.0;
  const auto v = identity_bulk_I1_I2_J1_J2(KernelFunction::nt(), KernelFunction::nt(), c);
  EXPECT_NEAR(v.I1, c, 1e-6);
  EXPECT_NEAR(v.I2, c, 1e-6);
  EXPECT_NEAR(v.J1, 4 * c * c * c + 2 * c * c, 1e-6);
  EXPECT_NEAR(v.J2, 4 * c * c * c, 1e-6);
}

TEST(IdentityBulkIntegrals, ConstantKernelVanishes) {
  const auto k = KernelFunction::constant(3.0);
  const auto v = identity_bulk_I1_I2_J1_J2(k, k, 0.4);
  EXPECT_NEAR(v.I1, 0.0, 1e-10);
  EXPECT_NEAR(v.I2, 0.0, 1e-10);
  EXPECT_NEAR(v.J1, 0.0, 1e-10);
  EXPECT_NEAR(v.J2, 0.0, 1e-10);
}

TEST(IdentityBulkIntegrals, LrtMeanTermMatchesBulkMean) {
  const double c = 1.0 / 3.0;
  const auto v = identity_bulk_I1_I2_J1_J2(KernelFunction::lrt(), KernelFunction::lrt(), c);
  EXPECT_NEAR(v.I1, -std::log(1.0 - c) / 2.0, 1e-6);
  const SpikedPopulation m({}, make_bulk_identity(300), 300, 900);
  EXPECT_NEAR(bulk_mean(KernelFunction::lrt(), m, {1.0, 0.0}), v.I1, 1e-6);
}

} // namespace
} // namespace spectral_clt
