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

#include <benchmark/benchmark.h>

#include "spectral_clt/clt_engine.hpp"
#include "spectral_clt/hypothesis_tests.hpp"
#include "spectral_clt/montecarlo.hpp"
#include "spectral_clt/stieltjes.hpp"

namespace {

using namespace spectral_clt;

SpikedPopulation identity(int p, int n, std::vector<Spike> spikes = {}) {
  int M = 0;
  for (const auto& s : spikes) M += s.multiplicity;
  return SpikedPopulation(std::move(spikes), make_bulk_identity(p - M), p, n);
}

void BM_SolveIdentityBulk(benchmark::State& state) {
  const auto h = SpectralDistribution::point_mass(1.0);
  const cplx z(2.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_m_underline(z, 1.0 / 3.0, h));
}
BENCHMARK(BM_SolveIdentityBulk);

void BM_SolveTwoAtomBulk(benchmark::State& state) {
  const SpectralDistribution h({{1.0, 0.5}, {3.0, 0.5}});
  const cplx z(2.5, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(solve_m_underline(z, 0.5, h));
}
BENCHMARK(BM_SolveTwoAtomBulk);

void BM_LssCentering(benchmark::State& state) {
  const auto m = identity(300, 900, {{5.0, 1}});
  EngineOptions o;
  o.nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lss_centering(KernelFunction::lrt(), m, CenteringPath::reduced, o));
}
BENCHMARK(BM_LssCentering)->Arg(512)->Arg(2048);

void BM_BulkCovLimit(benchmark::State& state) {
  const auto h = SpectralDistribution::point_mass(1.0);
  EngineOptions o;
  o.nodes = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
      bulk_cov_limit(KernelFunction::nt(), KernelFunction::nt(), 1.0 / 3.0, h, {1.0, 0.0}, o));
}
BENCHMARK(BM_BulkCovLimit)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_TestParamsAlternative(benchmark::State& state) {
  const auto m = identity(300, 900, {{3.0, 1}});
  for (auto _ : state)
    benchmark::DoNotOptimize(
      test_params(TestKind::nt, Hypothesis::under(m), MomentProfile::gaussian_real(), 300, 900));
}
BENCHMARK(BM_TestParamsAlternative)->Unit(benchmark::kMicrosecond);

void BM_SampleEigenvalues(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto m = identity(p, 3 * p, {{5.0, 1}});
  std::uint64_t rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_eigenvalues(m, EntryDistribution::gaussian_real(), 1, rep++));
}
BENCHMARK(BM_SampleEigenvalues)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_SimulateCase(benchmark::State& state) {
  SimulationConfig cfg = case_preset(1, 300, 900);
  cfg.replications = 10;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg));
}
BENCHMARK(BM_SimulateCase)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
