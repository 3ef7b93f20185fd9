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

#include "spectral_clt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "spectral_clt/clt_engine.hpp"
#include "spectral_clt/errors.hpp"

namespace spectral_clt {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

double standard_normal(std::mt19937_64& rng) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
}

double uniform01(std::mt19937_64& rng) { return boost::random::uniform_01<double>()(rng); }

std::vector<double> descending(const Eigen::VectorXd& ascending) {
  std::vector<double> out(ascending.size());
  for (Eigen::Index i = 0; i < ascending.size(); ++i)
    out[i] = ascending(ascending.size() - 1 - i);
  return out;
}

template <class Matrix>
Matrix draw_matrix(const EntryDistribution& entry, int p, int n, std::mt19937_64& rng) {
  Matrix X(p, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < p; ++i) {
      if constexpr (std::is_same_v<typename Matrix::Scalar, double>)
        X(i, j) = entry.draw_real(rng);
      else
        X(i, j) = entry.draw(rng);
    }
  }
  return X;
}

// Y = D^{1/2} U^* X, as a real matrix when nothing is complex.
struct Sample {
  bool is_complex = false;
  Eigen::MatrixXd real;
  Eigen::MatrixXcd cplx;
};

Sample draw_sample(const SpikedPopulation& model, const EntryDistribution& entry,
                   std::uint64_t seed, std::uint64_t rep) {
  if (model.p() > 2000) throw ArgumentError("simulation supports p <= 2000");
  std::mt19937_64 rng = replication_stream(seed, rep);
  const int p = model.p(), n = model.n();
  const std::vector<double> d = model.population_eigenvalues();
  Eigen::VectorXd root(p);
  for (int i = 0; i < p; ++i) root(i) = std::sqrt(d[i]);

  Sample s;
  Eigen::MatrixXcd U;
  bool u_complex = false;
  if (!model.diagonal()) {
    U = model.full_u();
    u_complex = U.imag().cwiseAbs().maxCoeff() > 0.0;
  }
  s.is_complex = entry.is_complex() || u_complex;
  if (!s.is_complex) {
    s.real = draw_matrix<Eigen::MatrixXd>(entry, p, n, rng);
    if (!model.diagonal()) s.real = U.real().transpose() * s.real;
    s.real = root.asDiagonal() * s.real;
  } else {
    s.cplx = draw_matrix<Eigen::MatrixXcd>(entry, p, n, rng);
    if (!model.diagonal()) s.cplx = U.adjoint() * s.cplx;
    s.cplx = root.cast<cplx>().asDiagonal() * s.cplx;
  }
  return s;
}

template <class Matrix>
std::vector<double> gram_eigenvalues(const Matrix& Y, double divisor, double* trace_error) {
  const Eigen::Index p = Y.rows();
  Matrix B = Matrix::Zero(p, p);
  B.template selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / divisor);
  Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
  const Eigen::VectorXd ev = es.eigenvalues();
  if (trace_error) {
    const double tr = Y.squaredNorm() / divisor;
    *trace_error = tr > 0.0 ? std::abs(ev.sum() - tr) / tr : std::abs(ev.sum());
  }
  return descending(ev);
}

std::vector<double> sample_eigs(const SpikedPopulation& model, const EntryDistribution& entry,
                                std::uint64_t seed, std::uint64_t rep, double* trace_error) {
  const Sample s = draw_sample(model, entry, seed, rep);
  const double n = model.n();
  return s.is_complex ? gram_eigenvalues(s.cplx, n, trace_error)
                      : gram_eigenvalues(s.real, n, trace_error);
}

void check_trace(double err) {
  if (!(err <= 1e-10)) {
    std::ostringstream os;
    os << "trace identity violated: relative error " << err;
    throw NumericalError(os.str());
  }
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / x.size();
}

double sd_of(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / (x.size() - 1));
}

} // namespace

EntryDistribution EntryDistribution::gaussian_real() {
  return EntryDistribution(EntryKind::gaussian_real);
}

EntryDistribution EntryDistribution::gaussian_complex() {
  return EntryDistribution(EntryKind::gaussian_complex);
}

EntryDistribution EntryDistribution::rademacher() {
  return EntryDistribution(EntryKind::rademacher);
}

EntryDistribution EntryDistribution::uniform_pm_sqrt3() {
  return EntryDistribution(EntryKind::uniform_pm_sqrt3);
}

EntryDistribution EntryDistribution::two_point(double a, double b, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ArgumentError("two_point prob must lie in (0, 1)");
  const double mean = prob * a + (1.0 - prob) * b;
  const double var = prob * a * a + (1.0 - prob) * b * b;
  if (std::abs(mean) > 1e-12 || std::abs(var - 1.0) > 1e-12)
    throw ArgumentError("two_point law must have mean 0 and variance 1");
  EntryDistribution e(EntryKind::two_point);
  e.a_ = a;
  e.b_ = b;
  e.prob_ = prob;
  return e;
}

MomentProfile EntryDistribution::implied_profile() const {
  switch (kind_) {
  case EntryKind::gaussian_real: return MomentProfile::gaussian_real();
  case EntryKind::gaussian_complex: return MomentProfile::gaussian_complex();
  case EntryKind::rademacher: return MomentProfile::rademacher();
  case EntryKind::uniform_pm_sqrt3: return MomentProfile::make(1.0, 9.0 / 5.0 - 3.0);
  case EntryKind::two_point: {
    const double m4 = prob_ * std::pow(a_, 4) + (1.0 - prob_) * std::pow(b_, 4);
    return MomentProfile::make(1.0, m4 - 3.0);
  }
  }
  return MomentProfile::gaussian_real();
}

std::string EntryDistribution::name() const {
  switch (kind_) {
  case EntryKind::gaussian_real: return "gaussian_real";
  case EntryKind::gaussian_complex: return "gaussian_complex";
  case EntryKind::rademacher: return "rademacher";
  case EntryKind::uniform_pm_sqrt3: return "uniform_pm_sqrt3";
  case EntryKind::two_point: return "two_point";
  }
  return "";
}

double EntryDistribution::draw_real(std::mt19937_64& rng) const {
  switch (kind_) {
  case EntryKind::gaussian_real: return standard_normal(rng);
  case EntryKind::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
  case EntryKind::uniform_pm_sqrt3: return kSqrt3 * (2.0 * uniform01(rng) - 1.0);
  case EntryKind::two_point: return uniform01(rng) < prob_ ? a_ : b_;
  case EntryKind::gaussian_complex: break;
  }
  throw ArgumentError("complex entry law has no real draw");
}

cplx EntryDistribution::draw(std::mt19937_64& rng) const {
  if (kind_ != EntryKind::gaussian_complex) return draw_real(rng);
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return cplx(re, im) / std::numbers::sqrt2;
}

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
  return std::mt19937_64(seq);
}

int default_thread_count() {
  if (const char* env = std::getenv("SPECTRAL_CLT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> sample_eigenvalues(const SpikedPopulation& model,
                                       const EntryDistribution& entry, std::uint64_t seed,
                                       std::uint64_t rep) {
  double err = 0.0;
  auto eigs = sample_eigs(model, entry, seed, rep, &err);
  check_trace(err);
  return eigs;
}

Eigen::MatrixXcd sample_covariance(const SpikedPopulation& model,
                                   const EntryDistribution& entry, std::uint64_t seed,
                                   std::uint64_t rep) {
  const Sample s = draw_sample(model, entry, seed, rep);
  const double n = model.n();
  if (s.is_complex) return s.cplx * s.cplx.adjoint() / n;
  return (s.real * s.real.transpose() / n).cast<cplx>();
}

std::vector<double> data_eigenvalues(const Eigen::MatrixXd& X, bool centered) {
  if (X.rows() < 1 || X.cols() < 1) throw ArgumentError("data matrix is empty");
  if (!X.allFinite()) throw DataError("data matrix has non-finite entries");
  if (!centered) return gram_eigenvalues(X, static_cast<double>(X.cols()), nullptr);
  if (X.cols() < 2) throw ArgumentError("centered covariance needs at least 2 columns");
  const Eigen::MatrixXd Y = X.colwise() - X.rowwise().mean();
  return gram_eigenvalues(Y, static_cast<double>(X.cols() - 1), nullptr);
}

std::vector<std::vector<double>> replicate(
  const SpikedPopulation& model, const EntryDistribution& entry, int replications,
  std::uint64_t seed, const std::function<std::vector<double>(const std::vector<double>&)>& fn,
  int threads, double* max_trace_error) {
  if (replications < 1) throw ArgumentError("replications must be at least 1");
  const int workers = std::min(replications, threads > 0 ? threads : default_thread_count());
  std::vector<std::vector<double>> out(replications);
  std::vector<double> trace_err(replications, 0.0);
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = replications;
  std::exception_ptr failure;

  const auto work = [&] {
    for (int r = next++; r < replications; r = next++) {
      try {
        const auto eigs = sample_eigs(model, entry, seed, static_cast<std::uint64_t>(r),
                                      &trace_err[r]);
        check_trace(trace_err[r]);
        out[r] = fn(eigs);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (r < failed_at) {
          failed_at = r;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (max_trace_error)
    *max_trace_error = *std::max_element(trace_err.begin(), trace_err.end());
  return out;
}

std::pair<double, double> normalization_of(const SimulationConfig& cfg,
                                           std::vector<std::string>* notes) {
  const MomentProfile profile = cfg.entry.implied_profile();
  const auto& m = cfg.model;
  const auto need_test = [&](TestKind t) {
    if (!cfg.test || *cfg.test != t)
      throw ArgumentError(std::string("normalization ") + to_string(cfg.normalization) +
                          " needs test " + to_string(t));
  };
  const auto closed = [&](TestKind t, bool alternative) {
    need_test(t);
    const Hypothesis h = alternative ? Hypothesis::under(m) : Hypothesis::null();
    const TestParams tp = test_params(t, h, profile, m.p(), m.n(), cfg.spike_form);
    return std::make_pair(tp.location(), std::sqrt(tp.varsigma_sq));
  };
  switch (cfg.normalization) {
  case Normalization::lrt_null: return closed(TestKind::lrt, false);
  case Normalization::lrt_alternative: return closed(TestKind::lrt, true);
  case Normalization::nt_null: return closed(TestKind::nt, false);
  case Normalization::nt_alternative: return closed(TestKind::nt, true);
  case Normalization::general:
  case Normalization::limit: {
    if (!cfg.kernel && !cfg.test) throw ArgumentError("configuration names no statistic");
    const KernelFunction f = cfg.kernel                   ? *cfg.kernel
                             : *cfg.test == TestKind::lrt ? KernelFunction::lrt()
                                                          : KernelFunction::nt();
    const CltMode mode = cfg.normalization == Normalization::general
                           ? CltMode::general_finite_n
                           : CltMode::limit_with_assumptions;
    const CltSummary s = clt_params({f}, m, profile, mode, cfg.attest);
    if (notes)
      for (const auto& note : s.diagnostics.notes) notes->push_back(note);
    return {s.kernels[0].total_centering(), std::sqrt(s.kernels[0].sigma_sq)};
  }
  }
  throw ArgumentError("unknown normalization");
}

double SimulationResult::rejection_rate(double level) const {
  const double za = upper_quantile(level);
  if (normalized_samples.empty()) return 0.0;
  std::size_t k = 0;
  for (double v : normalized_samples) k += v > za ? 1 : 0;
  return static_cast<double>(k) / normalized_samples.size();
}

void summarize(SimulationResult& r) {
  const auto& x = r.normalized_samples;
  r.empirical_mean = mean_of(x);
  const double sd = sd_of(x, r.empirical_mean);
  r.empirical_var = sd * sd;
  r.ks_distance = x.empty() ? 1.0 : ks_distance(x);
  r.density_grid = x.size() >= 2 ? kde(x) : std::vector<std::pair<double, double>>{};
  r.qq_points = x.empty() ? std::vector<std::pair<double, double>>{} : qq_points(x);
}

SimulationResult simulate(const SimulationConfig& cfg) {
  if (cfg.test.has_value() == cfg.kernel.has_value())
    throw ArgumentError("set exactly one of test and kernel");
  if (cfg.replications < 1) throw ArgumentError("replications must be at least 1");
  SimulationResult r;
  const auto [loc, scale] = normalization_of(cfg, &r.notes);
  r.location = loc;
  r.scale = scale;
  const int p = cfg.model.p();
  const auto stat = [&](const std::vector<double>& eigs) -> std::vector<double> {
    if (cfg.test) return {statistic(*cfg.test, eigs, p)};
    double s = 0.0;
    for (double l : eigs) s += cfg.kernel->value(l);
    return {s};
  };
  const auto rows = replicate(cfg.model, cfg.entry, cfg.replications, cfg.seed, stat,
                              cfg.threads, &r.max_trace_error);
  r.statistics.reserve(rows.size());
  r.normalized_samples.reserve(rows.size());
  for (const auto& row : rows) {
    r.statistics.push_back(row[0]);
    r.normalized_samples.push_back((row[0] - loc) / scale);
  }
  summarize(r);
  return r;
}

SimulationConfig case_preset(int case_id, int p, int n) {
  if (case_id < 1 || case_id > 6) throw ArgumentError("case id must be 1..6");
  if (p < 1 || n < 1) throw ArgumentError("p and n must be positive");
  if (std::abs(static_cast<double>(p) / n - 1.0 / 3.0) > 1e-9)
    throw ArgumentError("case presets need p / n = 1/3");
  const double nn = n;
  const double alphas[6] = {3.0,           std::sqrt(nn),       std::pow(nn, 2.0 / 3.0),
                            3.0,           std::pow(nn, 0.25),  std::cbrt(nn)};
  const bool lrt = case_id <= 3;
  SimulationConfig cfg(
    SpikedPopulation({{alphas[case_id - 1], 1}}, SpectralDistribution::point_mass(1.0), p, n));
  cfg.test = lrt ? TestKind::lrt : TestKind::nt;
  cfg.normalization = lrt ? Normalization::lrt_alternative : Normalization::nt_alternative;
  cfg.seed = 20260000u + static_cast<std::uint64_t>(case_id);
  return cfg;
}

std::vector<std::pair<double, double>> kde(const std::vector<double>& x,
                                           std::optional<double> bandwidth) {
  if (x.size() < 2) throw ArgumentError("kde needs at least 2 samples");
  const double mean = mean_of(x);
  const double sd = sd_of(x, mean);
  double h = bandwidth ? *bandwidth : 1.06 * sd * std::pow(static_cast<double>(x.size()), -0.2);
  if (!(h >= 1e-6)) h = 1e-6;
  const double half = 4.0 * std::max(sd, h);
  const double norm = 1.0 / (x.size() * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<std::pair<double, double>> grid(201);
  for (int i = 0; i < 201; ++i) {
    const double g = mean - half + 2.0 * half * i / 200.0;
    double s = 0.0;
    for (double v : x) {
      const double u = (g - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    grid[i] = {g, s * norm};
  }
  return grid;
}

double ks_distance(const std::vector<double>& samples) {
  if (samples.empty()) throw ArgumentError("ks_distance needs samples");
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const double R = x.size();
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    d = std::max({d, (i + 1) / R - F, F - i / R});
  }
  return d;
}

std::vector<std::pair<double, double>> qq_points(const std::vector<double>& samples) {
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> N;
  std::vector<std::pair<double, double>> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = {boost::math::quantile(N, (i + 0.5) / x.size()), x[i]};
  return out;
}

MomentEstimate estimate_moment_profile(const EntryDistribution& entry, int draws,
                                       std::uint64_t seed) {
  if (draws < 10000) throw ArgumentError("moment estimation needs at least 1e4 draws");
  std::mt19937_64 rng = replication_stream(seed, 0);
  std::vector<cplx> sq(draws);
  std::vector<double> q4(draws);
  cplx s2{};
  double m4 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const cplx x = entry.draw(rng);
    sq[i] = x * x;
    q4[i] = std::norm(x) * std::norm(x);
    s2 += sq[i];
    m4 += q4[i];
  }
  s2 /= static_cast<double>(draws);
  m4 /= draws;
  double var_sq = 0.0, var_q4 = 0.0;
  for (int i = 0; i < draws; ++i) {
    var_sq += std::norm(sq[i] - s2);
    var_q4 += (q4[i] - m4) * (q4[i] - m4);
  }
  var_sq /= draws - 1;
  var_q4 /= draws - 1;
  const double alpha = std::norm(s2);
  // Delta method, with the bias term var/N dominating when E x^2 = 0.
  const double se_alpha = 2.0 * std::abs(s2) * std::sqrt(var_sq / draws) + var_sq / draws;
  const double se_beta = std::sqrt(var_q4 / draws + se_alpha * se_alpha);
  return {{alpha, m4 - alpha - 2.0}, se_alpha, se_beta};
}

const char* to_string(Normalization n) noexcept {
  switch (n) {
  case Normalization::general: return "general";
  case Normalization::limit: return "limit";
  case Normalization::lrt_null: return "lrt_null";
  case Normalization::lrt_alternative: return "lrt_alternative";
  case Normalization::nt_null: return "nt_null";
  case Normalization::nt_alternative: return "nt_alternative";
  }
  return "";
}

} // namespace spectral_clt
