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

#ifndef SPECTRAL_CLT_CLT_ENGINE_HPP
#define SPECTRAL_CLT_CLT_ENGINE_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spectral_clt/contour.hpp"
#include "spectral_clt/spectral_model.hpp"
#include "spectral_clt/stieltjes.hpp"

namespace spectral_clt {

struct EngineOptions {
  int nodes = 2048;
  /// Horizontal margin around the support; shrunk to lower/2 when the
  /// companion law has an atom at zero.
  double margin = 0.5;
  double half_height = 0.5;
  /// Inner contour of double integrals uses margin / 2 and this half-height.
  double inner_half_height = 0.25;
};

/// Solver and quadrature bookkeeping collected along a computation.
struct Diagnostics {
  std::vector<std::string> notes;
  int max_solver_iterations = 0;
  double max_solver_residual = 0.0;
  std::vector<std::pair<std::string, double>> quadrature_errors;

  void note(std::string s) { notes.push_back(std::move(s)); }
};

struct SpikeParams {
  double alpha;
  int multiplicity;
  double phi;
  double theta;
  double nu;
  double s_squared;
};

/// phi_k, theta_k = phi^2 m2(phi), nu_k = phi^2 m(phi)^2 and s_k^2 against
/// (c_nM, H_2n). Throws ArgumentError for a spike whose outlier does not
/// separate from the bulk.
std::vector<SpikeParams> spike_params(const SpikedPopulation& model,
                                      const MomentProfile& profile);

/// s_k^2 from given theta, nu and the quartic sums over J_k.
double assemble_s_squared(const SpikedPopulation& model, int k, double theta, double nu,
                          const MomentProfile& profile);

/// Which measure the centering contour integral is solved against. Both
/// give the same companion transform; `reduced` is (c_nM, H_2n) and
/// `full` is (c_n, H_n).
enum class CenteringPath { reduced, full };

/// (p - M) int f dF^{c_nM, H_2n} as -(n / 2 pi i) times the contour integral
/// of f m_underline. The contour excludes the origin when the companion law
/// has an atom there; otherwise (p - M - n) f(0) is added.
double lss_centering(const KernelFunction& f, const SpikedPopulation& model,
                     CenteringPath path = CenteringPath::reduced,
                     const EngineOptions& options = {}, Diagnostics* diag = nullptr);

/// (M / 2 pi i) times the contour integral of f m' / m, with m the
/// companion transform of F^{c_n, H_2n}. When c_n >= 1 the M zero
/// eigenvalues gained by the full matrix add M f(0).
double m_correction(const KernelFunction& f, const SpikedPopulation& model,
                    const EngineOptions& options = {}, Diagnostics* diag = nullptr);

/// Mean of the bulk part: the alpha_x and beta_x contour terms.
double bulk_mean(const KernelFunction& f, const SpikedPopulation& model,
                 const MomentProfile& profile, const EngineOptions& options = {},
                 Diagnostics* diag = nullptr);

/// Bulk bilinear form <u(z1), K u(z2)> and <u'(z1), L u'(z2)> over the
/// distinct bulk atoms t_a, with u_a(z) = m(z) / (1 + t_a m(z)).
struct BulkCoupling {
  std::vector<double> atoms;
  Eigen::MatrixXcd K;
  Eigen::MatrixXcd L;
};

/// K = L = diag(c w_a t_a^2): diagonal population or the limit.
BulkCoupling limit_coupling(double c, const SpectralDistribution& H);

/// Finite-n coupling of Gamma = D_2^{1/2} U_2^*; dense in p.
BulkCoupling finite_coupling(const SpikedPopulation& model);

/// Covariance of two LSS in the limit:
/// -(1 / 4 pi^2) double contour integral of f_s f_t (Theta0 + alpha Theta1 + beta Theta2).
double bulk_cov_limit(const KernelFunction& fs, const KernelFunction& ft, double c,
                      const SpectralDistribution& H, const MomentProfile& profile,
                      const EngineOptions& options = {}, Diagnostics* diag = nullptr);

struct IdentityBulkIntegrals {
  double I1;
  double I2;
  double J1;
  double J2;
};

/// Identity-bulk integrals on circles, with h(z) = |1 + sqrt(c) z|^2
/// continued analytically. I1 and I2 use `fs`.
IdentityBulkIntegrals identity_bulk_I1_I2_J1_J2(const KernelFunction& fs,
                                            const KernelFunction& ft, double c,
                                            int nodes = 2048);

struct ThetaValues {
  cplx theta0;
  cplx theta1;
  cplx theta2;
  cplx A;
};

/// Theta kernels from solved m, m' at both points.
ThetaValues theta_from(cplx z1, cplx m1, cplx dm1, cplx z2, cplx m2, cplx dm2,
                       const BulkCoupling& coupling, double alpha_x);

/// Finite-n Theta kernels of the model at (z1, z2); |z1 - z2| >= 1e-4.
ThetaValues theta_kernels(cplx z1, cplx z2, const SpikedPopulation& model,
                          const MomentProfile& profile);

enum class CltMode { general_finite_n, limit_with_assumptions, identity_bulk_closed_form };

struct KernelSummary {
  std::string name;
  double centering_bulk = 0.0;
  double centering_spike = 0.0;
  double m_correction = 0.0;
  double mu = 0.0;
  double spike_var = 0.0;
  double bulk_var = 0.0;
  double sigma_sq = 0.0;
  /// phi_k f'(phi_k) / sqrt(n) per spike.
  std::vector<double> varpi;

  /// Everything subtracted from the raw statistic before scaling.
  double total_centering() const noexcept {
    return centering_bulk + centering_spike + m_correction + mu;
  }
};

struct CltSummary {
  CltMode mode;
  std::vector<KernelSummary> kernels;
  std::vector<SpikeParams> spikes;
  Eigen::MatrixXd kappa;
  Eigen::MatrixXd psi;
  double psi_min_eigenvalue = 1.0;
  bool attested = false;
  Diagnostics diagnostics;
};

/**
 * Centering, mean and covariance of the normalized LSS vector.
 *
 * general_finite_n takes exactly one kernel and uses the finite-n Theta
 * kernels; limit_with_assumptions needs `attest` (diagonal population or
 * alpha_x in {0, 1}); identity_bulk_closed_form needs a bulk at 1.
 */
CltSummary clt_params(const std::vector<KernelFunction>& kernels,
                      const SpikedPopulation& model, const MomentProfile& profile,
                      CltMode mode, bool attest = false, const EngineOptions& options = {});

const char* to_string(CltMode mode) noexcept;

} // namespace spectral_clt

#endif
