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

#ifndef SPECTRAL_CLT_STIELTJES_HPP
#define SPECTRAL_CLT_STIELTJES_HPP

#include "spectral_clt/spectral_model.hpp"

namespace spectral_clt {

struct StieltjesValue {
  cplx z;
  cplx m_underline;
  int iterations = 0;
  double residual = 0.0;
};

struct SupportInterval {
  double lower;
  double upper;
  /// The limiting law splits into several intervals; [lower, upper] is the hull.
  bool has_gaps = false;
};

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

/**
 * Companion Stieltjes transform of F^{c,H}.
 *
 * Solves m = -1/(z - c * int t/(1+tm) dH) by fixed-point iteration started
 * at -1/z, damped by 0.5 once the residual stops shrinking, then polished
 * with guarded Newton steps. Real z must lie outside the closed support
 * hull; z = 0 is rejected when F^{c,H} has an atom there.
 */
StieltjesValue solve_m_underline(cplx z, double c, const SpectralDistribution& H,
                                 const SolverOptions& options = {});

/// |m + 1/(z - c int t/(1+tm) dH)|.
double silverstein_residual(cplx z, cplx m, double c, const SpectralDistribution& H);

/// z(m) = -1/m + c int t/(1+tm) dH, the inverse of m_underline.
cplx inverse_map(cplx m, double c, const SpectralDistribution& H);

/// dz/dm = 1/m^2 - c int t^2/(1+tm)^2 dH.
cplx inverse_map_derivative(cplx m, double c, const SpectralDistribution& H);

/// m_underline'(z) given the solved value m = m_underline(z).
cplx m_underline_derivative(cplx m, double c, const SpectralDistribution& H);

/// int (lambda - x)^{-2} dF_underline for real lambda outside the support
/// (margin 1e-6), by complex-step differentiation of the solver.
double m_underline_2(double lambda, double c, const SpectralDistribution& H);

/// phi(x) = x (1 + c int t/(x - t) dH(t)) for x above every atom.
double phi_n(double alpha, double c_n, const SpectralDistribution& H_n);

/// Hull of the support of F^{c,H} away from the atom at zero.
SupportInterval support_endpoints(double c, const SpectralDistribution& H);

/// c times the mass of H on (0, inf).
double effective_ratio(double c, const SpectralDistribution& H);

} // namespace spectral_clt

#endif
