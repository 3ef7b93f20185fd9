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

#include "spectral_clt/clt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spectral_clt/errors.hpp"

namespace spectral_clt {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kTwoPiI(0.0, 2.0 * kPi);

struct Tabulated {
  ContourSpec contour;
  std::vector<ContourNode> nodes;
  std::vector<cplx> m;
  std::vector<cplx> dm;
};

void record(Diagnostics* diag, const StieltjesValue& v) {
  if (!diag) return;
  diag->max_solver_iterations = std::max(diag->max_solver_iterations, v.iterations);
  diag->max_solver_residual = std::max(diag->max_solver_residual, v.residual);
}

void record_quadrature(Diagnostics* diag, const std::string& what,
                       const QuadratureResult& q) {
  if (!diag) return;
  diag->quadrature_errors.emplace_back(what, q.error_estimate);
  if (!q.converging) diag->note(what + ": trapezoid refinement is not contracting");
}

std::string node_text(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

Tabulated tabulate(const ContourSpec& contour, double c, const SpectralDistribution& H,
                   Diagnostics* diag) {
  Tabulated t{contour, contour.nodes(), {}, {}};
  t.m.resize(t.nodes.size());
  t.dm.resize(t.nodes.size());
  for (std::size_t j = 0; j < t.nodes.size(); ++j) {
    StieltjesValue v;
    try {
      v = solve_m_underline(t.nodes[j].z, c, H);
    } catch (const ArgumentError&) {
      throw;
    } catch (const Error& e) {
      throw ContourError(std::string(e.what()) + " [at contour node z = " +
                         node_text(t.nodes[j].z) + "]");
    }
    record(diag, v);
    t.m[j] = v.m_underline;
    t.dm[j] = m_underline_derivative(v.m_underline, c, H);
  }
  return t;
}

// Nodes needed so that the side nearest the support edge is resolved at a
// spacing of margin / 6.
int nodes_for(double margin, double half_height, int base, int cap) {
  const double need = 153.6 * std::max(half_height, 0.5) / margin;
  const int n = 16 * static_cast<int>(std::ceil(need / 16.0));
  return std::min(std::max(base, n), std::max(base, cap));
}

// Rectangle around the support of F^{c,H}. The origin is excluded when the
// companion law has an atom there; kernels singular at zero then need c < 1.
ContourSpec bulk_contour(double c, const SpectralDistribution& H, bool singular,
                         const EngineOptions& o, double margin_scale, double half_height,
                         int node_cap, Diagnostics* diag) {
  const SupportInterval s = support_endpoints(c, H);
  if (s.has_gaps && diag)
    diag->note("support has gaps; a single contour encloses the hull");
  const double ceff = effective_ratio(c, H);
  double margin = o.margin;
  if (ceff < 1.0) {
    margin = std::min(o.margin, 0.5 * s.lower);
  } else if (singular) {
    throw ArgumentError(
      "kernel singular at zero needs a bulk ratio below 1; the limiting law reaches the "
      "origin");
  }
  margin *= margin_scale;
  if (margin < 1e-3) {
    std::ostringstream os;
    os << "support lower edge " << s.lower
       << " leaves no room for a contour margin of at least 1e-3 around it";
    throw ContourError(os.str());
  }
  const int nodes = nodes_for(margin, half_height, o.nodes, node_cap);
  ContourSpec contour = ContourSpec::rectangle(s, margin, half_height, nodes);
  if (singular) require_right_half_plane(contour);
  return contour;
}

double real_part_checked(cplx v, const std::string& what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw NumericalError(what + " is not finite");
  if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v.real()))) {
    std::ostringstream os;
    os << what << " has imaginary residual " << v.imag();
    throw NumericalError(os.str());
  }
  return v.real();
}

// Mean integrand factors at one node.
cplx mean_integrand(cplx m, double c, const SpectralDistribution& H, double alpha,
                    double beta) {
  cplx N{}, D{};
  for (const auto& a : H.atoms()) {
    if (a.value <= 0.0) continue;
    const cplx q = 1.0 + a.value * m;
    const cplx r = m * a.value / q;
    D += a.weight * r * r;
    N += a.weight * r * r * m / q;
  }
  const cplx den1 = 1.0 - c * D;
  if (std::abs(den1) < 1e-6)
    throw NumericalError("mean denominator 1 - c int m^2 t^2 / (1 + t m)^2 dH vanishes");
  cplx out = beta * c * N / den1;
  if (alpha != 0.0) {
    const cplx den2 = 1.0 - alpha * c * D;
    if (std::abs(den2) < 1e-6)
      throw NumericalError(
        "mean denominator 1 - alpha_x c int m^2 t^2 / (1 + t m)^2 dH vanishes");
    out += alpha * c * N / (den1 * den2);
  }
  return out;
}

struct KappaResult {
  Eigen::MatrixXd kappa;
  double error = 0.0;
};

// -(1 / 4 pi^2) double integral of f_s(z1) f_t(z2) (Theta0 + a Theta1 + b Theta2)
// for every kernel pair, with the even-subgrid error estimate.
KappaResult kappa_matrix(const std::vector<KernelFunction>& kernels, double c,
                         const SpectralDistribution& H, const BulkCoupling& coupling,
                         const MomentProfile& profile, const EngineOptions& o,
                         Diagnostics* diag) {
  bool singular = false;
  for (const auto& k : kernels) singular = singular || k.singular_at_zero();
  const int cap = 2 * o.nodes;
  const ContourSpec c1 = bulk_contour(c, H, singular, o, 1.0, o.half_height, cap, diag);
  const ContourSpec c2 =
    bulk_contour(c, H, singular, o, 0.5, o.inner_half_height, cap, diag);
  check_nonoverlapping(c1, c2);
  const Tabulated t1 = tabulate(c1, c, H, diag);
  const Tabulated t2 = tabulate(c2, c, H, diag);

  const int h = static_cast<int>(kernels.size());
  const int n1 = static_cast<int>(t1.nodes.size());
  const int n2 = static_cast<int>(t2.nodes.size());
  const int na = static_cast<int>(coupling.atoms.size());
  const double ax = profile.alpha_x, bx = profile.beta_x;

  Eigen::MatrixXcd U2(na, n2), dU2(na, n2);
  for (int j = 0; j < n2; ++j) {
    for (int a = 0; a < na; ++a) {
      const cplx q = 1.0 + coupling.atoms[a] * t2.m[j];
      U2(a, j) = t2.m[j] / q;
      dU2(a, j) = t2.dm[j] / (q * q);
    }
  }
  const Eigen::MatrixXcd KU2 = coupling.K * U2;
  const Eigen::MatrixXcd KdU2 = coupling.K * dU2;
  const Eigen::MatrixXcd LdU2 = coupling.L * dU2;

  Eigen::MatrixXcd A(h, n1), B(h, n2);
  for (int s = 0; s < h; ++s) {
    for (int i = 0; i < n1; ++i) A(s, i) = kernels[s].value(t1.nodes[i].z) * t1.nodes[i].dz;
    for (int j = 0; j < n2; ++j) B(s, j) = kernels[s].value(t2.nodes[j].z) * t2.nodes[j].dz;
  }

  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(h, h), half = full;
  Eigen::VectorXcd u1(na), du1(na);
  Eigen::VectorXcd theta(n2);
  for (int i = 0; i < n1; ++i) {
    const cplx z1 = t1.nodes[i].z, m1 = t1.m[i], dm1 = t1.dm[i];
    for (int a = 0; a < na; ++a) {
      const cplx q = 1.0 + coupling.atoms[a] * m1;
      u1(a) = m1 / q;
      du1(a) = dm1 / (q * q);
    }
    const Eigen::RowVectorXcd rA = u1.transpose() * KU2;
    const Eigen::RowVectorXcd rA1 = du1.transpose() * KU2;
    const Eigen::RowVectorXcd rA2 = u1.transpose() * KdU2;
    const Eigen::RowVectorXcd rA12 = du1.transpose() * KdU2;
    const Eigen::RowVectorXcd rT2 = du1.transpose() * LdU2;
    for (int j = 0; j < n2; ++j) {
      const cplx dmm = m1 - t2.m[j];
      const cplx dz = z1 - t2.nodes[j].z;
      const cplx th0 = dm1 * t2.dm[j] / (dmm * dmm) - 1.0 / (dz * dz);
      cplx th1 = 0.0;
      if (ax != 0.0) {
        const cplx den = 1.0 - ax * rA(j);
        th1 = rA12(j) / den + ax * rA1(j) * rA2(j) / (den * den);
      }
      theta(j) = th0 + ax * th1 + bx * rT2(j);
    }
    for (int t = 0; t < h; ++t) {
      cplx rf = 0.0, rh = 0.0;
      for (int j = 0; j < n2; ++j) {
        const cplx term = theta(j) * B(t, j);
        rf += term;
        if (j % 2 == 0) rh += 2.0 * term;
      }
      for (int s = 0; s < h; ++s) {
        full(s, t) += A(s, i) * rf;
        if (i % 2 == 0) half(s, t) += 2.0 * A(s, i) * rh;
      }
    }
  }
  const double scale = -1.0 / (4.0 * kPi * kPi);
  KappaResult r;
  r.kappa.resize(h, h);
  for (int s = 0; s < h; ++s) {
    for (int t = 0; t < h; ++t) {
      const cplx v = scale * 0.5 * (full(s, t) + full(t, s));
      r.kappa(s, t) = real_part_checked(v, "covariance kappa(" + kernels[s].name() + ", " +
                                             kernels[t].name() + ")");
      r.error = std::max(r.error, std::abs(scale) * std::abs(full(s, t) - half(s, t)));
    }
  }
  if (diag) diag->quadrature_errors.emplace_back("kappa", r.error);
  return r;
}

cplx h_of(cplx z, double sc) { return (1.0 + sc * z) * (1.0 + sc / z); }

} // namespace

const char* to_string(CltMode mode) noexcept {
  switch (mode) {
  case CltMode::general_finite_n: return "general_finite_n";
  case CltMode::limit_with_assumptions: return "limit_with_assumptions";
  case CltMode::identity_bulk_closed_form: return "identity_bulk_closed_form";
  }
  return "unknown";
}

double assemble_s_squared(const SpikedPopulation& model, int k, double theta, double nu,
                          const MomentProfile& profile) {
  if (!(theta > 0.0)) throw ArgumentError("theta must be positive");
  const auto [first, last] = model.index_set(k);
  double num = 0.0;
  for (int j = first; j < last; ++j) {
    num += (profile.alpha_x + 1.0) * theta;
    if (profile.beta_x != 0.0)
      num += profile.beta_x * u_quartic(model, j + 1, j + 1, j + 1, j + 1).real() * nu;
  }
  if (profile.beta_x != 0.0) {
    for (int j1 = first; j1 < last; ++j1)
      for (int j2 = first; j2 < last; ++j2)
        if (j1 != j2)
          num += profile.beta_x * u_quartic(model, j1 + 1, j1 + 1, j2 + 1, j2 + 1).real() * nu;
  }
  return std::max(0.0, num / (theta * theta));
}

std::vector<SpikeParams> spike_params(const SpikedPopulation& model,
                                      const MomentProfile& profile) {
  std::vector<SpikeParams> out;
  const double c = model.c_nM();
  const SpectralDistribution& H2 = model.bulk();
  const SpectralDistribution Hn = h_n_of(model);
  for (int k = 0; k < model.K(); ++k) {
    const auto& s = model.spikes()[k];
    const double dz = inverse_map_derivative(cplx(-1.0 / s.alpha, 0.0), c, H2).real();
    if (!(dz > 0.0)) {
      std::ostringstream os;
      os << "spike " << (k + 1) << " (alpha=" << s.alpha
         << ") does not separate from the bulk support";
      throw ArgumentError(os.str());
    }
    SpikeParams sp{s.alpha, s.multiplicity, 0.0, 0.0, 0.0, 0.0};
    sp.phi = phi_n(s.alpha, model.c_n(), Hn);
    sp.theta = sp.phi * sp.phi * m_underline_2(sp.phi, c, H2);
    const double m = solve_m_underline(cplx(sp.phi, 0.0), c, H2).m_underline.real();
    sp.nu = sp.phi * sp.phi * m * m;
    sp.s_squared = assemble_s_squared(model, k, sp.theta, sp.nu, profile);
    out.push_back(sp);
  }
  return out;
}

double lss_centering(const KernelFunction& f, const SpikedPopulation& model,
                     CenteringPath path, const EngineOptions& options, Diagnostics* diag) {
  const bool full = path == CenteringPath::full;
  const SpectralDistribution H = full ? h_n_of(model) : model.bulk();
  const double c = full ? model.c_n() : model.c_nM();
  const ContourSpec contour =
    bulk_contour(c, H, f.singular_at_zero(), options, 1.0, options.half_height,
                 16 * options.nodes, diag);
  const Tabulated t = tabulate(contour, c, H, diag);
  std::vector<cplx> vals(t.nodes.size());
  for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = f.value(t.nodes[j].z) * t.m[j];
  const QuadratureResult q = integrate_values(vals, contour);
  record_quadrature(diag, "centering " + f.name(), q);
  const double n = model.n();
  double value = real_part_checked(-n / kTwoPiI * q.value, "centering of " + f.name());
  if (effective_ratio(c, H) > 1.0) value += (model.p() - model.M() - n) * f.value(0.0);
  return value;
}

double m_correction(const KernelFunction& f, const SpikedPopulation& model,
                    const EngineOptions& options, Diagnostics* diag) {
  if (model.M() == 0) return 0.0;
  const double c = model.c_n();
  const SpectralDistribution& H = model.bulk();
  const ContourSpec contour =
    bulk_contour(c, H, f.singular_at_zero(), options, 1.0, options.half_height,
                 16 * options.nodes, diag);
  const Tabulated t = tabulate(contour, c, H, diag);
  std::vector<cplx> vals(t.nodes.size());
  for (std::size_t j = 0; j < vals.size(); ++j) {
    if (std::abs(t.m[j]) < 1e-8)
      throw ContourError("m_underline nearly vanishes at contour node " +
                         node_text(t.nodes[j].z));
    vals[j] = f.value(t.nodes[j].z) * t.dm[j] / t.m[j];
  }
  const QuadratureResult q = integrate_values(vals, contour);
  record_quadrature(diag, "m_correction " + f.name(), q);
  double value = real_part_checked(static_cast<double>(model.M()) / kTwoPiI * q.value,
                                   "M-correction of " + f.name());
  // Without an atom at zero the contour also encloses the origin, and the
  // M extra zero eigenvalues of the full matrix contribute M f(0).
  if (effective_ratio(c, H) >= 1.0) value += model.M() * f.value(0.0);
  return value;
}

double bulk_mean(const KernelFunction& f, const SpikedPopulation& model,
                 const MomentProfile& profile, const EngineOptions& options,
                 Diagnostics* diag) {
  if (profile.alpha_x == 0.0 && profile.beta_x == 0.0) return 0.0;
  const double c = model.c_nM();
  const SpectralDistribution& H = model.bulk();
  const ContourSpec contour =
    bulk_contour(c, H, f.singular_at_zero(), options, 1.0, options.half_height,
                 16 * options.nodes, diag);
  const Tabulated t = tabulate(contour, c, H, diag);
  std::vector<cplx> vals(t.nodes.size());
  for (std::size_t j = 0; j < vals.size(); ++j)
    vals[j] = f.value(t.nodes[j].z) *
              mean_integrand(t.m[j], c, H, profile.alpha_x, profile.beta_x);
  const QuadratureResult q = integrate_values(vals, contour);
  record_quadrature(diag, "mean " + f.name(), q);
  return real_part_checked(-1.0 / kTwoPiI * q.value, "mean of " + f.name());
}

BulkCoupling limit_coupling(double c, const SpectralDistribution& H) {
  BulkCoupling b;
  for (const auto& a : H.atoms())
    if (a.value > 0.0) b.atoms.push_back(a.value);
  const int na = static_cast<int>(b.atoms.size());
  b.K = Eigen::MatrixXcd::Zero(na, na);
  int i = 0;
  for (const auto& a : H.atoms()) {
    if (a.value <= 0.0) continue;
    b.K(i, i) = c * a.weight * a.value * a.value;
    ++i;
  }
  b.L = b.K;
  return b;
}

BulkCoupling finite_coupling(const SpikedPopulation& model) {
  if (model.diagonal()) return limit_coupling(model.c_nM(), model.bulk());
  if (model.p() > 2000) throw ArgumentError("dense finite-n kernels need p <= 2000");
  const int p = model.p(), M = model.M(), q = p - M;
  const double n = model.n();
  const Eigen::MatrixXcd U2 = model.full_u().rightCols(q);
  const auto values = model.bulk_values();
  const auto& atoms = model.bulk().atoms();
  std::vector<int> group(q);
  for (int a = 0; a < q; ++a) {
    int g = 0;
    while (atoms[g].value < values[a] &&
           std::abs(atoms[g].value - values[a]) > 1e-12 * values[a])
      ++g;
    group[a] = g;
  }
  const int na = static_cast<int>(atoms.size());
  const Eigen::MatrixXcd S = U2.adjoint() * U2.conjugate();
  Eigen::MatrixXd Kg = Eigen::MatrixXd::Zero(na, na);
  for (int b = 0; b < q; ++b)
    for (int a = 0; a < q; ++a) Kg(group[a], group[b]) += std::norm(S(a, b));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, na);
  for (int a = 0; a < q; ++a) G.col(group[a]) += U2.col(a).cwiseAbs2();
  const Eigen::MatrixXd Lg = G.transpose() * G;

  BulkCoupling out;
  std::vector<int> keep;
  for (int g = 0; g < na; ++g)
    if (atoms[g].value > 0.0) keep.push_back(g);
  const int nk = static_cast<int>(keep.size());
  out.K.resize(nk, nk);
  out.L.resize(nk, nk);
  for (int x = 0; x < nk; ++x) {
    out.atoms.push_back(atoms[keep[x]].value);
    for (int y = 0; y < nk; ++y) {
      const double tt = atoms[keep[x]].value * atoms[keep[y]].value / n;
      out.K(x, y) = tt * Kg(keep[x], keep[y]);
      out.L(x, y) = tt * Lg(keep[x], keep[y]);
    }
  }
  return out;
}

double bulk_cov_limit(const KernelFunction& fs, const KernelFunction& ft, double c,
                      const SpectralDistribution& H, const MomentProfile& profile,
                      const EngineOptions& options, Diagnostics* diag) {
  const auto r =
    kappa_matrix({fs, ft}, c, H, limit_coupling(c, H), profile, options, diag);
  return r.kappa(0, 1);
}

IdentityBulkIntegrals identity_bulk_I1_I2_J1_J2(const KernelFunction& fs,
                                            const KernelFunction& ft, double c,
                                            int nodes) {
  if (!(c > 0.0)) throw ArgumentError("c must be positive");
  const bool singular = fs.singular_at_zero() || ft.singular_at_zero();
  if (singular && !(c < 1.0))
    throw ArgumentError("kernel singular at zero is not finite on the MP interval for c >= 1");
  const double sc = std::sqrt(c);
  // Analyticity annulus of f(h(z)) is sqrt(c) < |z| < 1/sqrt(c) for kernels
  // singular at zero; entire kernels only see the pole at the origin.
  const double s = singular ? -std::log(sc) : std::log(2.0);

  const auto fh = [sc](const KernelFunction& f) {
    return [&f, sc](cplx z) { return f.value(h_of(z, sc)); };
  };
  const auto fsh = fh(fs);
  const auto fth = fh(ft);

  IdentityBulkIntegrals out{};
  const ContourSpec outer = ContourSpec::circle(std::exp(s / 2.0), 0.0, nodes);
  const cplx i1 = r_limit([&](double r) {
    const double rr = 1.0 / (r * r);
    return integrate([&](cplx z) { return fsh(z) * (z / (z * z - rr) - 1.0 / z); }, outer)
             .value /
           kTwoPiI;
  });
  out.I1 = real_part_checked(i1, "I1");

  const ContourSpec unit = ContourSpec::circle(1.0, 0.0, nodes);
  out.I2 = real_part_checked(
    integrate([&](cplx z) { return fsh(z) / (z * z * z); }, unit).value / kTwoPiI, "I2");

  const ContourSpec c1 = ContourSpec::circle(std::exp(-s / 3.0), 0.0, nodes);
  const ContourSpec c2 = ContourSpec::circle(std::exp(s / 3.0), 0.0, nodes);
  const auto n1 = c1.nodes();
  const auto n2 = c2.nodes();
  std::vector<cplx> f1(n1.size()), f2(n2.size());
  for (std::size_t i = 0; i < n1.size(); ++i) f1[i] = fsh(n1[i].z);
  for (std::size_t j = 0; j < n2.size(); ++j) f2[j] = fth(n2[j].z);
  const double scale = -1.0 / (4.0 * kPi * kPi);
  const cplx j1 = r_limit([&](double r) {
    return scale * double_integral_indexed(
                     [&](int i, int j) {
                       const cplx d = n1[i].z - r * n2[j].z;
                       return f1[i] * f2[j] / (d * d);
                     },
                     c1, c2)
                     .value;
  });
  out.J1 = real_part_checked(j1, "J1");

  const cplx a = integrate([&](cplx z) { return fsh(z) / (z * z); }, unit).value;
  const cplx b = integrate([&](cplx z) { return fth(z) / (z * z); }, unit).value;
  out.J2 = real_part_checked(scale * a * b, "J2");
  return out;
}

ThetaValues theta_from(cplx z1, cplx m1, cplx dm1, cplx z2, cplx m2, cplx dm2,
                       const BulkCoupling& coupling, double alpha_x) {
  const int na = static_cast<int>(coupling.atoms.size());
  Eigen::VectorXcd u1(na), du1(na), u2(na), du2(na);
  for (int a = 0; a < na; ++a) {
    const cplx q1 = 1.0 + coupling.atoms[a] * m1;
    const cplx q2 = 1.0 + coupling.atoms[a] * m2;
    u1(a) = m1 / q1;
    du1(a) = dm1 / (q1 * q1);
    u2(a) = m2 / q2;
    du2(a) = dm2 / (q2 * q2);
  }
  ThetaValues v;
  v.A = (u1.transpose() * coupling.K * u2)(0, 0);
  const cplx A1 = (du1.transpose() * coupling.K * u2)(0, 0);
  const cplx A2 = (u1.transpose() * coupling.K * du2)(0, 0);
  const cplx A12 = (du1.transpose() * coupling.K * du2)(0, 0);
  const cplx den = 1.0 - alpha_x * v.A;
  v.theta1 = A12 / den + alpha_x * A1 * A2 / (den * den);
  v.theta2 = (du1.transpose() * coupling.L * du2)(0, 0);
  const cplx dm = m1 - m2, dz = z1 - z2;
  v.theta0 = dm1 * dm2 / (dm * dm) - 1.0 / (dz * dz);
  return v;
}

ThetaValues theta_kernels(cplx z1, cplx z2, const SpikedPopulation& model,
                          const MomentProfile& profile) {
  if (std::abs(z1 - z2) < 1e-4)
    throw ArgumentError("theta kernels need |z1 - z2| >= 1e-4");
  const double c = model.c_nM();
  const auto& H = model.bulk();
  const cplx m1 = solve_m_underline(z1, c, H).m_underline;
  const cplx m2 = solve_m_underline(z2, c, H).m_underline;
  return theta_from(z1, m1, m_underline_derivative(m1, c, H), z2, m2,
                    m_underline_derivative(m2, c, H), finite_coupling(model),
                    profile.alpha_x);
}

CltSummary clt_params(const std::vector<KernelFunction>& kernels,
                      const SpikedPopulation& model, const MomentProfile& profile,
                      CltMode mode, bool attest, const EngineOptions& options) {
  if (kernels.empty()) throw ArgumentError("at least one kernel is required");
  if (mode == CltMode::general_finite_n && kernels.size() != 1)
    throw ArgumentError(
      "general_finite_n covers a single statistic; use limit_with_assumptions for several "
      "kernels");
  if (mode == CltMode::limit_with_assumptions && !attest)
    throw ArgumentError(
      "limit_with_assumptions needs the caller's attestation that the population is "
      "diagonal or the entries have alpha_x in {0, 1}");
  if (mode == CltMode::identity_bulk_closed_form && !model.bulk().is_point_mass_at(1.0))
    throw ArgumentError("identity_bulk_closed_form needs a bulk concentrated at 1");

  CltSummary out;
  out.mode = mode;
  out.attested = attest;
  Diagnostics* diag = &out.diagnostics;
  for (const auto& d : model.diagnostics()) diag->note(d);

  out.spikes = spike_params(model, profile);
  const SupportInterval supp = support_endpoints(model.c_nM(), model.bulk());
  for (const auto& sp : out.spikes) {
    if (sp.phi < supp.upper + options.margin) {
      std::ostringstream os;
      os << "outlier location phi = " << sp.phi << " lies inside the bulk contour";
      diag->note(os.str());
    }
  }

  const double c = model.c_nM();
  const double sqrt_n = std::sqrt(static_cast<double>(model.n()));
  const int h = static_cast<int>(kernels.size());
  for (const auto& f : kernels) {
    KernelSummary ks;
    ks.name = f.name();
    ks.centering_bulk = lss_centering(f, model, CenteringPath::reduced, options, diag);
    for (const auto& sp : out.spikes) {
      ks.centering_spike += sp.multiplicity * f.value(sp.phi);
      const double w = sp.phi * f.derivative(sp.phi) / sqrt_n;
      ks.varpi.push_back(w);
      ks.spike_var += w * w * sp.s_squared;
    }
    ks.m_correction = m_correction(f, model, options, diag);
    if (mode == CltMode::identity_bulk_closed_form) {
      const auto r5 = identity_bulk_I1_I2_J1_J2(f, f, c, options.nodes);
      ks.mu = profile.alpha_x * r5.I1 + profile.beta_x * r5.I2;
    } else {
      ks.mu = bulk_mean(f, model, profile, options, diag);
    }
    out.kernels.push_back(std::move(ks));
  }

  out.kappa.resize(h, h);
  if (mode == CltMode::identity_bulk_closed_form) {
    for (int s = 0; s < h; ++s) {
      for (int t = s; t < h; ++t) {
        const auto r5 = identity_bulk_I1_I2_J1_J2(kernels[s], kernels[t], c, options.nodes);
        out.kappa(s, t) = out.kappa(t, s) =
          (profile.alpha_x + 1.0) * r5.J1 + profile.beta_x * r5.J2;
      }
    }
  } else {
    const BulkCoupling coupling = mode == CltMode::general_finite_n
                                    ? finite_coupling(model)
                                    : limit_coupling(c, model.bulk());
    out.kappa = kappa_matrix(kernels, c, model.bulk(), coupling, profile, options, diag).kappa;
  }

  for (int l = 0; l < h; ++l) {
    double& kll = out.kappa(l, l);
    if (kll < 0.0) {
      if (kll < -1e-8) {
        std::ostringstream os;
        os << "bulk variance of " << kernels[l].name() << " is negative (" << kll << ")";
        throw NumericalError(os.str());
      }
      diag->note("bulk variance of " + kernels[l].name() + " clamped from " +
                 std::to_string(kll) + " to 0");
      kll = 0.0;
    }
    auto& ks = out.kernels[l];
    ks.bulk_var = kll;
    ks.sigma_sq = ks.spike_var + ks.bulk_var;
    if (!(ks.sigma_sq > 0.0))
      throw NumericalError("total variance of " + ks.name + " is not positive");
  }

  out.psi.resize(h, h);
  for (int s = 0; s < h; ++s) {
    for (int t = 0; t < h; ++t) {
      double num = out.kappa(s, t);
      for (std::size_t k = 0; k < out.spikes.size(); ++k)
        num += out.kernels[s].varpi[k] * out.kernels[t].varpi[k] * out.spikes[k].s_squared;
      out.psi(s, t) =
        s == t ? 1.0
               : std::clamp(num / std::sqrt(out.kernels[s].sigma_sq * out.kernels[t].sigma_sq),
                            -1.0, 1.0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.psi, Eigen::EigenvaluesOnly);
  out.psi_min_eigenvalue = es.eigenvalues().minCoeff();
  if (out.psi_min_eigenvalue < -1e-8)
    diag->note("correlation matrix is not positive semidefinite");
  return out;
}

} // namespace spectral_clt
