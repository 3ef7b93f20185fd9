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

#include "spectral_clt/stieltjes.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "spectral_clt/errors.hpp"

namespace spectral_clt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int t/(1+tm) dH and int t^2/(1+tm)^2 dH over positive atoms.
template <class T>
T first_sum(const SpectralDistribution& H, T m) {
  T acc{};
  for (const auto& a : H.atoms())
    if (a.value > 0.0) acc += a.weight * a.value / (1.0 + a.value * m);
  return acc;
}

template <class T>
T second_sum(const SpectralDistribution& H, T m) {
  T acc{};
  for (const auto& a : H.atoms()) {
    if (a.value > 0.0) {
      const T d = 1.0 + a.value * m;
      acc += a.weight * a.value * a.value / (d * d);
    }
  }
  return acc;
}

double zprime(double m, double c, const SpectralDistribution& H) {
  return 1.0 / (m * m) - c * second_sum(H, m);
}

double zmap(double m, double c, const SpectralDistribution& H) {
  return -1.0 / m + c * first_sum(H, m);
}

double root(const std::function<double(double)>& f, double lo, double hi, const char* what) {
  const double flo = f(lo), fhi = f(hi);
  if (!(flo * fhi < 0.0)) {
    std::ostringstream os;
    os << "root bracket failed for " << what << " on [" << lo << ", " << hi << "]";
    throw SolverError(os.str(), std::min(std::abs(flo), std::abs(fhi)));
  }
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                             boost::math::tools::eps_tolerance<double>(52),
                                             iters);
  return 0.5 * (r.first + r.second);
}

// Critical points of z(m): the upper edge lies on (-1/tmax, 0), the lower
// edge on (-inf, -1/tmin) when c_eff < 1 and on (0, inf) when c_eff > 1.
double upper_critical(double c, const SpectralDistribution& H) {
  const double tmax = H.max_atom();
  return root([&](double m) { return zprime(m, c, H); }, -(1.0 - 1e-12) / tmax,
              -1e-12 / tmax, "upper edge");
}

double lower_critical(double c, const SpectralDistribution& H) {
  const double tmin = H.min_positive_atom();
  const auto f = [&](double m) { return zprime(m, c, H); };
  if (effective_ratio(c, H) < 1.0) {
    double lo = -2.0 / tmin;
    while (f(lo) <= 0.0) lo *= 2.0;
    return root(f, lo, -(1.0 + 1e-12) / tmin, "lower edge");
  }
  double hi = 1.0 / tmin;
  while (f(hi) >= 0.0) hi *= 2.0;
  return root(f, 1e-12 / H.max_atom(), hi, "lower edge");
}

// Real m_underline(x) for x outside the support hull, found on the branch
// where z(m) is increasing.
double bracket_real(double x, double c, const SpectralDistribution& H,
                    const SupportInterval& s) {
  const auto g = [&](double m) { return zmap(m, c, H) - x; };
  const double ceff = effective_ratio(c, H);
  double a = 0.0, b = 0.0;
  if (x > s.upper) {
    a = upper_critical(c, H);
    b = 0.5 * a;
    while (g(b) < 0.0) b *= 0.5;
  } else if (x < 0.0 && ceff <= 1.0) {
    a = b = 1.0 / H.max_atom();
    while (g(a) > 0.0) a *= 0.5;
    while (g(b) < 0.0) b *= 2.0;
  } else if (ceff < 1.0) {
    b = lower_critical(c, H);
    a = 2.0 * b;
    while (g(a) > 0.0) a *= 2.0;
  } else {
    b = lower_critical(c, H);
    a = 0.5 * b;
    while (g(a) > 0.0) a *= 0.5;
  }
  return root(g, a, b, "real Stieltjes value");
}

// Newton correction for F(m) = m + 1/(z - c S(m)).
cplx newton_step(cplx z, cplx m, double c, const SpectralDistribution& H) {
  const cplx u = z - c * first_sum(H, m);
  const cplx F = m + 1.0 / u;
  const cplx dF = 1.0 - c * second_sum(H, m) / (u * u);
  return m - F / dF;
}

bool on_branch(cplx z, cplx m, double c, const SpectralDistribution& H) {
  if (z.imag() != 0.0) {
    if (std::abs(z.imag()) < 1e-14) return true;
    return m.imag() * z.imag() > 0.0;
  }
  return m.imag() == 0.0 && zprime(m.real(), c, H) > 0.0;
}

} // namespace

double effective_ratio(double c, const SpectralDistribution& H) {
  return c * (1.0 - H.mass_at_zero());
}

cplx inverse_map(cplx m, double c, const SpectralDistribution& H) {
  return -1.0 / m + c * first_sum(H, m);
}

cplx inverse_map_derivative(cplx m, double c, const SpectralDistribution& H) {
  return 1.0 / (m * m) - c * second_sum(H, m);
}

cplx m_underline_derivative(cplx m, double c, const SpectralDistribution& H) {
  const cplx d = inverse_map_derivative(m, c, H);
  if (d == 0.0) throw NumericalError("m_underline derivative: dz/dm vanishes");
  return 1.0 / d;
}

double silverstein_residual(cplx z, cplx m, double c, const SpectralDistribution& H) {
  return std::abs(m + 1.0 / (z - c * first_sum(H, m)));
}

StieltjesValue solve_m_underline(cplx z, double c, const SpectralDistribution& H,
                                 const SolverOptions& options) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("c must be positive");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw ArgumentError("z must be finite");
  if (H.max_atom() <= 0.0) throw ArgumentError("H has no positive atom");

  std::optional<SupportInterval> supp;
  if (z.imag() == 0.0) {
    supp = support_endpoints(c, H);
    const double x = z.real();
    if (x >= supp->lower && x <= supp->upper) {
      std::ostringstream os;
      os << "real z = " << x << " lies in the support [" << supp->lower << ", "
         << supp->upper << "]";
      throw ArgumentError(os.str());
    }
    if (x == 0.0 && effective_ratio(c, H) < 1.0)
      throw ArgumentError("real z = 0 is an atom of the companion law for c < 1");
  }

  StieltjesValue out{z, -1.0 / z, 0, kInf};
  cplx m = out.m_underline;
  double res = silverstein_residual(z, m, c, H);
  bool damped = false;
  const double newton_gate = 1e-6;
  int it = 0;
  for (; it < options.max_iterations && res > options.tolerance; ++it) {
    if (res < newton_gate) {
      const cplx mn = newton_step(z, m, c, H);
      const double rn = silverstein_residual(z, mn, c, H);
      if (rn < res && on_branch(z, mn, c, H)) {
        m = mn;
        res = rn;
        continue;
      }
    }
    cplx next = -1.0 / (z - c * first_sum(H, m));
    if (damped) next = 0.5 * (m + next);
    const double rnext = silverstein_residual(z, next, c, H);
    if (rnext > res) damped = true;
    m = next;
    res = rnext;
  }
  // Two extra Newton steps settle digits hidden below the residual floor,
  // which the complex-step derivative reads off the imaginary part.
  for (int k = 0; k < 2 && res <= options.tolerance; ++k) {
    const cplx mn = newton_step(z, m, c, H);
    const double rn = silverstein_residual(z, mn, c, H);
    if (rn <= std::max(res, 1e-15) && on_branch(z, mn, c, H)) {
      m = mn;
      res = rn;
    }
  }

  if (z.imag() == 0.0 && (res > options.tolerance || !on_branch(z, m, c, H))) {
    m = cplx(bracket_real(z.real(), c, H, *supp), 0.0);
    res = silverstein_residual(z, m, c, H);
  }
  if (res > options.tolerance || !std::isfinite(res)) {
    std::ostringstream os;
    os << "Silverstein fixed point did not converge at z = " << z << " after " << it
       << " iterations";
    throw SolverError(os.str(), res);
  }
  if (!on_branch(z, m, c, H)) {
    std::ostringstream os;
    os << "Silverstein solver left the Herglotz branch at z = " << z;
    throw SolverError(os.str(), res);
  }
  out.m_underline = m;
  out.iterations = it;
  out.residual = res;
  return out;
}

double m_underline_2(double lambda, double c, const SpectralDistribution& H) {
  const SupportInterval s = support_endpoints(c, H);
  constexpr double margin = 1e-6;
  const bool right = lambda > s.upper + margin;
  const bool left = lambda < s.lower - margin;
  if (!(right || left)) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is within " << margin << " of the support ["
       << s.lower << ", " << s.upper << "]";
    throw ArgumentError(os.str());
  }
  if (left && effective_ratio(c, H) < 1.0 && std::abs(lambda) <= margin)
    throw ArgumentError("lambda too close to the atom at zero");
  constexpr double h = 1e-20;
  const auto v = solve_m_underline(cplx(lambda, h), c, H);
  return v.m_underline.imag() / h;
}

double phi_n(double alpha, double c_n, const SpectralDistribution& H_n) {
  if (!(alpha > H_n.max_atom()))
    throw ArgumentError("phi_n needs alpha above every atom of H_n");
  if (!(c_n >= 0.0)) throw ArgumentError("c_n must be nonnegative");
  const double integral =
    H_n.integrate([alpha](double t) { return t / (alpha - t); });
  return alpha * (1.0 + c_n * integral);
}

SupportInterval support_endpoints(double c, const SpectralDistribution& H) {
  if (!(c > 0.0)) throw ArgumentError("c must be positive");
  const double tmax = H.max_atom();
  if (!(tmax > 0.0)) throw ArgumentError("H has no positive atom");
  const double ceff = effective_ratio(c, H);
  const double tmin = H.min_positive_atom();
  if (tmin == tmax) {
    const double r = std::sqrt(ceff);
    const double lower = ceff == 1.0 ? 0.0 : tmax * (1.0 - r) * (1.0 - r);
    return {lower, tmax * (1.0 + r) * (1.0 + r), false};
  }

  SupportInterval s{0.0, zmap(upper_critical(c, H), c, H), false};
  if (std::abs(ceff - 1.0) > 1e-12) s.lower = zmap(lower_critical(c, H), c, H);

  // z increasing somewhere between consecutive poles marks a gap.
  std::vector<double> ts;
  for (const auto& a : H.atoms())
    if (a.value > 0.0) ts.push_back(a.value);
  for (std::size_t i = 0; i + 1 < ts.size() && !s.has_gaps; ++i) {
    const double left = -1.0 / ts[i], right = -1.0 / ts[i + 1];
    for (int j = 1; j < 200; ++j) {
      const double m = left + (right - left) * j / 200.0;
      if (zprime(m, c, H) > 0.0) {
        s.has_gaps = true;
        break;
      }
    }
  }
  return s;
}

} // namespace spectral_clt
