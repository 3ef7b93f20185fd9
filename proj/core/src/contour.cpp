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

#include "spectral_clt/contour.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spectral_clt/errors.hpp"

namespace spectral_clt {

namespace {

constexpr double kPi = std::numbers::pi;

// Grading with psi'(u) = (16/5) sin^6(pi u): every derivative up to the
// fifth vanishes at the corners.
double grade(double u) {
  return u - 3.0 / (4.0 * kPi) * std::sin(2.0 * kPi * u) +
         3.0 / (20.0 * kPi) * std::sin(4.0 * kPi * u) -
         1.0 / (60.0 * kPi) * std::sin(6.0 * kPi * u);
}

double grade_derivative(double u) {
  const double s = std::sin(kPi * u);
  const double s2 = s * s;
  return 16.0 / 5.0 * s2 * s2 * s2;
}

void validate_nodes(int nodes) {
  if (nodes < 256 || nodes % 2 != 0)
    throw ArgumentError("contour node count must be even and at least 256");
}

std::string where(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << " [at contour node z = (" << z.real() << ", " << z.imag() << ")]";
  return os.str();
}

cplx eval_at(const ContourFn& f, cplx z) {
  try {
    return f(z);
  } catch (const ArgumentError& e) {
    throw ArgumentError(e.what() + where(z));
  } catch (const Error& e) {
    throw ContourError(e.what() + where(z));
  }
}

// Full, even-index and every-fourth partial sums of a periodic trapezoid.
struct Levels {
  cplx full{};
  cplx half{};
  cplx quarter{};
  double magnitude = 0.0;
};

QuadratureResult finish(const Levels& s, int n1, int n2) {
  QuadratureResult r;
  r.value = s.full;
  const cplx half = s.half;
  r.error_estimate = std::abs(s.full - half);
  if (n1 % 4 == 0 && n2 % 4 == 0) {
    const double d2 = std::abs(half - s.quarter);
    const double floor = 1e-13 * std::max(1.0, s.magnitude);
    r.converging = r.error_estimate <= floor || r.error_estimate <= 10.0 * d2;
  }
  return r;
}

} // namespace

ContourSpec ContourSpec::rectangle(const SupportInterval& interval, double margin,
                                   double half_height, int nodes) {
  validate_nodes(nodes);
  if (!(interval.lower <= interval.upper))
    throw ArgumentError("rectangle interval must satisfy lower <= upper");
  if (!(margin >= 1e-3)) throw ArgumentError("rectangle margin must be at least 1e-3");
  if (!(half_height > 0.0)) throw ArgumentError("rectangle half-height must be positive");
  ContourSpec c;
  c.kind_ = Kind::rectangle;
  c.nodes_ = nodes;
  c.interval_ = interval;
  c.margin_ = margin;
  c.left_ = interval.lower - margin;
  c.right_ = interval.upper + margin;
  c.v_ = half_height;
  return c;
}

ContourSpec ContourSpec::circle(double radius, cplx center, int nodes) {
  validate_nodes(nodes);
  if (!(radius > 0.0)) throw ArgumentError("circle radius must be positive");
  ContourSpec c;
  c.kind_ = Kind::circle;
  c.nodes_ = nodes;
  c.radius_ = radius;
  c.center_ = center;
  return c;
}

std::vector<ContourNode> ContourSpec::nodes() const {
  std::vector<ContourNode> out(nodes_);
  const double inv = 1.0 / nodes_;
  if (kind_ == Kind::circle) {
    for (int j = 0; j < nodes_; ++j) {
      const cplx e = std::polar(1.0, 2.0 * kPi * j * inv);
      out[j] = {center_ + radius_ * e, cplx(0.0, 2.0 * kPi) * radius_ * e * inv};
    }
    return out;
  }
  const cplx corner[5] = {{left_, -v_}, {right_, -v_}, {right_, v_}, {left_, v_}, {left_, -v_}};
  for (int j = 0; j < nodes_; ++j) {
    const double s4 = 4.0 * j * inv;
    const int side = std::min(3, static_cast<int>(s4));
    const double u = s4 - side;
    const cplx edge = corner[side + 1] - corner[side];
    out[j] = {corner[side] + edge * grade(u), 4.0 * edge * grade_derivative(u) * inv};
  }
  return out;
}

bool ContourSpec::contains(cplx z) const {
  if (kind_ == Kind::circle) return std::abs(z - center_) < radius_;
  return z.real() > left_ && z.real() < right_ && std::abs(z.imag()) < v_;
}

double ContourSpec::min_real() const noexcept {
  return kind_ == Kind::circle ? center_.real() - radius_ : left_;
}

QuadratureResult integrate_values(const std::vector<cplx>& values,
                                  const ContourSpec& contour) {
  const auto nodes = contour.nodes();
  if (values.size() != nodes.size())
    throw ArgumentError("integrand table does not match the contour node count");
  Levels s;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const cplx term = values[j] * nodes[j].dz;
    s.full += term;
    if (j % 2 == 0) s.half += 2.0 * term;
    if (j % 4 == 0) s.quarter += 4.0 * term;
    s.magnitude += std::abs(term);
  }
  return finish(s, contour.node_count(), 4);
}

QuadratureResult integrate(const ContourFn& f, const ContourSpec& contour) {
  const auto nodes = contour.nodes();
  std::vector<cplx> values(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) values[j] = eval_at(f, nodes[j].z);
  return integrate_values(values, contour);
}

QuadratureResult double_integral_indexed(const std::function<cplx(int, int)>& g,
                                         const ContourSpec& c1, const ContourSpec& c2) {
  check_nonoverlapping(c1, c2);
  const auto n1 = c1.nodes();
  const auto n2 = c2.nodes();
  Levels s;
  for (std::size_t i = 0; i < n1.size(); ++i) {
    Levels row;
    for (std::size_t j = 0; j < n2.size(); ++j) {
      cplx v;
      try {
        v = g(static_cast<int>(i), static_cast<int>(j));
      } catch (const ArgumentError& e) {
        throw ArgumentError(e.what() + where(n1[i].z) + where(n2[j].z));
      } catch (const Error& e) {
        throw ContourError(e.what() + where(n1[i].z) + where(n2[j].z));
      }
      const cplx term = v * n2[j].dz;
      row.full += term;
      if (j % 2 == 0) row.half += 2.0 * term;
      if (j % 4 == 0) row.quarter += 4.0 * term;
      row.magnitude += std::abs(term);
    }
    const cplx w = n1[i].dz;
    s.full += row.full * w;
    if (i % 2 == 0) s.half += 2.0 * row.half * w;
    if (i % 4 == 0) s.quarter += 4.0 * row.quarter * w;
    s.magnitude += row.magnitude * std::abs(w);
  }
  return finish(s, c1.node_count(), c2.node_count());
}

QuadratureResult double_integral(const ContourFn2& g, const ContourSpec& c1,
                                 const ContourSpec& c2) {
  const auto n1 = c1.nodes();
  const auto n2 = c2.nodes();
  return double_integral_indexed([&](int i, int j) { return g(n1[i].z, n2[j].z); }, c1,
                                 c2);
}

void check_nonoverlapping(const ContourSpec& c1, const ContourSpec& c2) {
  using K = ContourSpec::Kind;
  if (c1.kind() == K::rectangle && c2.kind() == K::rectangle) {
    if (c1.half_height() == c2.half_height())
      throw ArgumentError("double-integral rectangles must have distinct half-heights");
    const bool in12 = c2.left() < c1.left() && c1.right() < c2.right() &&
                      c1.half_height() < c2.half_height();
    const bool in21 = c1.left() < c2.left() && c2.right() < c1.right() &&
                      c2.half_height() < c1.half_height();
    const bool apart = c1.right() < c2.left() || c2.right() < c1.left();
    if (!(in12 || in21 || apart))
      throw ArgumentError("double-integral rectangles intersect; nest or separate them");
    return;
  }
  if (c1.kind() == K::circle && c2.kind() == K::circle) {
    const double d = std::abs(c1.center() - c2.center());
    const double r1 = c1.radius(), r2 = c2.radius();
    if (!(d + std::min(r1, r2) < std::max(r1, r2) || d > r1 + r2))
      throw ArgumentError("double-integral circles intersect; nest or separate them");
    return;
  }
  // Mixed kinds: every node of one curve on a single side of the other.
  const auto side_ok = [](const ContourSpec& a, const ContourSpec& b) {
    int inside = 0;
    const auto nodes = a.nodes();
    for (const auto& n : nodes) inside += b.contains(n.z) ? 1 : 0;
    return inside == 0 || inside == static_cast<int>(nodes.size());
  };
  if (!side_ok(c1, c2) || !side_ok(c2, c1))
    throw ArgumentError("double-integral contours intersect; nest or separate them");
}

void require_right_half_plane(const ContourSpec& contour) {
  if (!(contour.min_real() > 0.0)) {
    std::ostringstream os;
    os << "contour reaches Re z = " << contour.min_real()
       << " <= 0, crossing the branch cut of a kernel singular at zero";
    throw ArgumentError(os.str());
  }
}

ContourSpec default_rectangle(const SupportInterval& interval, bool log_singular,
                              double margin, double half_height, int nodes) {
  auto c = ContourSpec::rectangle(interval, margin, half_height, nodes);
  if (log_singular) require_right_half_plane(c);
  return c;
}

cplx r_limit(const std::function<cplx(double)>& F) {
  return 2.0 * F(1.0 + 5e-5) - F(1.0 + 1e-4);
}

} // namespace spectral_clt
