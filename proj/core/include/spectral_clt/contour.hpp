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

#ifndef SPECTRAL_CLT_CONTOUR_HPP
#define SPECTRAL_CLT_CONTOUR_HPP

#include <functional>
#include <vector>

#include "spectral_clt/spectral_model.hpp"
#include "spectral_clt/stieltjes.hpp"

namespace spectral_clt {

/// Quadrature point: position and trapezoid weight dz.
struct ContourNode {
  cplx z;
  cplx dz;
};

/**
 * Closed counterclockwise curve with a fixed trapezoid grid.
 *
 * Rectangles run (L,-v) -> (R,-v) -> (R,v) -> (L,v) with a sin^6 grading
 * on each side, so the integrand stays smooth and periodic through the
 * corners and the trapezoid rule keeps its spectral accuracy.
 */
class ContourSpec {
public:
  enum class Kind { rectangle, circle };

  /// Rectangle [lower - margin, upper + margin] x [-v, v].
  static ContourSpec rectangle(const SupportInterval& interval, double margin,
                               double half_height, int nodes = 2048);
  static ContourSpec circle(double radius, cplx center = 0.0, int nodes = 2048);

  Kind kind() const noexcept { return kind_; }
  int node_count() const noexcept { return nodes_; }
  double left() const noexcept { return left_; }
  double right() const noexcept { return right_; }
  double half_height() const noexcept { return v_; }
  double radius() const noexcept { return radius_; }
  cplx center() const noexcept { return center_; }
  const SupportInterval& interval() const noexcept { return interval_; }
  double margin() const noexcept { return margin_; }

  /// Nodes t_j = j / N of the periodic parameterization.
  std::vector<ContourNode> nodes() const;
  /// Strict interior test.
  bool contains(cplx z) const;
  double min_real() const noexcept;

private:
  ContourSpec() = default;

  Kind kind_ = Kind::circle;
  int nodes_ = 0;
  SupportInterval interval_{0.0, 0.0, false};
  double margin_ = 0.0;
  double left_ = 0.0;
  double right_ = 0.0;
  double v_ = 0.0;
  double radius_ = 0.0;
  cplx center_ = 0.0;
};

struct QuadratureResult {
  cplx value;
  /// |I(N) - I(N/2)| from the even-index subgrid.
  double error_estimate = 0.0;
  /// False when the last refinement changed the value by more than 10 times
  /// the previous one (warning only).
  bool converging = true;
};

using ContourFn = std::function<cplx(cplx)>;
using ContourFn2 = std::function<cplx(cplx, cplx)>;

/// Trapezoid approximation of the contour integral of f dz.
QuadratureResult integrate(const ContourFn& f, const ContourSpec& contour);

/// Same, from integrand values f(z_j) already evaluated at contour.nodes().
QuadratureResult integrate_values(const std::vector<cplx>& values,
                                  const ContourSpec& contour);

/// Tensor trapezoid of the double contour integral of g(z1, z2) dz1 dz2.
QuadratureResult double_integral(const ContourFn2& g, const ContourSpec& c1,
                                 const ContourSpec& c2);

/// Variant taking node indices, for integrands tabulated per node.
QuadratureResult double_integral_indexed(const std::function<cplx(int, int)>& g,
                                         const ContourSpec& c1, const ContourSpec& c2);

/// Throws ArgumentError unless the curves are disjoint or strictly nested;
/// rectangles must also differ in half-height.
void check_nonoverlapping(const ContourSpec& c1, const ContourSpec& c2);

/// Throws ArgumentError if any point of the curve has Re z <= 0.
void require_right_half_plane(const ContourSpec& contour);

/// Rectangle around `interval` for integrands with a branch point at zero
/// when `log_singular` is set; the left side must stay in Re z > 0.
ContourSpec default_rectangle(const SupportInterval& interval, bool log_singular,
                              double margin = 0.5, double half_height = 0.5,
                              int nodes = 2048);

/// Limit r -> 1 from above by linear extrapolation of F(1 + 1e-4) and
/// F(1 + 5e-5).
cplx r_limit(const std::function<cplx(double)>& F);

} // namespace spectral_clt

#endif
