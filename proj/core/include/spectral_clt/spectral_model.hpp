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

#ifndef SPECTRAL_CLT_SPECTRAL_MODEL_HPP
#define SPECTRAL_CLT_SPECTRAL_MODEL_HPP

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spectral_clt {

using cplx = std::complex<double>;

/**
 * Finite discrete probability measure on [0, inf).
 *
 * Used for the population spectrum H, its finite-n versions and for
 * empirical spectral distributions. Atoms are kept sorted ascending and
 * values closer than 1e-12 (relative) are merged.
 */
class SpectralDistribution {
public:
  struct Atom {
    double value;
    double weight;
  };

  /// Validates, sorts and merges. Weights must sum to one within 1e-12.
  explicit SpectralDistribution(std::vector<Atom> atoms);

  static SpectralDistribution point_mass(double value);
  /// Empirical measure placing mass 1/k on each of the k values.
  static SpectralDistribution from_values(const std::vector<double>& values);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double max_atom() const noexcept { return atoms_.back().value; }
  double min_atom() const noexcept { return atoms_.front().value; }
  /// Smallest strictly positive atom; 0 if there is none.
  double min_positive_atom() const noexcept;
  /// Weight sitting at exactly zero.
  double mass_at_zero() const noexcept;
  /// True for a single atom at `value` (relative tolerance 1e-12).
  bool is_point_mass_at(double value) const noexcept;

  /// Sum of w * g(t) over atoms.
  template <class G>
  auto integrate(G&& g) const {
    using R = decltype(g(0.0));
    R acc{};
    for (const auto& a : atoms_) acc += a.weight * g(a.value);
    return acc;
  }

  double moment(int k) const;

private:
  std::vector<Atom> atoms_;
};

struct Spike {
  double alpha;
  int multiplicity;
};

/**
 * Generalized spiked population: Sigma = V diag(D1, D2) V*, T = V D^{1/2} U*.
 *
 * Spikes (alpha_k, d_k) are strictly descending and exceed every bulk atom.
 * `u1` optionally holds the p x M spike block of U; absent means the
 * standard basis (diagonal population).
 */
class SpikedPopulation {
public:
  SpikedPopulation(std::vector<Spike> spikes, SpectralDistribution bulk, int p,
                   int n, std::optional<Eigen::MatrixXcd> u1 = std::nullopt);

  const std::vector<Spike>& spikes() const noexcept { return spikes_; }
  const SpectralDistribution& bulk() const noexcept { return bulk_; }
  int p() const noexcept { return p_; }
  int n() const noexcept { return n_; }
  int M() const noexcept { return M_; }
  int K() const noexcept { return static_cast<int>(spikes_.size()); }
  double c_n() const noexcept { return static_cast<double>(p_) / n_; }
  double c_nM() const noexcept { return static_cast<double>(p_ - M_) / n_; }
  const std::optional<Eigen::MatrixXcd>& u1() const noexcept { return u1_; }
  bool diagonal() const noexcept { return !u1_.has_value(); }

  /// Zero-based [first, last) column range J_k of spike k.
  std::pair<int, int> index_set(int k) const;

  /// Spikes below (1 + sqrt(c_n)) * max bulk atom; accepted but flagged.
  const std::vector<std::string>& diagnostics() const noexcept {
    return diagnostics_;
  }
  bool all_spikes_admitted() const noexcept { return diagnostics_.empty(); }

  /// The p - M bulk eigenvalues, ascending. Requires weight * (p - M) to be
  /// integral for every atom.
  std::vector<double> bulk_values() const;
  /// Diagonal of D: spikes by multiplicity, then bulk values.
  std::vector<double> population_eigenvalues() const;
  /// Full unitary U = [U1 U2]; U2 completes U1 by Householder QR.
  Eigen::MatrixXcd full_u() const;

private:
  std::vector<Spike> spikes_;
  SpectralDistribution bulk_;
  int p_;
  int n_;
  int M_;
  std::optional<Eigen::MatrixXcd> u1_;
  std::vector<std::string> diagnostics_;
};

/// Entry moment parameters alpha_x = |E x^2|^2, beta_x = E|x|^4 - alpha_x - 2.
struct MomentProfile {
  double alpha_x;
  double beta_x;

  /// Validating constructor.
  static MomentProfile make(double alpha_x, double beta_x);
  static MomentProfile gaussian_real() { return {1.0, 0.0}; }
  static MomentProfile gaussian_complex() { return {0.0, 0.0}; }
  static MomentProfile rademacher() { return {1.0, -2.0}; }
};

enum class KernelId { lrt, nt, linear, log, power, user };

/// Analytic test function with explicit derivative.
class KernelFunction {
public:
  using Fn = std::function<cplx(cplx)>;

  static KernelFunction lrt();
  static KernelFunction nt();
  static KernelFunction linear();
  static KernelFunction log();
  static KernelFunction power(double q);
  /// `singular_at_zero` marks a branch point or pole at the origin.
  static KernelFunction user(std::string name, Fn value, Fn derivative,
                             bool singular_at_zero);
  static KernelFunction constant(double k);

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  double value(double x) const;
  double derivative(double x) const;

  KernelId id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  double exponent() const noexcept { return q_; }
  bool singular_at_zero() const noexcept { return singular_at_zero_; }

private:
  KernelFunction(KernelId id, std::string name, double q, bool singular)
    : id_(id), name_(std::move(name)), q_(q), singular_at_zero_(singular) {}

  KernelId id_;
  std::string name_;
  double q_ = 0.0;
  bool singular_at_zero_ = false;
  Fn user_value_;
  Fn user_derivative_;
};

SpectralDistribution make_bulk_identity(int p_minus_M);

/// H_n: mass M/p at zero, the rest spread as the bulk.
SpectralDistribution h_n_of(const SpikedPopulation& model);

/// Sum over t of conj(u_{t i1}) u_{t j1} u_{t i2} conj(u_{t j2}); 1-based
/// spike column indices.
cplx u_quartic(const SpikedPopulation& model, int i1, int j1, int i2, int j2);

} // namespace spectral_clt

#endif
