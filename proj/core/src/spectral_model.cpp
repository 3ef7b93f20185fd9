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

#include "spectral_clt/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral_clt/errors.hpp"

namespace spectral_clt {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kMassTol = 1e-12;

bool same_value(double a, double b) {
  return std::abs(a - b) <= kMergeTol * std::max(std::abs(a), std::abs(b));
}

} // namespace

SpectralDistribution::SpectralDistribution(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ArgumentError("spectral distribution needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value) || a.value < 0.0)
      throw ArgumentError("atom values must be finite and nonnegative");
    if (!std::isfinite(a.weight) || a.weight <= 0.0)
      throw ArgumentError("atom weights must be positive");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    std::ostringstream os;
    os << "atom weights sum to " << total << ", expected 1";
    throw ArgumentError(os.str());
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.value < y.value; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && same_value(atoms_.back().value, a.value))
      atoms_.back().weight += a.weight;
    else
      atoms_.push_back(a);
  }
}

SpectralDistribution SpectralDistribution::point_mass(double value) {
  return SpectralDistribution({{value, 1.0}});
}

SpectralDistribution SpectralDistribution::from_values(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("empirical distribution of an empty sample");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  // Count runs first so that each weight is an exact multiple of 1/k.
  std::vector<Atom> atoms;
  const double k = static_cast<double>(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && same_value(sorted[i], sorted[j])) ++j;
    atoms.push_back({sorted[i], static_cast<double>(j - i) / k});
    i = j;
  }
  return SpectralDistribution(std::move(atoms));
}

double SpectralDistribution::min_positive_atom() const noexcept {
  for (const auto& a : atoms_)
    if (a.value > 0.0) return a.value;
  return 0.0;
}

double SpectralDistribution::mass_at_zero() const noexcept {
  return atoms_.front().value == 0.0 ? atoms_.front().weight : 0.0;
}

bool SpectralDistribution::is_point_mass_at(double value) const noexcept {
  return atoms_.size() == 1 && same_value(atoms_.front().value, value);
}

double SpectralDistribution::moment(int k) const {
  return integrate([k](double t) { return std::pow(t, k); });
}

SpikedPopulation::SpikedPopulation(std::vector<Spike> spikes, SpectralDistribution bulk,
                                   int p, int n, std::optional<Eigen::MatrixXcd> u1)
  : spikes_(std::move(spikes)), bulk_(std::move(bulk)), p_(p), n_(n), M_(0),
    u1_(std::move(u1)) {
  if (p_ <= 0 || n_ <= 0) throw ArgumentError("p and n must be positive");
  for (std::size_t k = 0; k < spikes_.size(); ++k) {
    const auto& s = spikes_[k];
    if (!std::isfinite(s.alpha)) throw ArgumentError("spike values must be finite");
    if (s.multiplicity <= 0) throw ArgumentError("spike multiplicity must be positive");
    if (k > 0 && !(s.alpha < spikes_[k - 1].alpha))
      throw ArgumentError("spikes must be strictly descending");
    if (!(s.alpha > bulk_.max_atom()))
      throw ArgumentError("spike " + std::to_string(k + 1) +
                          " does not exceed the largest bulk atom");
    M_ += s.multiplicity;
  }
  if (M_ >= p_) throw ArgumentError("total spike multiplicity M must be below p");

  const double edge = (1.0 + std::sqrt(c_n())) * bulk_.max_atom();
  for (std::size_t k = 0; k < spikes_.size(); ++k) {
    if (!(spikes_[k].alpha > edge)) {
      std::ostringstream os;
      os << "spike " << (k + 1) << " (alpha=" << spikes_[k].alpha
         << ") is below the admission threshold " << edge
         << "; its outlier may not separate from the bulk";
      diagnostics_.push_back(os.str());
    }
  }

  if (u1_) {
    const auto& U = *u1_;
    if (U.rows() != p_ || U.cols() != M_)
      throw ArgumentError("u1 must be p x M");
    const Eigen::MatrixXcd gram = U.adjoint() * U;
    const double dev = (gram - Eigen::MatrixXcd::Identity(M_, M_)).cwiseAbs().maxCoeff();
    if (!(dev <= 1e-10)) throw ArgumentError("u1 columns are not orthonormal within 1e-10");
  }
}

std::pair<int, int> SpikedPopulation::index_set(int k) const {
  if (k < 0 || k >= K()) throw ArgumentError("spike index out of range");
  int first = 0;
  for (int i = 0; i < k; ++i) first += spikes_[i].multiplicity;
  return {first, first + spikes_[k].multiplicity};
}

std::vector<double> SpikedPopulation::bulk_values() const {
  const int m = p_ - M_;
  std::vector<double> out;
  out.reserve(m);
  for (const auto& a : bulk_.atoms()) {
    const double count = a.weight * m;
    const double rounded = std::round(count);
    if (std::abs(count - rounded) > 1e-6)
      throw ArgumentError("bulk weights do not correspond to integer counts for p - M = " +
                          std::to_string(m));
    out.insert(out.end(), static_cast<std::size_t>(rounded), a.value);
  }
  if (static_cast<int>(out.size()) != m)
    throw ArgumentError("bulk atom counts do not add up to p - M");
  return out;
}

std::vector<double> SpikedPopulation::population_eigenvalues() const {
  std::vector<double> d;
  d.reserve(p_);
  for (const auto& s : spikes_) d.insert(d.end(), s.multiplicity, s.alpha);
  const auto b = bulk_values();
  d.insert(d.end(), b.begin(), b.end());
  return d;
}

Eigen::MatrixXcd SpikedPopulation::full_u() const {
  if (!u1_) return Eigen::MatrixXcd::Identity(p_, p_);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(*u1_);
  Eigen::MatrixXcd Q = qr.householderQ();
  Q.leftCols(M_) = *u1_;
  return Q;
}

MomentProfile MomentProfile::make(double alpha_x, double beta_x) {
  if (!(alpha_x >= 0.0 && alpha_x <= 1.0))
    throw ArgumentError("alpha_x must lie in [0, 1]");
  // E|x|^4 >= (E|x|^2)^2 = 1 forces beta_x >= -1 - alpha_x.
  if (!(beta_x >= -1.0 - alpha_x - 1e-12) || !std::isfinite(beta_x))
    throw ArgumentError("beta_x must be at least -1 - alpha_x");
  return {alpha_x, beta_x};
}

KernelFunction KernelFunction::lrt() { return {KernelId::lrt, "lrt", 0.0, true}; }
KernelFunction KernelFunction::nt() { return {KernelId::nt, "nt", 0.0, false}; }
KernelFunction KernelFunction::linear() { return {KernelId::linear, "linear", 0.0, false}; }
KernelFunction KernelFunction::log() { return {KernelId::log, "log", 0.0, true}; }

KernelFunction KernelFunction::power(double q) {
  if (!std::isfinite(q)) throw ArgumentError("power exponent must be finite");
  const bool integral = q == std::floor(q) && q >= 0.0;
  std::ostringstream os;
  os << "power(" << q << ")";
  return {KernelId::power, os.str(), q, !integral};
}

KernelFunction KernelFunction::user(std::string name, Fn value, Fn derivative,
                                    bool singular_at_zero) {
  if (!value || !derivative) throw ArgumentError("user kernel needs value and derivative");
  KernelFunction k(KernelId::user, std::move(name), 0.0, singular_at_zero);
  k.user_value_ = std::move(value);
  k.user_derivative_ = std::move(derivative);
  return k;
}

KernelFunction KernelFunction::constant(double c) {
  std::ostringstream os;
  os << "constant(" << c << ")";
  return user(os.str(), [c](cplx) { return cplx(c, 0.0); },
              [](cplx) { return cplx(0.0, 0.0); }, false);
}

cplx KernelFunction::value(cplx z) const {
  switch (id_) {
  case KernelId::lrt: return z - std::log(z) - 1.0;
  case KernelId::nt: return (z - 1.0) * (z - 1.0);
  case KernelId::linear: return z;
  case KernelId::log: return std::log(z);
  case KernelId::power:
    if (!singular_at_zero_) {
      cplx r(1.0, 0.0);
      for (int i = 0; i < static_cast<int>(q_); ++i) r *= z;
      return r;
    }
    return std::pow(z, q_);
  case KernelId::user: return user_value_(z);
  }
  return {};
}

cplx KernelFunction::derivative(cplx z) const {
  switch (id_) {
  case KernelId::lrt: return 1.0 - 1.0 / z;
  case KernelId::nt: return 2.0 * (z - 1.0);
  case KernelId::linear: return {1.0, 0.0};
  case KernelId::log: return 1.0 / z;
  case KernelId::power:
    if (q_ == 0.0) return {0.0, 0.0};
    if (!singular_at_zero_) {
      cplx r(q_, 0.0);
      for (int i = 0; i < static_cast<int>(q_) - 1; ++i) r *= z;
      return r;
    }
    return q_ * std::pow(z, q_ - 1.0);
  case KernelId::user: return user_derivative_(z);
  }
  return {};
}

double KernelFunction::value(double x) const {
  switch (id_) {
  case KernelId::lrt: return x - std::log(x) - 1.0;
  case KernelId::nt: return (x - 1.0) * (x - 1.0);
  case KernelId::linear: return x;
  case KernelId::log: return std::log(x);
  case KernelId::power: return std::pow(x, q_);
  case KernelId::user: return user_value_(cplx(x, 0.0)).real();
  }
  return 0.0;
}

double KernelFunction::derivative(double x) const {
  switch (id_) {
  case KernelId::lrt: return 1.0 - 1.0 / x;
  case KernelId::nt: return 2.0 * (x - 1.0);
  case KernelId::linear: return 1.0;
  case KernelId::log: return 1.0 / x;
  case KernelId::power: return q_ == 0.0 ? 0.0 : q_ * std::pow(x, q_ - 1.0);
  case KernelId::user: return user_derivative_(cplx(x, 0.0)).real();
  }
  return 0.0;
}

SpectralDistribution make_bulk_identity(int p_minus_M) {
  if (p_minus_M <= 0) throw ArgumentError("bulk size must be positive");
  return SpectralDistribution::point_mass(1.0);
}

SpectralDistribution h_n_of(const SpikedPopulation& model) {
  const double p = model.p();
  const int M = model.M();
  std::vector<SpectralDistribution::Atom> atoms;
  if (M > 0) atoms.push_back({0.0, M / p});
  const double scale = (model.p() - M) / p;
  for (const auto& a : model.bulk().atoms()) atoms.push_back({a.value, a.weight * scale});
  return SpectralDistribution(std::move(atoms));
}

cplx u_quartic(const SpikedPopulation& model, int i1, int j1, int i2, int j2) {
  const int M = model.M();
  for (int idx : {i1, j1, i2, j2})
    if (idx < 1 || idx > M) throw ArgumentError("spike column index out of range 1..M");
  if (!model.u1()) {
    // Standard basis columns e_1..e_M.
    return (i1 == j1 && j1 == i2 && i2 == j2) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  }
  const auto& U = *model.u1();
  cplx acc(0.0, 0.0);
  for (int t = 0; t < U.rows(); ++t)
    acc += std::conj(U(t, i1 - 1)) * U(t, j1 - 1) * U(t, i2 - 1) * std::conj(U(t, j2 - 1));
  return acc;
}

} // namespace spectral_clt
