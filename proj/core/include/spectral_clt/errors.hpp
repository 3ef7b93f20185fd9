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

#ifndef SPECTRAL_CLT_ERRORS_HPP
#define SPECTRAL_CLT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spectral_clt {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad sizes, out-of-range parameters, broken invariants.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// Iterative solver did not reach tolerance.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
    : Error(what + " (last residual " + std::to_string(residual) + ")"),
      residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Floating point breakdown: degenerate denominators, singular solves,
/// non-finite results.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Contour construction or evaluation failure.
class ContourError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Malformed input data (CSV, eigenvalue files).
class DataError : public Error {
public:
  using Error::Error;
};

/// File system failures.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace spectral_clt

#endif
