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

#ifndef SPECTRAL_CLT_IO_HPP
#define SPECTRAL_CLT_IO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spectral_clt/clt_engine.hpp"
#include "spectral_clt/errors.hpp"
#include "spectral_clt/hypothesis_tests.hpp"
#include "spectral_clt/montecarlo.hpp"

namespace spectral_clt::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Malformed configuration; the message starts with the JSON pointer of
/// the offending field.
class ConfigError : public ArgumentError {
public:
  ConfigError(const std::string& pointer, const std::string& what)
    : ArgumentError(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

private:
  std::string pointer_;
};

json parse_json(const std::string& text);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Canonical text: sorted keys, no whitespace, shortest round-trip floats.
std::string canonical(const json& j);
/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

SpikedPopulation model_from_json(const json& j, const std::string& ptr = "/model");
MomentProfile profile_from_json(const json& j, const std::string& ptr = "/profile");
KernelFunction kernel_from_json(const json& j, const std::string& ptr);
EntryDistribution entry_from_json(const json& j, const std::string& ptr = "/entry");
CltMode mode_from_string(const std::string& s, const std::string& ptr = "/mode");
TestKind test_from_string(const std::string& s, const std::string& ptr = "/test");
Normalization normalization_from_string(const std::string& s,
                                        const std::string& ptr = "/normalization");
SimulationConfig simulation_from_json(const json& j);

json model_to_json(const SpikedPopulation& m);
json entry_to_json(const EntryDistribution& e);
json simulation_config_to_json(const SimulationConfig& c);
json diagnostics_to_json(const Diagnostics& d);
json to_json(const CltSummary& s);
json to_json(const TestReport& r);
/// Result without wall-clock data; `config` is echoed verbatim.
json to_json(const SimulationResult& r, const json& config);

struct RunManifest {
  std::string command;
  std::uint64_t digest = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_clock_seconds = 0.0;
  json diagnostics = json::object();

  json to_json() const;
};

RunManifest make_manifest(const std::string& command, const json& config,
                          std::uint64_t seed = 0);

/// Shortest round-trip decimal text.
std::string format_double(double v);

/// Numeric CSV; every row must have the same width. Errors name the
/// 1-based row and column.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
std::string csv_pairs(const std::string& h1, const std::string& h2,
                      const std::vector<std::pair<double, double>>& rows);

} // namespace spectral_clt::io

#endif
