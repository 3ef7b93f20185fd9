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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "spectral_clt/cli.hpp"
#include "spectral_clt/io.hpp"

namespace spectral_clt {
namespace {

namespace fs = std::filesystem;
using io::json;

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spectral_clt_io_" + std::to_string(getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  struct Run {
    int code;
    std::string out;
    std::string err;
  };
  static Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }

  fs::path dir_;
};

// Last stderr line is the manifest.
json manifest_of(const std::string& err) {
  std::istringstream in(err);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return json::parse(last);
}

TEST(Canonical, SortedCompactShortest) {
  const json j = {{"b", 0.1}, {"a", {1, 2}}};
  EXPECT_EQ(io::canonical(j), "{\"a\":[1,2],\"b\":0.1}");
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::hex64(255), "00000000000000ff");
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1.0 / 3.0), "0.3333333333333333");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(CsvPairs, Rfc4180Layout) {
  EXPECT_EQ(io::csv_pairs("x", "y", {{1.0, 0.5}, {2.0, 0.25}}), "x,y\r\n1,0.5\r\n2,0.25\r\n");
}

TEST(ModelFromJson, ParsesAndReportsPointers) {
  const json ok = json::parse(
    R"({"p": 10, "n": 30, "spikes": [{"alpha": 8, "multiplicity": 2}],
        "bulk": [{"value": 1, "weight": 0.5}, {"value": 2, "weight": 0.5}]})");
  const auto m = io::model_from_json(ok);
  EXPECT_EQ(m.M(), 2);
  EXPECT_EQ(m.bulk().size(), 2u);
  const auto back = io::model_from_json(io::model_to_json(m));
  EXPECT_EQ(back.population_eigenvalues(), m.population_eigenvalues());

  json bad = ok;
  bad["spikes"][0]["alpha"] = "big";
  try {
    io::model_from_json(bad);
    FAIL() << "expected ConfigError";
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/model/spikes/0/alpha");
  }
  json missing = ok;
  missing.erase("n");
  EXPECT_THROW(io::model_from_json(missing), io::ConfigError);
}

TEST(KernelAndEntryFromJson, Variants) {
  EXPECT_EQ(io::kernel_from_json("nt", "/k").id(), KernelId::nt);
  EXPECT_DOUBLE_EQ(io::kernel_from_json(json{{"power", 3}}, "/k").exponent(), 3.0);
  EXPECT_THROW(io::kernel_from_json("cubic", "/k"), io::ConfigError);
  EXPECT_EQ(io::entry_from_json("rademacher").name(), "rademacher");
  const auto tp = io::entry_from_json(json{{"two_point", {{"a", 2.0}, {"b", -0.5}, {"prob", 0.2}}}});
  EXPECT_NEAR(tp.prob(), 0.2, 0.0);
  EXPECT_THROW(io::entry_from_json("cauchy"), io::ConfigError);
  EXPECT_THROW(io::normalization_from_string("standard"), io::ConfigError);
}

TEST_F(TempDir, CsvErrorsNameRowAndColumn) {
  const auto good = write("good.csv", "1,2,3\r\n4,5,6\r\n");
  const auto m = io::read_csv_matrix(good);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_DOUBLE_EQ(m(1, 2), 6.0);
  try {
    io::read_csv_matrix(write("nan.csv", "1,2\n3,nan\n"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::read_csv_matrix(write("ragged.csv", "1,2\n3\n")), DataError);
  EXPECT_THROW(io::read_csv_matrix(write("text.csv", "1,x\n")), DataError);
  EXPECT_THROW(io::read_csv_matrix(path("absent.csv")), IoError);
}

TEST_F(TempDir, VerifyIntegralsDefaultGridPasses) {
  const auto r = cli({"verify-integrals"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("fail"), std::string::npos);
  EXPECT_EQ(r.out.rfind("c,quantity,numeric,analytic,abs_diff,status\r\n", 0), 0u);
  const auto high = cli({"verify-integrals", "--c", "2"});
  EXPECT_EQ(high.code, 0) << high.err;
  EXPECT_NE(high.out.find("skipped"), std::string::npos);
  const auto lrt = cli({"verify-integrals", "--c", "0.9"});
  EXPECT_NE(lrt.out.find("1.4025850929940"), std::string::npos) << lrt.out;
}

TEST_F(TempDir, CltParamsMatchesNullFormulas) {
  const auto cfg = write("lrt.json", R"({"kernels": ["lrt"], "model": {"p": 300, "n": 900}})");
  const auto r = cli({"clt-params", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const json& k = j["kernels"][0];
  EXPECT_NEAR(k["mu"].get<double>(), -std::log(2.0 / 3.0) / 2, 1e-8);
  EXPECT_NEAR(k["sigma_sq"].get<double>(), -2 * std::log(2.0 / 3.0) - 2.0 / 3.0, 1e-6);

  const auto empty = write("empty.json", R"({"kernels": [], "model": {"p": 300, "n": 900}})");
  EXPECT_EQ(cli({"clt-params", empty}).code, 2);
  const auto two = write("two.json",
                         R"({"kernels": ["lrt", "nt"], "mode": "general_finite_n",
                             "model": {"p": 300, "n": 900}})");
  const auto r2 = cli({"clt-params", two});
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("single"), std::string::npos) << r2.err;
  const auto broken = write("broken.json", "{\"kernels\": [");
  EXPECT_EQ(cli({"clt-params", broken}).code, 2);
  EXPECT_EQ(cli({"clt-params", path("absent.json")}).code, 5);
}

TEST_F(TempDir, SimulateWritesFilesDeterministically) {
  const auto a = cli({"simulate", "--case", "2", "--n", "60", "--reps", "20", "--out", path("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = cli({"simulate", "--case", "2", "--n", "60", "--reps", "20", "--threads", "2",
                      "--out", path("b")});
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string density = slurp(path("a.density.csv"));
  int lines = 0;
  for (char ch : density) lines += ch == '\n';
  EXPECT_EQ(lines, 202);
  EXPECT_EQ(density.rfind("x,density\r\n", 0), 0u);
  EXPECT_TRUE(fs::exists(path("a.qq.csv")));
  json ja = json::parse(slurp(path("a.result.json")));
  json jb = json::parse(slurp(path("b.result.json")));
  EXPECT_TRUE(ja["manifest"].contains("wall_clock_seconds"));
  ja["manifest"].erase("wall_clock_seconds");
  jb["manifest"].erase("wall_clock_seconds");
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(cli({"simulate", "--case", "2", "--n", "60", "--out",
                 path("missing_dir/x")}).code, 5);
  EXPECT_EQ(cli({"simulate", "--case", "7", "--out", path("c")}).code, 2);
  EXPECT_EQ(cli({"simulate", "--out", path("c")}).code, 2);
}

TEST_F(TempDir, TestCommandOnEigenvaluesAndData) {
  std::string ones;
  for (int i = 0; i < 50; ++i) ones += "1\n";
  const auto r = cli({"test", "--eigs", write("ones.csv", ones), "--n", "200", "--test", "nt"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LT(j["z_score"].get<double>(), 0.0);
  EXPECT_FALSE(j["reject"].get<bool>());

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::ostringstream csv;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 80; ++k) csv << g(rng) << (k + 1 < 80 ? "," : "\n");
  const auto data = write("x.csv", csv.str());
  const auto d = cli({"test", "--data", data, "--test", "lrt"});
  ASSERT_EQ(d.code, 0) << d.err;
  const auto dc = cli({"test", "--data", data, "--centered"});
  ASSERT_EQ(dc.code, 0) << dc.err;
  EXPECT_NE(json::parse(d.out)["statistic"], json::parse(dc.out)["statistic"]);

  EXPECT_EQ(cli({"test", "--data", write("r.csv", "1,2\n3\n")}).code, 3);
  EXPECT_EQ(cli({"test", "--data", write("n.csv", "1,2\n3,NaN\n")}).code, 3);
  EXPECT_EQ(cli({"test", "--eigs", write("e.csv", "1\n2\n")}).code, 2);
  EXPECT_EQ(cli({"test"}).code, 2);
  EXPECT_EQ(cli({"test", "--eigs", ones, "--test", "xyz"}).code, 2);
}

TEST_F(TempDir, PowerCommand) {
  const auto r = cli({"power", "--test", "lrt", "--alpha1", "2,3,5,10"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "alpha1,power\r");
  double prev = -1.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const double pw = std::stod(line.substr(line.find(',') + 1));
    EXPECT_GE(pw, prev);
    prev = pw;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  const auto big = cli({"power", "--test", "nt", "--alpha1", "1e6"});
  EXPECT_GE(std::stod(big.out.substr(big.out.find("\r\n") + 2).substr(4)), 1 - 1e-6);
  EXPECT_EQ(cli({"power", "--test", "lrt", "--alpha1", "3", "--c", "1.5"}).code, 2);
  EXPECT_EQ(cli({"power", "--test", "lrt"}).code, 2);
  EXPECT_EQ(cli({"power", "--test", "lrt", "--alpha1", ""}).code, 2);
}

TEST_F(TempDir, ManifestDigestIsStable) {
  const auto a = cli({"power", "--alpha1", "3,5"});
  const auto b = cli({"power", "--alpha1", "3,5"});
  const auto c = cli({"power", "--alpha1", "3,6"});
  const json ma = manifest_of(a.err), mb = manifest_of(b.err), mc = manifest_of(c.err);
  EXPECT_EQ(ma["config_digest"], mb["config_digest"]);
  EXPECT_NE(ma["config_digest"], mc["config_digest"]);
  EXPECT_EQ(ma["version"], io::kVersion);
  EXPECT_EQ(ma["command"], "power");
}

TEST(Cli, UsageAndVersion) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_cli({}, out, err), 2);
  EXPECT_EQ(cli::run_cli({"frobnicate"}, out, err), 2);
  std::ostringstream vout;
  EXPECT_EQ(cli::run_cli({"--version"}, vout, err), 0);
  EXPECT_EQ(vout.str(), "0.1.0\n");
}

} // namespace
} // namespace spectral_clt
