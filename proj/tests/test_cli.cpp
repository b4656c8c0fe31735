#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "s2gemm/cli.hpp"

using namespace s2gemm;
using namespace s2gemm::cli;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("s2gemm_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_gemm(const RunSpec& spec, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = guarded(err, [&] { return cmd_gemm(spec, out, err); });
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

}  // namespace

TEST(CmdGemm, VerifiesStrassenSquaredInt8) {
  RunSpec spec;
  spec.dtype = ElemType::I8;
  spec.verify = true;
  std::string out;
  EXPECT_EQ(run_gemm(spec, &out), kOk);
  EXPECT_NE(out.find("verify=ok"), std::string::npos);
  EXPECT_NE(out.find("microkernel_calls=49"), std::string::npos);
}

TEST(CmdGemm, WrongInnerDimensionFileIsUsageError) {
  const auto b_path = temp_path("b_wrong.sgmm");
  std::mt19937_64 rng(1);
  save_matrix(b_path.string(), random_matrix<std::int16_t>(256, 256, rng));
  RunSpec spec;
  spec.m = 256;
  spec.k = 128;
  spec.n = 256;
  spec.b_path = b_path.string();
  std::string err;
  EXPECT_EQ(run_gemm(spec, nullptr, &err), kUsage);
  EXPECT_NE(err.find("dimension mismatch"), std::string::npos);
  std::filesystem::remove(b_path);
}

TEST(CmdGemm, AlgorithmsWriteIdenticalFiles) {
  const auto p_std = temp_path("c_std.sgmm"), p_s2 = temp_path("c_s2.sgmm");
  RunSpec spec;
  spec.dtype = ElemType::I32;
  spec.m = 300;
  spec.k = 260;
  spec.n = 270;
  spec.algo = Algorithm::Standard;
  spec.out_path = p_std.string();
  ASSERT_EQ(run_gemm(spec), kOk);
  spec.algo = Algorithm::Strassen2;
  spec.out_path = p_s2.string();
  ASSERT_EQ(run_gemm(spec), kOk);
  const auto a = slurp(p_std), b = slurp(p_s2);
  EXPECT_EQ(a.size(), 16u + 300u * 270u * 16u);
  EXPECT_EQ(a, b);
  std::filesystem::remove(p_std);
  std::filesystem::remove(p_s2);
}

TEST(CmdGemm, FileInputsAndErrors) {
  const auto a_path = temp_path("a.sgmm"), b_path = temp_path("b.sgmm"), c_path = temp_path("c.sgmm");
  std::mt19937_64 rng(2);
  const auto a = random_matrix<std::int8_t>(20, 30, rng);
  const auto b = random_matrix<std::int8_t>(30, 10, rng);
  save_matrix(a_path.string(), a);
  save_matrix(b_path.string(), b);
  RunSpec spec;
  spec.dtype = ElemType::I8;
  spec.a_path = a_path.string();
  spec.b_path = b_path.string();
  spec.out_path = c_path.string();
  spec.verify = true;
  ASSERT_EQ(run_gemm(spec), kOk);
  EXPECT_EQ(std::get<Matrix<std::int32_t>>(load_matrix(c_path.string())), reference_gemm(a, b));

  spec.dtype = ElemType::I16;
  EXPECT_EQ(run_gemm(spec), kUsage);
  spec.dtype = ElemType::I8;
  spec.a_path = temp_path("missing.sgmm").string();
  EXPECT_EQ(run_gemm(spec), kIoError);
  for (const auto& p : {a_path, b_path, c_path}) std::filesystem::remove(p);
}

TEST(CmdBench, SchemaCallRatioAndDeterminism) {
  RunSpec spec;
  spec.dtype = ElemType::I8;
  spec.sizes = {256, 512};
  spec.repetitions = 3;
  std::ostringstream first, second;
  ASSERT_EQ(cmd_bench(spec, first), kOk);
  ASSERT_EQ(cmd_bench(spec, second), kOk);
  EXPECT_EQ(first.str().rfind("# s2gemm bench rng=mt19937_64 seed=20240229", 0), 0u);
  const auto a = csv_rows(first.str()), b = csv_rows(second.str());
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a[0], (std::vector<std::string>{"algo", "dtype", "m", "k", "n", "runtime_s_median", "gops",
                                            "microkernel_calls", "runtime_s_min"}));
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t r = 1; r < a.size(); ++r) {
    ASSERT_EQ(a[r].size(), 9u);
    for (std::size_t c : {0u, 1u, 2u, 3u, 4u, 7u}) EXPECT_EQ(a[r][c], b[r][c]);
  }
  // standard, strassen2 per size
  EXPECT_EQ(a[1][7], "64");
  EXPECT_EQ(a[2][7], "49");
  EXPECT_EQ(a[3][7], "512");
  EXPECT_EQ(a[4][7], "392");
}

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({5, 1, 4, 2, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
}

TEST(CmdModel, CurvesAndFlags) {
  RunSpec spec;
  spec.sizes = {1024, 4096, 7936, 8192};
  std::ostringstream os;
  ASSERT_EQ(cmd_model(spec, os), kOk);
  const auto rows = csv_rows(os.str());
  ASSERT_EQ(rows.size(), 1u + 2 * 2 * 4);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"platform", "algo", "dtype", "n", "predicted_gops", "bottleneck_stage"}));
  std::map<std::string, double> gops;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string key = row[0] + "/" + row[1] + "/" + row[3];
    gops[key] = std::stod(row[4]);
    const bool flagged = row[5].find("bank_penalty") != std::string::npos;
    EXPECT_EQ(flagged, row[0] == "hbm" && row[3] == "8192") << key;
  }
  EXPECT_NEAR(gops["hbm/standard/4096"], 140.8, 1.408);
  EXPECT_LT(gops["hbm/strassen2/4096"] - gops["ddr/strassen2/4096"],
            gops["hbm/standard/4096"] - gops["ddr/standard/4096"]);
}

TEST(CmdModel, PlatformFileErrors) {
  const auto path = temp_path("bad_platform.cfg");
  std::ofstream(path) << "array_dim = sixteen\n";
  RunSpec spec;
  spec.platforms = {path.string()};
  std::ostringstream out, err;
  EXPECT_EQ(guarded(err, [&] { return cmd_model(spec, out); }), kIoError);
  std::filesystem::remove(path);
}

TEST(CmdSchedule, DumpsNamedSchedules) {
  for (auto [name, count] : {std::pair{"base", 7}, {"standard2", 8}, {"standard4", 64}, {"strassen1", 56},
                             {"strassen2", 49}}) {
    RunSpec spec;
    spec.schedule_name = name;
    std::ostringstream os;
    ASSERT_EQ(cmd_schedule(spec, os), kOk);
    const auto text = os.str();
    EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '{')), count) << name;
  }
  RunSpec bad;
  bad.schedule_name = "winograd";
  std::ostringstream out, err;
  EXPECT_EQ(guarded(err, [&] { return cmd_schedule(bad, out); }), kUsage);
}

TEST(CmdSimTrace, SmallConfig) {
  RunSpec spec;
  spec.array_dim = 2;
  spec.tile_m = spec.tile_k = spec.tile_n = 4;
  std::ostringstream os;
  ASSERT_EQ(cmd_sim_trace(spec, os), kOk);
  const auto text = os.str();
  // header + initial state + 20 cycles
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 22);
  spec.array_dim = 3;
  std::ostringstream out, err;
  EXPECT_EQ(guarded(err, [&] { return cmd_sim_trace(spec, out); }), kUsage);
}
