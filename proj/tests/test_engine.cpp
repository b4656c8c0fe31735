#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "s2gemm/engine.hpp"

using namespace s2gemm;

namespace {

EngineConfig config(Algorithm algo, TileShape shape = {}, std::size_t threads = 1) {
  EngineConfig cfg;
  cfg.schedule = schedule_for(algo);
  cfg.tile_shape = shape;
  cfg.parallelism = threads;
  return cfg;
}

template <typename T>
TileGrid<accum_t<T>> random_grid(const TileShape& s, Role role, std::mt19937_64& rng) {
  return load_tile_grid<accum_t<T>>(
      oracle::random<T>(4 * s.tile_rows(role), 4 * s.tile_cols(role), rng), 0, 0, s, role);
}

}  // namespace

TEST(BlockMultiply, CallCountsAndCrossScheduleEquality) {
  std::mt19937_64 rng(1);
  const TileShape s{};
  const auto ga = random_grid<std::int16_t>(s, Role::A, rng);
  const auto gb = random_grid<std::int16_t>(s, Role::B, rng);
  TileGrid<std::int64_t> c_fast(s, Role::C), c_std(s, Role::C);

  const auto st2 = block_multiply(ga, gb, c_fast, config(Algorithm::Strassen2));
  const auto std4 = block_multiply(ga, gb, c_std, config(Algorithm::Standard));
  EXPECT_EQ(st2.microkernel_calls, 49u);
  EXPECT_EQ(std4.microkernel_calls, 64u);
  EXPECT_EQ(st2.add_tiles, 190u);
  EXPECT_EQ(st2.accumulate_ops, 144u);
  EXPECT_EQ(std4.add_tiles, 0u);
  EXPECT_EQ(c_fast, c_std);

  // Both equal a naive product of the flattened block.
  Matrix<std::int64_t> a(256, 256), b(256, 256), c(256, 256);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t col = 0; col < 64; ++col) {
          a(64 * i + r, 64 * j + col) = ga.at(i, j)(r, col);
          b(64 * i + r, 64 * j + col) = gb.at(i, j)(r, col);
        }
  store_tile_grid(c, c_fast, 0, 0);
  EXPECT_EQ(oracle::widen(c), oracle::naive_gemm(a, b));
}

TEST(BlockMultiply, AccumulatesOntoExistingOutput) {
  std::mt19937_64 rng(2);
  const TileShape s{8, 8, 8};
  const auto ga = random_grid<std::int8_t>(s, Role::A, rng);
  const auto gb = random_grid<std::int8_t>(s, Role::B, rng);
  TileGrid<std::int32_t> once(s, Role::C), twice(s, Role::C);
  block_multiply(ga, gb, once, config(Algorithm::Strassen2, s));
  block_multiply(ga, gb, twice, config(Algorithm::Strassen2, s));
  block_multiply(ga, gb, twice, config(Algorithm::Standard, s));
  for (std::size_t t = 0; t < kGridTiles; ++t)
    for (std::size_t e = 0; e < once.tiles[t].size(); ++e)
      ASSERT_EQ(twice.tiles[t].values()[e], 2 * once.tiles[t].values()[e]);
}

TEST(BlockMultiply, Errors) {
  const TileShape s{8, 8, 8};
  TileGrid<std::int64_t> a(s, Role::A), b(s, Role::B), c(s, Role::C);
  auto bad = config(Algorithm::Strassen2, s);
  bad.schedule.instructions[5].rhs[0].sign *= -1;
  EXPECT_THROW(block_multiply(a, b, c, bad), ScheduleError);
  auto small = config(Algorithm::Standard, s);
  small.schedule = base_schedule();
  EXPECT_THROW(block_multiply(a, b, c, small), ScheduleError);
  EXPECT_THROW(block_multiply(a, b, c, config(Algorithm::Strassen2, TileShape{8, 8, 16})), std::invalid_argument);
  EXPECT_THROW(block_multiply(b, a, c, config(Algorithm::Strassen2, s)), std::invalid_argument);
}

TEST(Gemm, IdentityTimesB) {
  std::mt19937_64 rng(3);
  const auto b = oracle::random<std::int8_t>(256, 256, rng);
  const auto c = gemm(Matrix<std::int8_t>::identity(256), b, config(Algorithm::Strassen2));
  EXPECT_EQ(c, convert<std::int32_t>(b));
}

TEST(Gemm, AllTypesAgainstOracleAt256) {
  std::mt19937_64 rng(4);
  auto run = [&](auto tag) {
    using T = typename decltype(tag)::type;
    const auto a = oracle::random<T>(256, 256, rng);
    const auto b = oracle::random<T>(256, 256, rng);
    const auto expect = oracle::naive_gemm(a, b);
    for (auto algo : {Algorithm::Standard, Algorithm::Strassen1, Algorithm::Strassen2})
      EXPECT_EQ(oracle::widen(gemm(a, b, config(algo))), expect) << to_string(algo);
  };
  run(std::type_identity<std::int8_t>{});
  run(std::type_identity<std::int16_t>{});
  run(std::type_identity<std::int32_t>{});
}

TEST(Gemm, InnerDimensionMismatch) {
  EXPECT_THROW(gemm(Matrix<std::int8_t>(4, 5), Matrix<std::int8_t>(6, 4), config(Algorithm::Strassen2)),
               std::invalid_argument);
}

// Property: random shapes on small tiles, including heavy padding.
TEST(GemmProperty, RandomShapesMatchOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const TileShape s{std::size_t(1 + rng() % 6), std::size_t(1 + rng() % 6), std::size_t(1 + rng() % 6)};
    const std::size_t m = 1 + rng() % 60, k = 1 + rng() % 60, n = 1 + rng() % 60;
    const auto a = oracle::random<std::int16_t>(m, k, rng);
    const auto b = oracle::random<std::int16_t>(k, n, rng);
    const auto expect = oracle::naive_gemm(a, b);
    const auto algo = trial % 2 ? Algorithm::Strassen2 : Algorithm::Strassen1;
    ASSERT_EQ(oracle::widen(gemm(a, b, config(algo, s, 1 + trial % 3))), expect);
  }
}

TEST(Gemm, SystolicBackendMatches) {
  std::mt19937_64 rng(6);
  const TileShape s{8, 8, 8};
  const auto a = oracle::random<std::int8_t>(40, 64, rng);
  const auto b = oracle::random<std::int8_t>(64, 32, rng);
  auto cfg = config(Algorithm::Strassen2, s);
  cfg.backend = Backend::Systolic;
  cfg.systolic_dim = 4;
  EXPECT_EQ(oracle::widen(gemm(a, b, cfg)), oracle::naive_gemm(a, b));
  cfg.systolic_dim = 3;
  EXPECT_THROW(gemm(a, b, cfg), std::invalid_argument);
}

TEST(Gemm, ParallelDeterminism) {
  std::mt19937_64 rng(7);
  const TileShape s{16, 16, 16};
  const auto a = oracle::random<std::int32_t>(192, 128, rng);
  const auto b = oracle::random<std::int32_t>(128, 256, rng);
  const auto serial = gemm(a, b, config(Algorithm::Strassen2, s, 1));
  for (std::size_t t : {2u, 4u, 8u}) EXPECT_EQ(gemm(a, b, config(Algorithm::Strassen2, s, t)), serial);
}

TEST(Gemm, LoadsEachInputTileOncePerBlockProduct) {
  std::mt19937_64 rng(8);
  const TileShape s{8, 8, 8};
  const auto a = oracle::random<std::int8_t>(64, 96, rng);
  const auto b = oracle::random<std::int8_t>(96, 96, rng);
  GemmStats stats;
  gemm(a, b, config(Algorithm::Strassen2, s, 2), &stats);
  EXPECT_EQ(stats.block_products, 2u * 3u * 3u);
  EXPECT_EQ(stats.output_blocks, 6u);
  EXPECT_EQ(stats.tile_loads, 32u * stats.block_products);
  EXPECT_EQ(stats.min_tile_reads, 1u);
  EXPECT_EQ(stats.max_tile_reads, 1u);
  EXPECT_EQ(stats.microkernel_calls, 49u * stats.block_products);
}

TEST(Gemm, StreamHighWaterWithinDepth) {
  std::mt19937_64 rng(9);
  const TileShape s{8, 8, 8};
  const auto a = oracle::random<std::int16_t>(32, 64, rng);
  const auto b = oracle::random<std::int16_t>(64, 32, rng);
  const auto expect = oracle::naive_gemm(a, b);
  for (std::size_t depth : {1u, 2u, 3u, 8u}) {
    auto cfg = config(Algorithm::Strassen2, s);
    cfg.stream_depth = depth;
    GemmStats stats;
    EXPECT_EQ(oracle::widen(gemm(a, b, cfg, &stats)), expect);
    EXPECT_GE(stats.stream_high_water, 1u);
    EXPECT_LE(stats.stream_high_water, depth);
  }
}

TEST(IntermediateStream, OrderAndCapacity) {
  IntermediateStream<std::int32_t> s(2);
  s.push({0, Tile<std::int32_t>(1, 1)});
  EXPECT_THROW(s.push({2, Tile<std::int32_t>(1, 1)}), std::logic_error);
  s.push({1, Tile<std::int32_t>(1, 1)});
  EXPECT_EQ(s.high_water(), 2u);
  EXPECT_EQ(s.pop()->index, 0u);
  s.close();
  EXPECT_EQ(s.pop()->index, 1u);
  EXPECT_FALSE(s.pop().has_value());
  EXPECT_THROW(IntermediateStream<std::int32_t>(0), std::invalid_argument);
}

TEST(CountMicrokernelCalls, KnownValues) {
  EXPECT_EQ(count_microkernel_calls(256, 256, 256, config(Algorithm::Strassen2)), 49u);
  EXPECT_EQ(count_microkernel_calls(512, 512, 512, config(Algorithm::Strassen2)), 392u);
  EXPECT_EQ(count_microkernel_calls(256, 256, 256, config(Algorithm::Standard)), 64u);
  EXPECT_EQ(count_microkernel_calls(256, 256, 256, config(Algorithm::Strassen1)), 56u);
  EXPECT_THROW(count_microkernel_calls(300, 256, 256, config(Algorithm::Standard)), std::invalid_argument);
}

TEST(CountMicrokernelCalls, RatioIsAlways49Over64) {
  const auto st2 = config(Algorithm::Strassen2), std4 = config(Algorithm::Standard);
  for (std::size_t m = 256; m <= 2048; m += 256)
    for (std::size_t k = 256; k <= 1024; k += 256)
      for (std::size_t n : {256u, 768u, 4096u}) {
        const auto a = count_microkernel_calls(m, k, n, st2), b = count_microkernel_calls(m, k, n, std4);
        ASSERT_EQ(a * 64, b * 49);
      }
}

TEST(CountMicrokernelCalls, MatchesExecutedCalls) {
  std::mt19937_64 rng(10);
  const TileShape s{4, 4, 4};
  const auto a = oracle::random<std::int8_t>(32, 48, rng);
  const auto b = oracle::random<std::int8_t>(48, 16, rng);
  for (auto algo : {Algorithm::Standard, Algorithm::Strassen2}) {
    GemmStats stats;
    gemm(a, b, config(algo, s), &stats);
    EXPECT_EQ(stats.microkernel_calls, count_microkernel_calls(32, 48, 16, config(algo, s)));
  }
}
