#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "s2gemm/microkernel.hpp"

using namespace s2gemm;

namespace {

using Acc = std::int64_t;

Tile<Acc> random_tile(std::size_t r, std::size_t c, std::mt19937_64& rng, long long lo = -128, long long hi = 127) {
  return oracle::random<Acc>(r, c, rng, lo, hi);
}

}  // namespace

TEST(TileGemm, IdentityLeftAddsRight) {
  std::mt19937_64 rng(1);
  const auto r = random_tile(64, 64, rng);
  const auto seed = random_tile(64, 64, rng);
  auto acc = seed;
  tile_gemm_accumulate(acc, Tile<Acc>::identity(64), r);
  for (std::size_t i = 0; i < acc.size(); ++i) ASSERT_EQ(acc.values()[i], seed.values()[i] + r.values()[i]);
}

TEST(TileGemm, MatchesNaiveOracle) {
  std::mt19937_64 rng(2);
  for (auto dims : {std::array<std::size_t, 3>{64, 64, 64}, {5, 7, 3}, {1, 1, 1}, {13, 64, 9}}) {
    const auto l = oracle::random<std::int8_t>(dims[0], dims[1], rng);
    const auto r = oracle::random<std::int8_t>(dims[1], dims[2], rng);
    Tile<Acc> acc(dims[0], dims[2]);
    tile_gemm_accumulate(acc, convert<Acc>(l), convert<Acc>(r));
    EXPECT_EQ(oracle::widen(acc), oracle::naive_gemm(l, r));
  }
}

TEST(TileGemm, AdditiveInverseRestoresSeed) {
  std::mt19937_64 rng(3);
  const auto l = random_tile(64, 64, rng), r = random_tile(64, 64, rng);
  const auto seed = random_tile(64, 64, rng, -1000000, 1000000);
  auto acc = seed;
  tile_gemm_accumulate(acc, l, r);
  const auto neg_l = tile_linear_combine<Acc>({{&l, -1}});
  tile_gemm_accumulate(acc, neg_l, r);
  EXPECT_EQ(acc, seed);
}

TEST(TileGemm, ShapeMismatch) {
  Tile<Acc> acc(4, 4), l(4, 3), r(2, 4);
  EXPECT_THROW(tile_gemm_accumulate(acc, l, r), std::invalid_argument);
  Tile<Acc> r2(3, 5);
  EXPECT_THROW(tile_gemm_accumulate(acc, l, r2), std::invalid_argument);
}

// Wrapping int32 intermediates still yield the exact product when it fits.
TEST(TileGemm, RingArithmeticIsExactModulo) {
  std::mt19937_64 rng(4);
  const auto l = oracle::random<std::int32_t>(8, 8, rng, -(1LL << 20), 1LL << 20);
  const auto r = oracle::random<std::int32_t>(8, 8, rng, -(1LL << 20), 1LL << 20);
  Tile<std::int32_t> acc(8, 8);
  tile_gemm_accumulate(acc, l, r);
  const auto exact = oracle::naive_gemm(l, r);
  for (std::size_t i = 0; i < acc.size(); ++i)
    ASSERT_EQ(acc.values()[i], static_cast<std::int32_t>(static_cast<std::uint32_t>(exact.values()[i])));
}

TEST(LinearCombine, SingleOperandCopies) {
  std::mt19937_64 rng(5);
  const auto t = random_tile(16, 8, rng);
  EXPECT_EQ(tile_linear_combine<Acc>({{&t, 1}}), t);
}

TEST(LinearCombine, CancellationGivesZero) {
  std::mt19937_64 rng(6);
  const auto t = random_tile(16, 8, rng);
  EXPECT_EQ(tile_linear_combine<Acc>({{&t, 1}, {&t, -1}}), Tile<Acc>(16, 8));
}

TEST(LinearCombine, FourMixedSignsMatchScalarLoop) {
  std::mt19937_64 rng(7);
  const auto a = random_tile(9, 11, rng), b = random_tile(9, 11, rng), c = random_tile(9, 11, rng),
             d = random_tile(9, 11, rng);
  const auto got = tile_linear_combine<Acc>({{&a, -1}, {&b, 1}, {&c, -1}, {&d, 1}});
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t col = 0; col < 11; ++col)
      ASSERT_EQ(got(r, col), -a(r, col) + b(r, col) - c(r, col) + d(r, col));
}

TEST(LinearCombine, Errors) {
  Tile<Acc> a(2, 2), b(2, 3);
  EXPECT_THROW(tile_linear_combine(std::span<const SignedTile<Acc>>{}), std::invalid_argument);
  EXPECT_THROW(tile_linear_combine<Acc>({{&a, 1}, {&b, 1}}), std::invalid_argument);
  EXPECT_THROW(tile_linear_combine<Acc>({{&a, 2}}), std::invalid_argument);
}

// Property: GeMM(sum s_i L_i, R) == sum s_i GeMM(L_i, R), and on the right side.
TEST(MicrokernelProperty, Bilinearity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 1 + rng() % 24, k = 1 + rng() % 24, n = 1 + rng() % 24;
    const std::size_t count = 1 + rng() % 4;
    std::vector<Tile<Acc>> ls, rs;
    std::vector<int> signs;
    for (std::size_t i = 0; i < count; ++i) {
      ls.push_back(random_tile(m, k, rng));
      rs.push_back(random_tile(k, n, rng));
      signs.push_back(rng() % 2 ? 1 : -1);
    }
    const auto fixed_r = random_tile(k, n, rng);
    const auto fixed_l = random_tile(m, k, rng);
    std::vector<SignedTile<Acc>> lops, rops;
    for (std::size_t i = 0; i < count; ++i) {
      lops.push_back({&ls[i], signs[i]});
      rops.push_back({&rs[i], signs[i]});
    }
    Tile<Acc> lhs_side(m, n), lhs_expect(m, n), rhs_side(m, n), rhs_expect(m, n);
    tile_gemm_accumulate(lhs_side, tile_linear_combine<Acc>(lops), fixed_r);
    tile_gemm_accumulate(rhs_side, fixed_l, tile_linear_combine<Acc>(rops));
    for (std::size_t i = 0; i < count; ++i) {
      Tile<Acc> t(m, n), u(m, n);
      tile_gemm_accumulate(t, ls[i], fixed_r);
      tile_gemm_accumulate(u, fixed_l, rs[i]);
      tile_accumulate(lhs_expect, t, signs[i]);
      tile_accumulate(rhs_expect, u, signs[i]);
    }
    ASSERT_EQ(lhs_side, lhs_expect);
    ASSERT_EQ(rhs_side, rhs_expect);
  }
}

// Property: splitting the inner dimension and summing partial products in
// reverse order gives the same tile.
TEST(MicrokernelProperty, SummationOrderIndependent) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng() % 20, k = 2 + rng() % 40, n = 1 + rng() % 20;
    const auto l = random_tile(m, k, rng), r = random_tile(k, n, rng);
    Tile<Acc> whole(m, n);
    tile_gemm_accumulate(whole, l, r);
    Tile<Acc> pieces(m, n);
    for (std::size_t p = k; p-- > 0;) {
      Tile<Acc> lc(m, 1), rr(1, n);
      for (std::size_t i = 0; i < m; ++i) lc(i, 0) = l(i, p);
      for (std::size_t j = 0; j < n; ++j) rr(0, j) = r(p, j);
      tile_gemm_accumulate(pieces, lc, rr);
    }
    ASSERT_EQ(whole, pieces);
  }
}
