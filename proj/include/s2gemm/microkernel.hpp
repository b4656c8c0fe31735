#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>

#include "s2gemm/elem_type.hpp"
#include "s2gemm/matrix.hpp"

namespace s2gemm {

namespace detail {

inline constexpr std::size_t kRowBlock = 4;

// acc[r0..r0+RB) += L[r0..r0+RB) * R, ikj order with RB rows kept in flight.
template <std::size_t RB, typename U>
void gemm_rows(U* acc, const U* lhs, const U* rhs, std::size_t r0, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const U* b = rhs + p * n;
    U a[RB];
    for (std::size_t i = 0; i < RB; ++i) a[i] = lhs[(r0 + i) * k + p];
    for (std::size_t i = 0; i < RB; ++i) {
      U* c = acc + (r0 + i) * n;
      const U ai = a[i];
      for (std::size_t j = 0; j < n; ++j) c[j] += ai * b[j];
    }
  }
}

}  // namespace detail

// acc += L * R in ring arithmetic of T.
template <typename T>
void tile_gemm_accumulate(Tile<T>& acc, const Tile<T>& lhs, const Tile<T>& rhs) {
  if (lhs.cols() != rhs.rows() || acc.rows() != lhs.rows() || acc.cols() != rhs.cols()) {
    throw std::invalid_argument("tile_gemm_accumulate: shape mismatch");
  }
  using U = ring_t<T>;
  const std::size_t m = lhs.rows(), k = lhs.cols(), n = rhs.cols();
  auto* c = reinterpret_cast<U*>(acc.data());
  const auto* a = reinterpret_cast<const U*>(lhs.data());
  const auto* b = reinterpret_cast<const U*>(rhs.data());
  std::size_t r = 0;
  for (; r + detail::kRowBlock <= m; r += detail::kRowBlock)
    detail::gemm_rows<detail::kRowBlock>(c, a, b, r, k, n);
  for (; r < m; ++r) detail::gemm_rows<1>(c, a, b, r, k, n);
}

template <typename T>
struct SignedTile {
  const Tile<T>* tile;
  int sign;
};

template <typename T>
void check_combine_args(std::span<const SignedTile<T>> ops) {
  if (ops.empty()) throw std::invalid_argument("tile_linear_combine: empty operand list");
  for (const auto& o : ops) {
    if (o.tile == nullptr) throw std::invalid_argument("tile_linear_combine: null tile");
    if (o.sign != 1 && o.sign != -1) throw std::invalid_argument("tile_linear_combine: sign not +-1");
    if (o.tile->rows() != ops[0].tile->rows() || o.tile->cols() != ops[0].tile->cols()) {
      throw std::invalid_argument("tile_linear_combine: shape mismatch");
    }
  }
}

// out = sum sign_i * tile_i, reusing out's storage when shapes match.
template <typename T>
void tile_linear_combine_into(Tile<T>& out, std::span<const SignedTile<T>> ops) {
  check_combine_args(ops);
  const auto& first = *ops[0].tile;
  if (out.rows() != first.rows() || out.cols() != first.cols()) {
    out = Tile<T>(first.rows(), first.cols());
  }
  using U = ring_t<T>;
  auto* dst = reinterpret_cast<U*>(out.data());
  const std::size_t len = out.size();
  {
    const auto* src = reinterpret_cast<const U*>(first.data());
    if (ops[0].sign > 0)
      std::copy_n(src, len, dst);
    else
      for (std::size_t e = 0; e < len; ++e) dst[e] = U{0} - src[e];
  }
  for (std::size_t i = 1; i < ops.size(); ++i) {
    const auto* src = reinterpret_cast<const U*>(ops[i].tile->data());
    if (ops[i].sign > 0)
      for (std::size_t e = 0; e < len; ++e) dst[e] += src[e];
    else
      for (std::size_t e = 0; e < len; ++e) dst[e] -= src[e];
  }
}

template <typename T>
Tile<T> tile_linear_combine(std::span<const SignedTile<T>> ops) {
  Tile<T> out;
  tile_linear_combine_into(out, ops);
  return out;
}

template <typename T>
Tile<T> tile_linear_combine(std::initializer_list<SignedTile<T>> ops) {
  return tile_linear_combine(std::span<const SignedTile<T>>(ops.begin(), ops.size()));
}

// acc += sign * src
template <typename T>
void tile_accumulate(Tile<T>& acc, const Tile<T>& src, int sign) {
  if (acc.rows() != src.rows() || acc.cols() != src.cols()) {
    throw std::invalid_argument("tile_accumulate: shape mismatch");
  }
  using U = ring_t<T>;
  auto* d = reinterpret_cast<U*>(acc.data());
  const auto* s = reinterpret_cast<const U*>(src.data());
  if (sign > 0)
    for (std::size_t e = 0; e < acc.size(); ++e) d[e] += s[e];
  else
    for (std::size_t e = 0; e < acc.size(); ++e) d[e] -= s[e];
}

}  // namespace s2gemm
