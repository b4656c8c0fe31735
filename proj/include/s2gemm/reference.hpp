#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

#include "s2gemm/elem_type.hpp"
#include "s2gemm/matrix.hpp"

namespace s2gemm {

// Host-side triple-loop GeMM used to check engine output.
template <typename T>
Matrix<accum_t<T>> reference_gemm(const Matrix<T>& a, const Matrix<T>& b) {
  using Acc = accum_t<T>;
  if (a.cols() != b.rows()) throw std::invalid_argument("reference_gemm: inner dimensions differ");
  Matrix<Acc> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const Acc x = a(i, p);
      for (std::size_t j = 0; j < b.cols(); ++j)
        c(i, j) = ring_add(c(i, j), ring_mul<Acc>(x, b(p, j)));
    }
  return c;
}

inline constexpr std::uint64_t kDefaultSeed = 20240229;
inline constexpr const char* kRngName = "mt19937_64";

// Uniform over the full range of T.
template <typename T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_int_distribution<long long> dist(std::numeric_limits<T>::min(),
                                                std::numeric_limits<T>::max());
  Matrix<T> m(rows, cols);
  for (auto& v : m.values()) v = static_cast<T>(dist(rng));
  return m;
}

}  // namespace s2gemm
