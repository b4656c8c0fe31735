#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2gemm/elem_type.hpp"

namespace s2gemm {

// Dense row-major matrix. Tiles are Matrix<accum_t<T>>.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("matrix dimensions must be >= 1");
    }
    if (rows > std::numeric_limits<std::size_t>::max() / cols) {
      throw std::length_error("matrix element count overflows size_t");
    }
    data_.assign(rows * cols, fill);
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("matrix dimensions must be >= 1");
    }
    if (data_.size() != rows * cols) {
      throw std::invalid_argument("matrix data length != rows * cols");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  static constexpr ElemType elem() noexcept { return elem_type_v<T>; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
using Tile = Matrix<T>;

template <typename To, typename From>
Matrix<To> convert(const Matrix<From>& m) {
  std::vector<To> out(m.size());
  std::transform(m.values().begin(), m.values().end(), out.begin(),
                 [](From v) { return static_cast<To>(v); });
  return Matrix<To>(m.rows(), m.cols(), std::move(out));
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

template <typename T>
Matrix<T> crop(const Matrix<T>& m, std::size_t rows, std::size_t cols) {
  if (rows > m.rows() || cols > m.cols()) {
    throw std::out_of_range("crop larger than source matrix");
  }
  Matrix<T> out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(m.row(r).begin(), cols, out.row(r).begin());
  return out;
}

enum class Role { A, B, C };

inline constexpr std::size_t kGridDim = 4;
inline constexpr std::size_t kGridTiles = kGridDim * kGridDim;

struct TileShape {
  std::size_t m_p = 64;
  std::size_t k_p = 64;
  std::size_t n_p = 64;

  void validate() const {
    if (m_p == 0 || k_p == 0 || n_p == 0) {
      throw std::invalid_argument("tile dimensions must be >= 1");
    }
  }

  std::size_t tile_rows(Role role) const { return role == Role::B ? k_p : m_p; }
  std::size_t tile_cols(Role role) const { return role == Role::A ? k_p : n_p; }

  friend bool operator==(const TileShape&, const TileShape&) = default;
};

// 4x4 grid of materialized tile buffers; tile (i, j) at index i * 4 + j.
template <typename T>
struct TileGrid {
  std::array<Tile<T>, kGridTiles> tiles;
  TileShape shape;
  Role role = Role::C;

  TileGrid() = default;
  TileGrid(const TileShape& s, Role r) : shape(s), role(r) {
    s.validate();
    for (auto& t : tiles) t = Tile<T>(s.tile_rows(r), s.tile_cols(r));
  }

  Tile<T>& at(std::size_t i, std::size_t j) { return tiles[i * kGridDim + j]; }
  const Tile<T>& at(std::size_t i, std::size_t j) const { return tiles[i * kGridDim + j]; }

  void zero() {
    for (auto& t : tiles) t.fill(T{});
  }

  friend bool operator==(const TileGrid& a, const TileGrid& b) {
    return a.role == b.role && a.shape == b.shape && a.tiles == b.tiles;
  }
};

namespace detail {

inline std::size_t round_up(std::size_t v, std::size_t multiple) {
  const std::size_t q = (v + multiple - 1) / multiple;
  if (q > std::numeric_limits<std::size_t>::max() / multiple) {
    throw std::length_error("padded dimension overflows size_t");
  }
  return q * multiple;
}

}  // namespace detail

// Rows/cols of the 4x4-tile block a matrix of the given role is made of.
inline std::size_t block_rows(const TileShape& s, Role role) {
  return kGridDim * s.tile_rows(role);
}
inline std::size_t block_cols(const TileShape& s, Role role) {
  return kGridDim * s.tile_cols(role);
}

template <typename T>
bool is_padded(const Matrix<T>& m, const TileShape& shape, Role role) {
  return m.rows() % block_rows(shape, role) == 0 && m.cols() % block_cols(shape, role) == 0;
}

template <typename T>
Matrix<T> pad_to_block_multiple(const Matrix<T>& m, const TileShape& shape, Role role) {
  shape.validate();
  const std::size_t rows = detail::round_up(m.rows(), block_rows(shape, role));
  const std::size_t cols = detail::round_up(m.cols(), block_cols(shape, role));
  if (rows == m.rows() && cols == m.cols()) return m;
  Matrix<T> out(rows, cols);
  for (std::size_t r = 0; r < m.rows(); ++r)
    std::copy(m.row(r).begin(), m.row(r).end(), out.row(r).begin());
  return out;
}

// Per-tile read counters, indexed like TileGrid::tiles.
using TileLoadCounts = std::array<std::uint32_t, kGridTiles>;

namespace detail {

inline void check_block(std::size_t rows, std::size_t cols, const TileShape& shape, Role role,
                        std::size_t block_row, std::size_t block_col) {
  if (rows % block_rows(shape, role) != 0 || cols % block_cols(shape, role) != 0) {
    throw std::invalid_argument("matrix is not padded to the tile-grid block size");
  }
  if (block_row >= rows / block_rows(shape, role) || block_col >= cols / block_cols(shape, role)) {
    throw std::out_of_range("block index (" + std::to_string(block_row) + ", " +
                            std::to_string(block_col) + ") outside the block grid");
  }
}

}  // namespace detail

// Copies the 16 tiles of block (block_row, block_col), widening into Acc.
template <typename Acc = void, typename T>
auto load_tile_grid(const Matrix<T>& m, std::size_t block_row, std::size_t block_col,
                    const TileShape& shape, Role role, TileLoadCounts* counts = nullptr) {
  using Out = std::conditional_t<std::is_void_v<Acc>, T, Acc>;
  shape.validate();
  detail::check_block(m.rows(), m.cols(), shape, role, block_row, block_col);
  TileGrid<Out> grid(shape, role);
  const std::size_t tr = shape.tile_rows(role);
  const std::size_t tc = shape.tile_cols(role);
  const std::size_t base_r = block_row * block_rows(shape, role);
  const std::size_t base_c = block_col * block_cols(shape, role);
  for (std::size_t i = 0; i < kGridDim; ++i) {
    for (std::size_t j = 0; j < kGridDim; ++j) {
      auto& tile = grid.at(i, j);
      for (std::size_t r = 0; r < tr; ++r) {
        const T* src = &m(base_r + i * tr + r, base_c + j * tc);
        Out* dst = &tile(r, 0);
        for (std::size_t c = 0; c < tc; ++c) dst[c] = static_cast<Out>(src[c]);
      }
      if (counts != nullptr) ++(*counts)[i * kGridDim + j];
    }
  }
  return grid;
}

// Writes the grid's tiles into their block of `m`; nothing else is touched.
// Disjoint blocks may be stored concurrently.
template <typename T>
void store_tile_grid(Matrix<T>& m, const TileGrid<T>& grid, std::size_t block_row,
                     std::size_t block_col) {
  if (grid.role != Role::C) {
    throw std::invalid_argument("only C-role tile grids can be stored");
  }
  const auto& shape = grid.shape;
  detail::check_block(m.rows(), m.cols(), shape, Role::C, block_row, block_col);
  const std::size_t tr = shape.m_p;
  const std::size_t tc = shape.n_p;
  const std::size_t base_r = block_row * block_rows(shape, Role::C);
  const std::size_t base_c = block_col * block_cols(shape, Role::C);
  for (std::size_t i = 0; i < kGridDim; ++i)
    for (std::size_t j = 0; j < kGridDim; ++j) {
      const auto& tile = grid.at(i, j);
      for (std::size_t r = 0; r < tr; ++r)
        std::copy(tile.row(r).begin(), tile.row(r).end(),
                  &m(base_r + i * tr + r, base_c + j * tc));
    }
}

}  // namespace s2gemm
