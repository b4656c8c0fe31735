#pragma once

// SGMM binary matrix files: 16-byte header followed by row-major
// little-endian elements.
//
//   offset  size  field
//   0       4     magic "SGMM"
//   4       1     element type code (see ElemType)
//   5       3     reserved, zero
//   8       4     rows, u32 little-endian
//   12      4     cols, u32 little-endian

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>

#include "s2gemm/elem_type.hpp"
#include "s2gemm/matrix.hpp"

namespace s2gemm {

class MatrixIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kMatrixMagic{'S', 'G', 'M', 'M'};
inline constexpr std::size_t kMatrixHeaderBytes = 16;

using AnyMatrix = std::variant<Matrix<std::int8_t>, Matrix<std::int16_t>, Matrix<std::int32_t>,
                               Matrix<std::int64_t>, Matrix<int128_t>>;

inline ElemType elem_of(const AnyMatrix& m) {
  return std::visit([](const auto& x) { return x.elem(); }, m);
}

namespace detail {

inline void put_u32(char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
}

inline std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(p[i])} << (8 * i);
  return v;
}

template <typename T>
void put_le(char* p, T v) {
  auto u = static_cast<ring_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    p[i] = static_cast<char>(static_cast<unsigned>(u & 0xFFu));
    u = static_cast<ring_t<T>>(u >> 8);
  }
}

template <typename T>
T get_le(const char* p) {
  ring_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    u |= static_cast<ring_t<T>>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<T>(u);
}

}  // namespace detail

template <typename T>
void write_matrix(std::ostream& os, const Matrix<T>& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw MatrixIoError("matrix dimensions exceed the u32 header fields");
  }
  std::array<char, kMatrixHeaderBytes> header{};
  std::memcpy(header.data(), kMatrixMagic.data(), 4);
  header[4] = static_cast<char>(elem_type_v<T>);
  detail::put_u32(header.data() + 8, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(header.data() + 12, static_cast<std::uint32_t>(m.cols()));
  os.write(header.data(), header.size());

  std::vector<char> buf(m.cols() * sizeof(T));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) detail::put_le(buf.data() + c * sizeof(T), row[c]);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw MatrixIoError("failed writing matrix data");
}

inline AnyMatrix read_matrix(std::istream& is) {
  std::array<char, kMatrixHeaderBytes> header{};
  if (!is.read(header.data(), header.size())) throw MatrixIoError("truncated matrix header");
  if (std::memcmp(header.data(), kMatrixMagic.data(), 4) != 0) {
    throw MatrixIoError("bad magic, not an SGMM matrix file");
  }
  const auto code = static_cast<std::uint8_t>(header[4]);
  if (code < 1 || code > 5) throw MatrixIoError("unknown element type code " + std::to_string(code));
  const std::size_t rows = detail::get_u32(header.data() + 8);
  const std::size_t cols = detail::get_u32(header.data() + 12);
  if (rows == 0 || cols == 0) throw MatrixIoError("matrix file has a zero dimension");

  return visit_elem(static_cast<ElemType>(code), [&](auto tag) -> AnyMatrix {
    using T = typename decltype(tag)::type;
    Matrix<T> m(rows, cols);
    std::vector<char> buf(cols * sizeof(T));
    for (std::size_t r = 0; r < rows; ++r) {
      if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
        throw MatrixIoError("truncated matrix data");
      }
      auto row = m.row(r);
      for (std::size_t c = 0; c < cols; ++c) row[c] = detail::get_le<T>(buf.data() + c * sizeof(T));
    }
    return m;
  });
}

template <typename T>
void save_matrix(const std::string& path, const Matrix<T>& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MatrixIoError("cannot open '" + path + "' for writing");
  write_matrix(os, m);
}

inline AnyMatrix load_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MatrixIoError("cannot open '" + path + "'");
  return read_matrix(is);
}

}  // namespace s2gemm
