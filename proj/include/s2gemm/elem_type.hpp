#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace s2gemm {

using int128_t = __int128;

// Element types of stored matrices. Codes are the on-disk identifiers of
// the SGMM file format; I64 and I128 only appear as widened outputs.
enum class ElemType : std::uint8_t {
  I8 = 1,
  I16 = 2,
  I32 = 3,
  I64 = 4,
  I128 = 5,
};

// Largest inner dimension for which accumulation is guaranteed exact.
inline constexpr std::size_t kMaxInnerDim = std::size_t{1} << 14;

template <typename T>
struct elem_traits;

template <>
struct elem_traits<std::int8_t> {
  using accum_type = std::int32_t;
  static constexpr ElemType code = ElemType::I8;
  static constexpr const char* name = "i8";
};

template <>
struct elem_traits<std::int16_t> {
  using accum_type = std::int64_t;
  static constexpr ElemType code = ElemType::I16;
  static constexpr const char* name = "i16";
};

template <>
struct elem_traits<std::int32_t> {
  using accum_type = int128_t;
  static constexpr ElemType code = ElemType::I32;
  static constexpr const char* name = "i32";
};

template <>
struct elem_traits<std::int64_t> {
  using accum_type = int128_t;
  static constexpr ElemType code = ElemType::I64;
  static constexpr const char* name = "i64";
};

template <>
struct elem_traits<int128_t> {
  using accum_type = int128_t;
  static constexpr ElemType code = ElemType::I128;
  static constexpr const char* name = "i128";
};

template <typename T>
using accum_t = typename elem_traits<T>::accum_type;

template <typename T>
inline constexpr ElemType elem_type_v = elem_traits<T>::code;

template <typename T>
inline constexpr std::size_t bit_width_v = sizeof(T) * 8;

// Every dot product of length <= kMaxInnerDim fits its accumulator.
template <typename T>
inline constexpr bool accumulator_is_wide_enough_v =
    bit_width_v<accum_t<T>> >= 2 * bit_width_v<T> + 14;

static_assert(accumulator_is_wide_enough_v<std::int8_t>);
static_assert(accumulator_is_wide_enough_v<std::int16_t>);
static_assert(accumulator_is_wide_enough_v<std::int32_t>);

inline std::size_t elem_bytes(ElemType t) {
  switch (t) {
    case ElemType::I8: return 1;
    case ElemType::I16: return 2;
    case ElemType::I32: return 4;
    case ElemType::I64: return 8;
    case ElemType::I128: return 16;
  }
  throw std::invalid_argument("unknown element type");
}

// Width of the type a product of two `t` matrices is stored in.
inline ElemType widened(ElemType t) {
  switch (t) {
    case ElemType::I8: return ElemType::I32;
    case ElemType::I16: return ElemType::I64;
    case ElemType::I32:
    case ElemType::I64:
    case ElemType::I128: return ElemType::I128;
  }
  throw std::invalid_argument("unknown element type");
}

inline std::string_view to_string(ElemType t) {
  switch (t) {
    case ElemType::I8: return "i8";
    case ElemType::I16: return "i16";
    case ElemType::I32: return "i32";
    case ElemType::I64: return "i64";
    case ElemType::I128: return "i128";
  }
  return "?";
}

inline ElemType parse_elem_type(std::string_view s) {
  if (s == "i8" || s == "int8") return ElemType::I8;
  if (s == "i16" || s == "int16") return ElemType::I16;
  if (s == "i32" || s == "int32") return ElemType::I32;
  if (s == "i64" || s == "int64") return ElemType::I64;
  if (s == "i128" || s == "int128") return ElemType::I128;
  throw std::invalid_argument("unknown element type '" + std::string(s) + "'");
}

inline bool is_input_type(ElemType t) {
  return t == ElemType::I8 || t == ElemType::I16 || t == ElemType::I32;
}

// Calls f(std::type_identity<T>{}) with the C++ type behind `t`.
template <typename F>
decltype(auto) visit_elem(ElemType t, F&& f) {
  switch (t) {
    case ElemType::I8: return f(std::type_identity<std::int8_t>{});
    case ElemType::I16: return f(std::type_identity<std::int16_t>{});
    case ElemType::I32: return f(std::type_identity<std::int32_t>{});
    case ElemType::I64: return f(std::type_identity<std::int64_t>{});
    case ElemType::I128: return f(std::type_identity<int128_t>{});
  }
  throw std::invalid_argument("unknown element type");
}

// Two's-complement ring arithmetic. Strassen transforms are valid over any
// ring, so intermediates may wrap while the final product stays exact as
// long as it fits the accumulator.
template <typename T>
using ring_t = std::make_unsigned_t<T>;

template <typename T>
constexpr T ring_add(T a, T b) {
  return static_cast<T>(static_cast<ring_t<T>>(a) + static_cast<ring_t<T>>(b));
}

template <typename T>
constexpr T ring_sub(T a, T b) {
  return static_cast<T>(static_cast<ring_t<T>>(a) - static_cast<ring_t<T>>(b));
}

template <typename T>
constexpr T ring_mul(T a, T b) {
  return static_cast<T>(static_cast<ring_t<T>>(a) * static_cast<ring_t<T>>(b));
}

inline std::string int128_to_string(int128_t v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  // unsigned magnitude handles INT128_MIN
  auto mag = neg ? static_cast<unsigned __int128>(0) - static_cast<unsigned __int128>(v)
                 : static_cast<unsigned __int128>(v);
  std::string out;
  while (mag != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
    mag /= 10;
  }
  if (neg) out.push_back('-');
  return {out.rbegin(), out.rend()};
}

}  // namespace s2gemm
