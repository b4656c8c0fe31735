#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace s2gemm {

// One signed reference to a tile of a square tile grid.
struct SignedOperand {
  std::uint8_t row = 0;
  std::uint8_t col = 0;
  std::int8_t sign = 1;

  friend bool operator==(const SignedOperand&, const SignedOperand&) = default;
  friend auto operator<=>(const SignedOperand&, const SignedOperand&) = default;
};

// m_i = (sum of lhs A-tiles) * (sum of rhs B-tiles), then added into each
// listed C-tile with its sign.
struct StrassenInstruction {
  std::vector<SignedOperand> lhs;
  std::vector<SignedOperand> rhs;
  std::vector<SignedOperand> outputs;

  friend bool operator==(const StrassenInstruction&, const StrassenInstruction&) = default;
  friend auto operator<=>(const StrassenInstruction&, const StrassenInstruction&) = default;
};

struct Schedule {
  int level = 1;
  std::size_t grid_dim = 2;
  std::vector<StrassenInstruction> instructions;

  std::size_t size() const noexcept { return instructions.size(); }
};

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline SignedOperand op(int r, int c, int s = 1) {
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(c), static_cast<std::int8_t>(s)};
}

}  // namespace detail

// Strassen's 1969 formulas, 0-based tile indices.
inline Schedule base_schedule() {
  using detail::op;
  Schedule s{1, 2, {}};
  s.instructions = {
      {{op(0, 0), op(1, 1)}, {op(0, 0), op(1, 1)}, {op(0, 0), op(1, 1)}},
      {{op(1, 0), op(1, 1)}, {op(0, 0)}, {op(1, 0), op(1, 1, -1)}},
      {{op(0, 0)}, {op(0, 1), op(1, 1, -1)}, {op(0, 1), op(1, 1)}},
      {{op(1, 1)}, {op(1, 0), op(0, 0, -1)}, {op(0, 0), op(1, 0)}},
      {{op(0, 0), op(0, 1)}, {op(1, 1)}, {op(0, 0, -1), op(0, 1)}},
      {{op(1, 0), op(0, 0, -1)}, {op(0, 0), op(0, 1)}, {op(1, 1)}},
      {{op(0, 1), op(1, 1, -1)}, {op(1, 0), op(1, 1)}, {op(0, 0)}},
  };
  return s;
}

// The naive grid_dim^3 product schedule, ordered (i, j, p).
inline Schedule standard_schedule(std::size_t grid_dim) {
  if (grid_dim != 2 && grid_dim != 4) throw ScheduleError("standard schedule grid must be 2 or 4");
  Schedule s{grid_dim == 2 ? 1 : 2, grid_dim, {}};
  const int g = static_cast<int>(grid_dim);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int p = 0; p < g; ++p)
        s.instructions.push_back({{detail::op(i, p)}, {detail::op(p, j)}, {detail::op(i, j)}});
  return s;
}

struct Discrepancy {
  SignedOperand a;  // sign unused
  SignedOperand b;
  SignedOperand c;
  long coefficient = 0;
  long expected = 0;
};

struct VerificationReport {
  bool passed = true;
  std::string structural_error;
  std::vector<Discrepancy> discrepancies;

  explicit operator bool() const noexcept { return passed; }
};

// Expands sum_i outputs(i) (x) lhs(i) * rhs(i) into trilinear monomials
// A[a] B[b] C[c] and compares with the block GeMM identity.
inline VerificationReport verify_schedule(const Schedule& s) {
  VerificationReport report;
  const std::size_t g = s.grid_dim;
  auto fail = [&](std::string why) {
    report.passed = false;
    report.structural_error = std::move(why);
    return report;
  };
  if (g == 0 || g > 16) return fail("grid_dim out of range");

  auto check_list = [&](const std::vector<SignedOperand>& ops, const char* what) -> std::string {
    if (ops.empty()) return std::string(what) + " operand list is empty";
    for (std::size_t x = 0; x < ops.size(); ++x) {
      if (ops[x].row >= g || ops[x].col >= g) return std::string(what) + " tile index out of grid";
      if (ops[x].sign != 1 && ops[x].sign != -1) return std::string(what) + " sign not +-1";
      for (std::size_t y = 0; y < x; ++y)
        if (ops[x].row == ops[y].row && ops[x].col == ops[y].col)
          return std::string(what) + " repeats a tile";
    }
    return {};
  };
  for (std::size_t i = 0; i < s.instructions.size(); ++i) {
    const auto& ins = s.instructions[i];
    for (auto [list, what] : {std::pair{&ins.lhs, "lhs"}, {&ins.rhs, "rhs"}, {&ins.outputs, "out"}}) {
      if (auto err = check_list(*list, what); !err.empty()) {
        return fail("instruction " + std::to_string(i) + ": " + err);
      }
    }
  }

  const std::size_t g2 = g * g;
  std::vector<long> coeff(g2 * g2 * g2, 0);
  auto idx = [&](const SignedOperand& o) { return std::size_t{o.row} * g + o.col; };
  for (const auto& ins : s.instructions)
    for (const auto& a : ins.lhs)
      for (const auto& b : ins.rhs)
        for (const auto& c : ins.outputs)
          coeff[(idx(a) * g2 + idx(b)) * g2 + idx(c)] += long{a.sign} * b.sign * c.sign;

  for (std::size_t a = 0; a < g2; ++a)
    for (std::size_t b = 0; b < g2; ++b)
      for (std::size_t c = 0; c < g2; ++c) {
        const std::size_t ar = a / g, ac = a % g, br = b / g, bc = b % g, cr = c / g, cc = c % g;
        const long expected = (ar == cr && bc == cc && ac == br) ? 1 : 0;
        const long got = coeff[(a * g2 + b) * g2 + c];
        if (got != expected) {
          report.passed = false;
          report.discrepancies.push_back({detail::op(int(ar), int(ac)), detail::op(int(br), int(bc)),
                                          detail::op(int(cr), int(cc)), got, expected});
        }
      }
  if (!report.passed && report.structural_error.empty()) {
    report.structural_error = std::to_string(report.discrepancies.size()) + " discrepant monomials";
  }
  return report;
}

inline std::vector<SignedOperand> cross(const std::vector<SignedOperand>& outer,
                                        const std::vector<SignedOperand>& inner,
                                        std::size_t inner_dim) {
  std::vector<SignedOperand> out;
  out.reserve(outer.size() * inner.size());
  for (const auto& o : outer)
    for (const auto& i : inner)
      out.push_back(detail::op(int(o.row * inner_dim + i.row), int(o.col * inner_dim + i.col),
                               o.sign * i.sign));
  return out;
}

// Recursive application: each outer tile product is itself computed with
// the inner schedule. Instruction index = outer * |inner| + inner.
inline Schedule compose(const Schedule& outer, const Schedule& inner) {
  if (auto r = verify_schedule(outer); !r) {
    throw ScheduleError("compose: outer schedule fails verification: " + r.structural_error);
  }
  if (auto r = verify_schedule(inner); !r) {
    throw ScheduleError("compose: inner schedule fails verification: " + r.structural_error);
  }
  Schedule s{outer.level + inner.level, outer.grid_dim * inner.grid_dim, {}};
  s.instructions.reserve(outer.size() * inner.size());
  for (const auto& o : outer.instructions)
    for (const auto& i : inner.instructions)
      s.instructions.push_back({cross(o.lhs, i.lhs, inner.grid_dim),
                                cross(o.rhs, i.rhs, inner.grid_dim),
                                cross(o.outputs, i.outputs, inner.grid_dim)});
  return s;
}

inline Schedule strassen_squared_schedule() { return compose(base_schedule(), base_schedule()); }

struct OpCounts {
  std::size_t multiplications = 0;
  std::size_t lhs_adds = 0;
  std::size_t rhs_adds = 0;
  std::size_t output_accumulations = 0;

  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

inline OpCounts op_count_report(const Schedule& s) {
  OpCounts c;
  c.multiplications = s.size();
  for (const auto& ins : s.instructions) {
    c.lhs_adds += ins.lhs.size() - 1;
    c.rhs_adds += ins.rhs.size() - 1;
    c.output_accumulations += ins.outputs.size();
  }
  return c;
}

// [{"lhs":[[r,c,sign],...],"rhs":[...],"out":[...]}, ...] with one
// instruction per line.
inline void write_schedule_json(std::ostream& os, const Schedule& s) {
  auto list = [&](const std::vector<SignedOperand>& ops) {
    os << '[';
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (i) os << ',';
      os << '[' << int(ops[i].row) << ',' << int(ops[i].col) << ',' << int(ops[i].sign) << ']';
    }
    os << ']';
  };
  os << "[\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& ins = s.instructions[i];
    os << "  {\"lhs\":";
    list(ins.lhs);
    os << ",\"rhs\":";
    list(ins.rhs);
    os << ",\"out\":";
    list(ins.outputs);
    os << '}' << (i + 1 < s.size() ? ",\n" : "\n");
  }
  os << "]\n";
}

inline std::string schedule_json(const Schedule& s) {
  std::ostringstream os;
  write_schedule_json(os, s);
  return os.str();
}

}  // namespace s2gemm
