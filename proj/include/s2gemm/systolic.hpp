#pragma once

// Cycle-level model of an output-stationary systolic GeMM core fed by
// triangular shift-register staging (SRL) and window shift registers.
//
// Per cycle, with all updates computed from the pre-cycle state:
//   SRL lane i (depth i + 1) shifts by one and ingests input element i, so
//   its diagonal output is the input from i cycles ago.
//   Window A: column 0 loads the SRL-A diagonal, other columns shift right.
//   Window B: row 0 loads the SRL-B diagonal, other rows shift down.
//   PE (i, j) multiply-accumulates the window values at (i, j).
//
// Element p of a stream therefore reaches PE (i, j) on cycle p + i + j + 2.
// A PE emits its accumulator after k_p valid products and restarts, so
// consecutive output blocks stream back to back without bubbles.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "s2gemm/elem_type.hpp"
#include "s2gemm/matrix.hpp"

namespace s2gemm {

struct SystolicConfig {
  std::size_t array_dim = 16;
  std::size_t m_p = 64;
  std::size_t k_p = 64;
  std::size_t n_p = 64;

  // Skew to the far corner PE plus the SRL-to-window stage.
  std::size_t fill_latency() const noexcept { return 2 * array_dim - 1; }
  // Final accumulate after the last operand pair lands.
  static constexpr std::size_t drain_latency() noexcept { return 1; }
  std::size_t steady_state_cycles() const noexcept {
    return m_p * k_p * n_p / (array_dim * array_dim);
  }

  void validate() const {
    if (array_dim < 2 || array_dim > 16) {
      throw std::invalid_argument("systolic array_dim must be in [2, 16]");
    }
    if (m_p == 0 || k_p == 0 || n_p == 0 || m_p % array_dim != 0 || n_p % array_dim != 0) {
      throw std::invalid_argument("systolic tile dims must be positive and m_p, n_p divisible by array_dim");
    }
  }
};

template <typename T>
class SystolicArray {
 public:
  using U = ring_t<T>;

  // PE-local result of one output block.
  struct Emission {
    std::size_t pe_row;
    std::size_t pe_col;
    std::size_t block;  // per-PE sequence number
    T value;
  };

  SystolicArray(std::size_t array_dim, std::size_t accumulate_depth)
      : dim_(array_dim), depth_(accumulate_depth) {
    if (dim_ < 2 || dim_ > 16) throw std::invalid_argument("systolic array_dim must be in [2, 16]");
    if (depth_ == 0) throw std::invalid_argument("accumulate depth must be >= 1");
    reset();
  }

  void reset() {
    const std::size_t d2 = dim_ * dim_;
    srl_a_.assign(dim_, {});
    srl_b_.assign(dim_, {});
    for (std::size_t i = 0; i < dim_; ++i) {
      srl_a_[i].assign(i + 1, Slot{});
      srl_b_[i].assign(i + 1, Slot{});
    }
    win_a_.assign(d2, Slot{});
    win_b_.assign(d2, Slot{});
    acc_.assign(d2, U{0});
    count_.assign(d2, 0);
    blocks_.assign(d2, 0);
    emitted_.clear();
    cycle_ = 0;
    in_flight_ = 0;
  }

  // One clock with a valid input row on each path (row of A^T, row of B).
  void step(std::span<const T> a_row, std::span<const T> b_row) {
    if (a_row.size() != dim_ || b_row.size() != dim_) {
      throw std::invalid_argument("systolic step: row width " + std::to_string(a_row.size()) + "/" +
                                  std::to_string(b_row.size()) + " != array_dim " +
                                  std::to_string(dim_));
    }
    advance(a_row, b_row, true);
  }

  // One clock with no valid input (pipeline bubble / drain).
  void idle() { advance({}, {}, false); }

  // True while any operand is still travelling toward a PE.
  bool busy() const noexcept { return in_flight_ != 0; }

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t cycle() const noexcept { return cycle_; }

  T srl_a_diagonal(std::size_t lane) const { return static_cast<T>(srl_a_[lane].back().value); }
  T srl_b_diagonal(std::size_t lane) const { return static_cast<T>(srl_b_[lane].back().value); }
  T window_a(std::size_t i, std::size_t j) const { return static_cast<T>(win_a_[i * dim_ + j].value); }
  T window_b(std::size_t i, std::size_t j) const { return static_cast<T>(win_b_[i * dim_ + j].value); }
  T accumulator(std::size_t i, std::size_t j) const { return static_cast<T>(acc_[i * dim_ + j]); }

  const std::vector<Emission>& emissions() const noexcept { return emitted_; }
  void clear_emissions() { emitted_.clear(); }

  // Flattened register file: SRL-A, SRL-B, window A, window B, accumulators.
  std::vector<T> snapshot() const {
    std::vector<T> out;
    for (const auto& lane : srl_a_)
      for (const auto& s : lane) out.push_back(static_cast<T>(s.value));
    for (const auto& lane : srl_b_)
      for (const auto& s : lane) out.push_back(static_cast<T>(s.value));
    for (const auto& s : win_a_) out.push_back(static_cast<T>(s.value));
    for (const auto& s : win_b_) out.push_back(static_cast<T>(s.value));
    for (U v : acc_) out.push_back(static_cast<T>(v));
    return out;
  }

  std::vector<std::string> snapshot_labels() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t s = 0; s <= i; ++s)
        out.push_back("srla_" + std::to_string(i) + "_" + std::to_string(s));
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t s = 0; s <= i; ++s)
        out.push_back("srlb_" + std::to_string(i) + "_" + std::to_string(s));
    for (const char* name : {"wina_", "winb_", "acc_"})
      for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
          out.push_back(name + std::to_string(i) + "_" + std::to_string(j));
    return out;
  }

 private:
  struct Slot {
    U value = 0;
    bool valid = false;
  };

  void advance(std::span<const T> a_row, std::span<const T> b_row, bool valid) {
    const std::size_t d = dim_;

    // PEs consume the pre-cycle windows.
    for (std::size_t e = 0; e < d * d; ++e) {
      if (!win_a_[e].valid) continue;
      acc_[e] += win_a_[e].value * win_b_[e].value;
      if (++count_[e] == depth_) {
        emitted_.push_back({e / d, e % d, blocks_[e]++, static_cast<T>(acc_[e])});
        acc_[e] = 0;
        count_[e] = 0;
      }
      --in_flight_;
    }

    // Windows shift, edge cells load the pre-cycle SRL diagonals.
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = d - 1; j > 0; --j) win_a_[i * d + j] = win_a_[i * d + j - 1];
      win_a_[i * d] = srl_a_[i].back();
    }
    for (std::size_t i = d - 1; i > 0; --i)
      for (std::size_t j = 0; j < d; ++j) win_b_[i * d + j] = win_b_[(i - 1) * d + j];
    for (std::size_t j = 0; j < d; ++j) win_b_[j] = srl_b_[j].back();

    // SRLs shift and ingest.
    for (std::size_t i = 0; i < d; ++i) {
      auto& la = srl_a_[i];
      auto& lb = srl_b_[i];
      for (std::size_t s = la.size() - 1; s > 0; --s) {
        la[s] = la[s - 1];
        lb[s] = lb[s - 1];
      }
      la[0] = valid ? Slot{static_cast<U>(a_row[i]), true} : Slot{};
      lb[0] = valid ? Slot{static_cast<U>(b_row[i]), true} : Slot{};
    }
    // Each valid element pair produces d products: one per PE of its row/column.
    if (valid) in_flight_ += d * d;
    ++cycle_;
  }

  std::size_t dim_;
  std::size_t depth_;
  std::vector<std::vector<Slot>> srl_a_;
  std::vector<std::vector<Slot>> srl_b_;
  std::vector<Slot> win_a_;
  std::vector<Slot> win_b_;
  std::vector<U> acc_;
  std::vector<std::size_t> count_;
  std::vector<std::size_t> blocks_;
  std::vector<Emission> emitted_;
  std::uint64_t cycle_ = 0;
  std::size_t in_flight_ = 0;
};

template <typename T>
struct SystolicResult {
  Tile<T> product;
  std::uint64_t cycles = 0;
};

// Streams lhs_t (k_p x m_p, i.e. L transposed) and rhs (k_p x n_p) through
// the array one array_dim x array_dim output block at a time, row-major over
// blocks, and collects the product L * R.
template <typename T>
SystolicResult<T> run_tile(const SystolicConfig& cfg, const Tile<T>& lhs_t, const Tile<T>& rhs,
                           SystolicArray<T>* array = nullptr) {
  cfg.validate();
  if (lhs_t.rows() != cfg.k_p || lhs_t.cols() != cfg.m_p || rhs.rows() != cfg.k_p ||
      rhs.cols() != cfg.n_p) {
    throw std::invalid_argument("run_tile: tile shapes do not match the systolic config");
  }
  const std::size_t d = cfg.array_dim;
  SystolicArray<T> local(d, cfg.k_p);
  SystolicArray<T>& sa = array ? *array : local;
  sa.reset();

  const std::size_t bm = cfg.m_p / d, bn = cfg.n_p / d;
  std::vector<T> a_row(d), b_row(d);
  for (std::size_t bi = 0; bi < bm; ++bi)
    for (std::size_t bj = 0; bj < bn; ++bj)
      for (std::size_t p = 0; p < cfg.k_p; ++p) {
        for (std::size_t x = 0; x < d; ++x) {
          a_row[x] = lhs_t(p, bi * d + x);
          b_row[x] = rhs(p, bj * d + x);
        }
        sa.step(a_row, b_row);
      }
  while (sa.busy()) sa.idle();

  SystolicResult<T> result{Tile<T>(cfg.m_p, cfg.n_p), sa.cycle()};
  for (const auto& e : sa.emissions()) {
    const std::size_t bi = e.block / bn, bj = e.block % bn;
    result.product(bi * d + e.pe_row, bj * d + e.pe_col) = e.value;
  }
  return result;
}

// Per-cycle CSV trace of a tile run: cycle, then every register.
template <typename T>
void write_systolic_trace(std::ostream& os, const SystolicConfig& cfg, const Tile<T>& lhs_t,
                          const Tile<T>& rhs) {
  cfg.validate();
  const std::size_t d = cfg.array_dim;
  SystolicArray<T> sa(d, cfg.k_p);
  os << "cycle";
  for (const auto& l : sa.snapshot_labels()) os << ',' << l;
  os << '\n';
  auto dump = [&] {
    os << sa.cycle();
    for (const auto& v : sa.snapshot()) {
      if constexpr (std::is_same_v<T, int128_t>)
        os << ',' << int128_to_string(v);
      else
        os << ',' << static_cast<long long>(v);
    }
    os << '\n';
  };
  dump();
  const std::size_t bm = cfg.m_p / d, bn = cfg.n_p / d;
  std::vector<T> a_row(d), b_row(d);
  for (std::size_t bi = 0; bi < bm; ++bi)
    for (std::size_t bj = 0; bj < bn; ++bj)
      for (std::size_t p = 0; p < cfg.k_p; ++p) {
        for (std::size_t x = 0; x < d; ++x) {
          a_row[x] = lhs_t(p, bi * d + x);
          b_row[x] = rhs(p, bj * d + x);
        }
        sa.step(a_row, b_row);
        dump();
      }
  while (sa.busy()) {
    sa.idle();
    dump();
  }
}

}  // namespace s2gemm
