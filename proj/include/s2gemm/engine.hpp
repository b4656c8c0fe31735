#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "s2gemm/matrix.hpp"
#include "s2gemm/microkernel.hpp"
#include "s2gemm/schedule.hpp"
#include "s2gemm/systolic.hpp"

namespace s2gemm {

enum class Backend { Fast, Systolic };

struct EngineConfig {
  Schedule schedule = strassen_squared_schedule();
  TileShape tile_shape{};
  std::size_t parallelism = 1;
  Backend backend = Backend::Fast;
  std::size_t stream_depth = 2;
  std::size_t systolic_dim = 16;

  void validate() const {
    if (schedule.grid_dim != kGridDim) {
      throw ScheduleError("engine schedules must cover a 4x4 tile grid");
    }
    if (auto r = verify_schedule(schedule); !r) {
      throw ScheduleError("engine schedule fails verification: " + r.structural_error);
    }
    tile_shape.validate();
    if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");
    if (stream_depth == 0) throw std::invalid_argument("stream depth must be >= 1");
    if (backend == Backend::Systolic) systolic_config().validate();
  }

  SystolicConfig systolic_config() const {
    return {systolic_dim, tile_shape.m_p, tile_shape.k_p, tile_shape.n_p};
  }
};

// Bounded FIFO between the multiply stage and the accumulate stage.
template <typename T>
class IntermediateStream {
 public:
  struct Item {
    std::size_t index;
    Tile<T> product;
  };

  explicit IntermediateStream(std::size_t depth) : depth_(depth) {
    if (depth_ == 0) throw std::invalid_argument("stream depth must be >= 1");
  }

  void push(Item item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return queue_.size() < depth_ || closed_; });
    if (closed_) return;
    if (next_push_ != item.index) throw std::logic_error("intermediate stream: out-of-order push");
    ++next_push_;
    queue_.push_back(std::move(item));
    high_water_ = std::max(high_water_, queue_.size());
    not_empty_.notify_one();
  }

  // Empty once closed and drained.
  std::optional<Item> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Item item = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t depth() const noexcept { return depth_; }
  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }

 private:
  std::size_t depth_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<Item> queue_;
  std::size_t next_push_ = 0;
  std::size_t high_water_ = 0;
  bool closed_ = false;
};

struct BlockStats {
  std::size_t microkernel_calls = 0;
  std::size_t add_tiles = 0;
  std::size_t accumulate_ops = 0;
  std::size_t stream_high_water = 0;
};

template <typename T>
Tile<T> backend_product(const EngineConfig& cfg, const Tile<T>& lhs, const Tile<T>& rhs) {
  if (cfg.backend == Backend::Systolic) {
    return run_tile(cfg.systolic_config(), transpose(lhs), rhs).product;
  }
  Tile<T> out(lhs.rows(), rhs.cols());
  tile_gemm_accumulate(out, lhs, rhs);
  return out;
}

namespace detail {

template <typename T>
void block_multiply_unchecked(const TileGrid<T>& grid_a, const TileGrid<T>& grid_b,
                              TileGrid<T>& grid_c, const EngineConfig& cfg, BlockStats& stats) {
  const auto& instrs = cfg.schedule.instructions;
  IntermediateStream<T> stream(cfg.stream_depth);
  std::exception_ptr producer_error;

  // Multiply stage: LHS/RHS combination and micro-kernel call per instruction.
  std::thread producer([&] {
    try {
      std::vector<SignedTile<T>> ops;
      Tile<T> lhs, rhs;
      for (std::size_t i = 0; i < instrs.size(); ++i) {
        const auto& ins = instrs[i];
        ops.clear();
        for (const auto& o : ins.lhs) ops.push_back({&grid_a.at(o.row, o.col), o.sign});
        tile_linear_combine_into<T>(lhs, ops);
        ops.clear();
        for (const auto& o : ins.rhs) ops.push_back({&grid_b.at(o.row, o.col), o.sign});
        tile_linear_combine_into<T>(rhs, ops);
        stream.push({i, backend_product(cfg, lhs, rhs)});
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    stream.close();
  });

  // Accumulate stage: each intermediate goes to every output it feeds, then is freed.
  std::size_t expected = 0;
  std::exception_ptr consumer_error;
  try {
    while (auto item = stream.pop()) {
      if (item->index != expected++) throw std::logic_error("intermediate stream out of order");
      for (const auto& o : instrs[item->index].outputs) {
        tile_accumulate(grid_c.at(o.row, o.col), item->product, o.sign);
        ++stats.accumulate_ops;
      }
      ++stats.microkernel_calls;
    }
  } catch (...) {
    consumer_error = std::current_exception();
    stream.close();
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  if (consumer_error) std::rethrow_exception(consumer_error);

  for (const auto& ins : instrs) stats.add_tiles += ins.lhs.size() - 1 + ins.rhs.size() - 1;
  stats.stream_high_water = std::max(stats.stream_high_water, stream.high_water());
}

}  // namespace detail

// grid_c += (grid_a * grid_b) through the configured schedule.
template <typename T>
BlockStats block_multiply(const TileGrid<T>& grid_a, const TileGrid<T>& grid_b,
                          TileGrid<T>& grid_c, const EngineConfig& cfg) {
  cfg.validate();
  if (grid_a.role != Role::A || grid_b.role != Role::B || grid_c.role != Role::C) {
    throw std::invalid_argument("block_multiply: grid roles must be A, B, C");
  }
  const auto& s = cfg.tile_shape;
  if (!(grid_a.shape == s) || !(grid_b.shape == s) || !(grid_c.shape == s)) {
    throw std::invalid_argument("block_multiply: grid tile shape differs from the engine config");
  }
  BlockStats stats;
  detail::block_multiply_unchecked(grid_a, grid_b, grid_c, cfg, stats);
  return stats;
}

struct GemmStats {
  std::size_t block_products = 0;
  std::size_t output_blocks = 0;
  std::size_t microkernel_calls = 0;
  std::size_t add_tiles = 0;
  std::size_t accumulate_ops = 0;
  std::size_t stream_high_water = 0;
  std::size_t tile_loads = 0;
  // Over all block products: fewest / most reads of any single input tile.
  std::size_t min_tile_reads = 0;
  std::size_t max_tile_reads = 0;
};

// C = A * B in the widened accumulator type, cropped to m x n.
// Loop nest: C block-rows, C block-cols, shared-dimension blocks.
template <typename T>
Matrix<accum_t<T>> gemm(const Matrix<T>& a, const Matrix<T>& b, const EngineConfig& cfg,
                        GemmStats* stats_out = nullptr) {
  using Acc = accum_t<T>;
  cfg.validate();
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("gemm: inner dimensions differ (A is " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + ", B is " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
  const auto& shape = cfg.tile_shape;
  const Matrix<T> ap = pad_to_block_multiple(a, shape, Role::A);
  const Matrix<T> bp = pad_to_block_multiple(b, shape, Role::B);
  // A's padded cols and B's padded rows agree: both round k up to 4 * k_p.
  Matrix<Acc> c(ap.rows(), bp.cols());

  const std::size_t row_blocks = ap.rows() / block_rows(shape, Role::A);
  const std::size_t col_blocks = bp.cols() / block_cols(shape, Role::B);
  const std::size_t k_blocks = ap.cols() / block_cols(shape, Role::A);
  const std::size_t total = row_blocks * col_blocks;

  GemmStats stats;
  stats.min_tile_reads = static_cast<std::size_t>(-1);
  std::mutex stats_mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;

  auto worker = [&] {
    try {
      for (std::size_t job = next++; job < total; job = next++) {
        const std::size_t br = job / col_blocks, bc = job % col_blocks;
        TileGrid<Acc> grid_c(shape, Role::C);
        BlockStats bs;
        GemmStats local;
        local.min_tile_reads = static_cast<std::size_t>(-1);
        for (std::size_t kb = 0; kb < k_blocks; ++kb) {
          TileLoadCounts ca{}, cb{};
          const auto grid_a = load_tile_grid<Acc>(ap, br, kb, shape, Role::A, &ca);
          const auto grid_b = load_tile_grid<Acc>(bp, kb, bc, shape, Role::B, &cb);
          for (auto counts : {ca, cb})
            for (auto n : counts) {
              local.tile_loads += n;
              local.min_tile_reads = std::min<std::size_t>(local.min_tile_reads, n);
              local.max_tile_reads = std::max<std::size_t>(local.max_tile_reads, n);
            }
          detail::block_multiply_unchecked(grid_a, grid_b, grid_c, cfg, bs);
          ++local.block_products;
        }
        store_tile_grid(c, grid_c, br, bc);

        std::lock_guard lock(stats_mu);
        stats.block_products += local.block_products;
        stats.output_blocks += 1;
        stats.tile_loads += local.tile_loads;
        stats.min_tile_reads = std::min(stats.min_tile_reads, local.min_tile_reads);
        stats.max_tile_reads = std::max(stats.max_tile_reads, local.max_tile_reads);
        stats.microkernel_calls += bs.microkernel_calls;
        stats.add_tiles += bs.add_tiles;
        stats.accumulate_ops += bs.accumulate_ops;
        stats.stream_high_water = std::max(stats.stream_high_water, bs.stream_high_water);
      }
    } catch (...) {
      std::lock_guard lock(stats_mu);
      if (!error) error = std::current_exception();
      next = total;
    }
  };

  const std::size_t workers = std::min(cfg.parallelism, total);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  if (stats_out) *stats_out = stats;
  if (c.rows() == a.rows() && c.cols() == b.cols()) return c;
  return crop(c, a.rows(), b.cols());
}

// Block products times schedule length, for dims padded to 4-tile blocks.
inline std::size_t count_microkernel_calls(std::size_t m, std::size_t k, std::size_t n,
                                           const EngineConfig& cfg) {
  const auto& s = cfg.tile_shape;
  s.validate();
  if (m % (kGridDim * s.m_p) != 0 || k % (kGridDim * s.k_p) != 0 || n % (kGridDim * s.n_p) != 0) {
    throw std::invalid_argument("count_microkernel_calls: dims are not padded multiples of 4 tiles");
  }
  return (m / (kGridDim * s.m_p)) * (n / (kGridDim * s.n_p)) * (k / (kGridDim * s.k_p)) *
         cfg.schedule.size();
}

enum class Algorithm { Standard, Strassen1, Strassen2 };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Standard: return "standard";
    case Algorithm::Strassen1: return "strassen1";
    case Algorithm::Strassen2: return "strassen2";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "standard") return Algorithm::Standard;
  if (s == "strassen1") return Algorithm::Strassen1;
  if (s == "strassen2") return Algorithm::Strassen2;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

// 4x4-grid schedule for an algorithm. strassen1 is one Strassen level over
// 2x2 super-tiles with standard products inside (56 calls).
inline Schedule schedule_for(Algorithm a) {
  switch (a) {
    case Algorithm::Standard: return standard_schedule(4);
    case Algorithm::Strassen1: return compose(base_schedule(), standard_schedule(2));
    case Algorithm::Strassen2: return strassen_squared_schedule();
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace s2gemm
