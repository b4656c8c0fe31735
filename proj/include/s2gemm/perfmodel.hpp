#pragma once

// First-order dataflow model of the blocked kernel. Every block product
// runs load -> LHS/RHS add -> micro-kernel -> accumulate, and each output
// grid is stored once. Stages overlap, so the run costs its slowest stage
// plus one pass of pipeline fill (first load, last store).
//
// burst_setup_cycles and bank_switch_penalty_cycles are uncalibrated
// defaults. The bank penalty encodes a conjecture: when the three matrices
// outgrow one memory bank and a dimension aliases the bank stride, every
// burst pays a bank-selection penalty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2gemm/elem_type.hpp"
#include "s2gemm/matrix.hpp"
#include "s2gemm/schedule.hpp"

namespace s2gemm {

struct PlatformModel {
  std::string name = "hbm";
  double frequency_hz = 275e6;
  std::size_t array_dim = 16;
  double bytes_per_cycle_per_channel = 32.0;
  std::size_t channel_count = 2;
  std::uint64_t bank_capacity_bytes = std::uint64_t{256} << 20;
  std::uint64_t bank_switch_penalty_cycles = 256;
  std::uint64_t burst_setup_cycles = 32;
  // Bursts shorter than this move elem_bytes/4 of the channel width per
  // cycle. 0 disables the narrow-burst effect.
  std::uint64_t narrow_burst_threshold_bytes = 256;
  std::size_t bank_alias_elems = 4096;

  void validate() const {
    if (!(frequency_hz > 0) || array_dim == 0 || !(bytes_per_cycle_per_channel > 0) ||
        channel_count == 0 || bank_capacity_bytes == 0 || bank_alias_elems == 0) {
      throw std::invalid_argument("platform '" + name + "': parameters must be positive");
    }
  }

  static PlatformModel hbm() { return {}; }

  static PlatformModel ddr() {
    PlatformModel p;
    p.name = "ddr";
    p.bytes_per_cycle_per_channel = 64.0;
    p.channel_count = 1;
    p.bank_capacity_bytes = std::uint64_t{16} << 30;
    return p;
  }

  // Peak nominal GOPS when the PE grid is never idle.
  double compute_ceiling_gops() const {
    return 2.0 * static_cast<double>(array_dim * array_dim) * frequency_hz * 1e-9;
  }
};

// How input tiles are fetched per block product.
enum class LoadPattern {
  BufferedBlock,  // 4x4 grid buffered on chip, bursts span 4 tiles
  PerTile,        // tiles streamed individually, bursts span one tile row
};

// Single-operand schedules model the streaming baseline kernel.
inline LoadPattern load_pattern_for(const Schedule& s) {
  const bool all_single = std::all_of(s.instructions.begin(), s.instructions.end(), [](const auto& i) {
    return i.lhs.size() == 1 && i.rhs.size() == 1 && i.outputs.size() == 1;
  });
  return all_single ? LoadPattern::PerTile : LoadPattern::BufferedBlock;
}

enum class Stage { Load, Add, Compute, Accumulate, Store };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Load: return "load";
    case Stage::Add: return "add";
    case Stage::Compute: return "compute";
    case Stage::Accumulate: return "accumulate";
    case Stage::Store: return "store";
  }
  return "?";
}

struct CycleReport {
  std::uint64_t load_cycles = 0;  // includes bank_penalty_cycles
  std::uint64_t compute_cycles = 0;
  std::uint64_t add_cycles = 0;
  std::uint64_t accumulate_cycles = 0;
  std::uint64_t store_cycles = 0;
  std::uint64_t bank_penalty_cycles = 0;
  std::uint64_t total_cycles = 0;
  double runtime_s = 0;
  double gops = 0;
  Stage bottleneck = Stage::Compute;
  bool bank_penalty = false;

  std::uint64_t stage_sum() const {
    return load_cycles + compute_cycles + add_cycles + accumulate_cycles + store_cycles;
  }
  std::uint64_t stage_max() const {
    return std::max({load_cycles, compute_cycles, add_cycles, accumulate_cycles, store_cycles});
  }
  std::string bottleneck_label() const {
    std::string s(to_string(bottleneck));
    if (bank_penalty) s += "+bank_penalty(conjectured)";
    return s;
  }
};

inline double gops_for(std::size_t m, std::size_t k, std::size_t n, double runtime_s) {
  return 2.0 * static_cast<double>(m) * static_cast<double>(k) * static_cast<double>(n) /
         runtime_s * 1e-9;
}

namespace detail {

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

inline std::uint64_t burst_cycles(std::uint64_t bytes, std::size_t elem_size, const PlatformModel& p) {
  double bpc = p.bytes_per_cycle_per_channel;
  if (p.narrow_burst_threshold_bytes != 0 && bytes < p.narrow_burst_threshold_bytes) {
    bpc *= static_cast<double>(elem_size) / 4.0;
  }
  return p.burst_setup_cycles +
         static_cast<std::uint64_t>(std::ceil(static_cast<double>(bytes) / bpc));
}

}  // namespace detail

inline CycleReport predict(std::size_t m, std::size_t k, std::size_t n, const Schedule& schedule,
                           const TileShape& tile, const PlatformModel& platform, ElemType elem,
                           LoadPattern pattern) {
  using detail::ceil_div;
  tile.validate();
  platform.validate();
  if (schedule.grid_dim != kGridDim) throw std::invalid_argument("predict: schedule must cover a 4x4 grid");
  if (m == 0 || k == 0 || n == 0 || m % (kGridDim * tile.m_p) != 0 ||
      k % (kGridDim * tile.k_p) != 0 || n % (kGridDim * tile.n_p) != 0) {
    throw std::invalid_argument("predict: dims must be padded multiples of 4 tiles");
  }
  const std::size_t in_bytes = elem_bytes(elem);
  const std::size_t out_bytes = elem_bytes(widened(elem));
  const std::uint64_t d = platform.array_dim;
  const std::uint64_t ch = platform.channel_count;

  const std::uint64_t row_blocks = m / (kGridDim * tile.m_p);
  const std::uint64_t col_blocks = n / (kGridDim * tile.n_p);
  const std::uint64_t k_blocks = k / (kGridDim * tile.k_p);
  const std::uint64_t blocks = row_blocks * col_blocks * k_blocks;
  const std::uint64_t out_grids = row_blocks * col_blocks;

  // Burst geometry: one burst per tile row, spanning 4 tiles when buffered.
  const std::uint64_t span = pattern == LoadPattern::BufferedBlock ? kGridDim : 1;
  const std::uint64_t rows_factor = kGridDim * kGridDim / span;
  const std::uint64_t a_bursts = rows_factor * tile.m_p, a_len = span * tile.k_p;
  const std::uint64_t b_bursts = rows_factor * tile.k_p, b_len = span * tile.n_p;
  const std::uint64_t c_bursts = rows_factor * tile.m_p, c_len = span * tile.n_p;

  const std::uint64_t load_block =
      ceil_div(a_bursts * detail::burst_cycles(a_len * in_bytes, in_bytes, platform) +
                   b_bursts * detail::burst_cycles(b_len * in_bytes, in_bytes, platform),
               ch);
  const std::uint64_t store_grid =
      ceil_div(c_bursts * detail::burst_cycles(c_len * out_bytes, out_bytes, platform), ch);

  const std::uint64_t footprint = (std::uint64_t{m} * k + std::uint64_t{k} * n) * in_bytes +
                                  std::uint64_t{m} * n * out_bytes;
  const auto aliases = [&](std::size_t x) { return x % platform.bank_alias_elems == 0; };
  const bool penalty = footprint > platform.bank_capacity_bytes && (aliases(m) || aliases(k) || aliases(n));
  const std::uint64_t penalty_block =
      penalty ? ceil_div((a_bursts + b_bursts) * platform.bank_switch_penalty_cycles, ch) : 0;
  const std::uint64_t penalty_grid = penalty ? ceil_div(c_bursts * platform.bank_switch_penalty_cycles, ch) : 0;

  const OpCounts ops = op_count_report(schedule);
  const std::uint64_t tile_cycles = ceil_div(std::uint64_t{tile.m_p} * tile.k_p * tile.n_p, d * d);
  const std::uint64_t compute_block = ops.multiplications * tile_cycles + (2 * d - 1);
  const std::uint64_t add_block = std::max(ops.lhs_adds * ceil_div(std::uint64_t{tile.m_p} * tile.k_p, d),
                                           ops.rhs_adds * ceil_div(std::uint64_t{tile.k_p} * tile.n_p, d));
  const std::uint64_t acc_block = ops.output_accumulations * ceil_div(std::uint64_t{tile.m_p} * tile.n_p, d);

  CycleReport r;
  r.bank_penalty = penalty;
  r.bank_penalty_cycles = blocks * penalty_block + out_grids * penalty_grid;
  r.load_cycles = blocks * (load_block + penalty_block);
  r.compute_cycles = blocks * compute_block;
  r.add_cycles = blocks * add_block;
  r.accumulate_cycles = blocks * acc_block;
  r.store_cycles = out_grids * (store_grid + penalty_grid);

  const std::pair<Stage, std::uint64_t> stages[] = {
      {Stage::Load, r.load_cycles},   {Stage::Add, r.add_cycles},
      {Stage::Compute, r.compute_cycles}, {Stage::Accumulate, r.accumulate_cycles},
      {Stage::Store, r.store_cycles}};
  r.bottleneck = std::max_element(std::begin(stages), std::end(stages), [](const auto& x, const auto& y) {
                   return x.second < y.second;
                 })->first;
  const std::uint64_t fill = (load_block + penalty_block) + (store_grid + penalty_grid);
  r.total_cycles = std::min(r.stage_max() + fill, r.stage_sum());
  r.runtime_s = static_cast<double>(r.total_cycles) / platform.frequency_hz;
  r.gops = gops_for(m, k, n, r.runtime_s);
  return r;
}

inline CycleReport predict(std::size_t m, std::size_t k, std::size_t n, const Schedule& schedule,
                           const TileShape& tile, const PlatformModel& platform, ElemType elem) {
  return predict(m, k, n, schedule, tile, platform, elem, load_pattern_for(schedule));
}

struct SweepConfig {
  std::string algo;
  Schedule schedule;
  PlatformModel platform;
  ElemType elem = ElemType::I16;
};

struct SweepRow {
  std::string platform;
  std::string algo;
  ElemType elem;
  std::size_t n;
  CycleReport report;
};

// Square sizes x configs, config-major. Sizes are padded up to the block multiple.
inline std::vector<SweepRow> sweep(const std::vector<std::size_t>& sizes,
                                   const std::vector<SweepConfig>& configs,
                                   const TileShape& tile = {}) {
  std::vector<SweepRow> rows;
  for (const auto& c : configs)
    for (std::size_t n : sizes) {
      const std::size_t m = detail::round_up(n, kGridDim * tile.m_p);
      const std::size_t kk = detail::round_up(n, kGridDim * tile.k_p);
      const std::size_t nn = detail::round_up(n, kGridDim * tile.n_p);
      rows.push_back({c.platform.name, c.algo, c.elem, n,
                      predict(m, kk, nn, c.schedule, tile, c.platform, c.elem)});
    }
  return rows;
}

class PlatformConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// key=value lines, '#' comments. An optional `preset = hbm|ddr` line seeds
// the defaults; it must come before the keys it is meant to leave alone.
inline PlatformModel parse_platform(std::istream& is) {
  PlatformModel p;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PlatformConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto num = [&]() -> double {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(val, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != val.size() || !(v > 0)) {
        throw PlatformConfigError("line " + std::to_string(lineno) + ": '" + key +
                                  "' needs a positive number, got '" + val + "'");
      }
      return v;
    };
    auto count = [&]() -> std::uint64_t {
      const double v = num();
      if (v != std::floor(v)) {
        throw PlatformConfigError("line " + std::to_string(lineno) + ": '" + key + "' must be an integer");
      }
      return static_cast<std::uint64_t>(v);
    };
    if (key == "preset") {
      if (val == "hbm") p = PlatformModel::hbm();
      else if (val == "ddr") p = PlatformModel::ddr();
      else throw PlatformConfigError("line " + std::to_string(lineno) + ": unknown preset '" + val + "'");
    } else if (key == "name") {
      p.name = val;
    } else if (key == "frequency_hz") {
      p.frequency_hz = num();
    } else if (key == "array_dim") {
      p.array_dim = count();
    } else if (key == "bytes_per_cycle_per_channel") {
      p.bytes_per_cycle_per_channel = num();
    } else if (key == "channel_count") {
      p.channel_count = count();
    } else if (key == "bank_capacity_bytes") {
      p.bank_capacity_bytes = count();
    } else if (key == "bank_switch_penalty_cycles") {
      p.bank_switch_penalty_cycles = val == "0" ? 0 : count();
    } else if (key == "burst_setup_cycles") {
      p.burst_setup_cycles = val == "0" ? 0 : count();
    } else if (key == "narrow_burst_threshold_bytes") {
      p.narrow_burst_threshold_bytes = val == "0" ? 0 : count();
    } else if (key == "bank_alias_elems") {
      p.bank_alias_elems = count();
    } else {
      throw PlatformConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

inline PlatformModel load_platform(const std::string& path) {
  if (path == "hbm") return PlatformModel::hbm();
  if (path == "ddr") return PlatformModel::ddr();
  std::ifstream is(path);
  if (!is) throw PlatformConfigError("cannot open platform file '" + path + "'");
  return parse_platform(is);
}

}  // namespace s2gemm
