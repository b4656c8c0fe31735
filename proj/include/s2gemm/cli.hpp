#pragma once

// Subcommand bodies of the s2gemm command-line tool. Each returns a process
// exit code: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2gemm/engine.hpp"
#include "s2gemm/matrix_io.hpp"
#include "s2gemm/perfmodel.hpp"
#include "s2gemm/reference.hpp"
#include "s2gemm/schedule.hpp"
#include "s2gemm/systolic.hpp"

namespace s2gemm::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIoError = 3 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunSpec {
  std::size_t m = 256, k = 256, n = 256;
  ElemType dtype = ElemType::I16;
  Algorithm algo = Algorithm::Strassen2;
  std::uint64_t seed = kDefaultSeed;
  std::size_t repetitions = 1;
  std::string out_path;
  Backend backend = Backend::Fast;
  std::size_t threads = 1;
  bool verify = false;
  std::string a_path, b_path;

  // bench / model
  std::vector<std::size_t> sizes;
  std::vector<Algorithm> algos;
  std::vector<ElemType> dtypes;
  std::vector<std::string> platforms;

  // schedule dump
  std::string schedule_name = "strassen2";

  // sim trace
  std::size_t array_dim = 2;
  std::size_t tile_m = 4, tile_k = 4, tile_n = 4;

  void validate() const {
    if (m == 0 || k == 0 || n == 0) throw UsageError("dimensions must be positive");
    if (repetitions == 0) throw UsageError("repetitions must be >= 1");
    if (threads == 0) throw UsageError("threads must be >= 1");
    if (!is_input_type(dtype)) throw UsageError("dtype must be i8, i16 or i32");
    for (auto s : sizes)
      if (s == 0) throw UsageError("sizes must be positive");
  }
};

inline EngineConfig engine_config(const RunSpec& spec, Algorithm algo) {
  EngineConfig cfg;
  cfg.schedule = schedule_for(algo);
  cfg.parallelism = spec.threads;
  cfg.backend = spec.backend;
  return cfg;
}

inline std::size_t padded(std::size_t x) { return detail::round_up(x, kGridDim * TileShape{}.m_p); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace detail {

template <typename T>
Matrix<T> take_input(const std::string& path, std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                     const char* which) {
  if (path.empty()) return random_matrix<T>(rows, cols, rng);
  AnyMatrix any = load_matrix(path);
  if (elem_of(any) != elem_type_v<T>) {
    throw UsageError(std::string("matrix ") + which + " in '" + path + "' has dtype " +
                     std::string(to_string(elem_of(any))) + ", expected " +
                     std::string(to_string(elem_type_v<T>)));
  }
  return std::get<Matrix<T>>(std::move(any));
}

template <typename T>
std::string value_str(T v) {
  if constexpr (std::is_same_v<T, int128_t>) return int128_to_string(v);
  else return std::to_string(static_cast<long long>(v));
}

template <typename T>
int run_gemm(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  std::mt19937_64 rng(spec.seed);
  const Matrix<T> a = take_input<T>(spec.a_path, spec.m, spec.k, rng, "A");
  const Matrix<T> b = take_input<T>(spec.b_path, spec.k, spec.n, rng, "B");
  if (a.cols() != b.rows()) {
    throw UsageError("dimension mismatch: A is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ", B is " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  const EngineConfig cfg = engine_config(spec, spec.algo);
  GemmStats stats;
  const auto c = gemm(a, b, cfg, &stats);

  if (!spec.out_path.empty()) save_matrix(spec.out_path, c);
  out << "gemm algo=" << to_string(spec.algo) << " dtype=" << to_string(elem_type_v<T>)
      << " m=" << a.rows() << " k=" << a.cols() << " n=" << b.cols()
      << " microkernel_calls=" << stats.microkernel_calls;

  if (spec.verify) {
    const auto expect = reference_gemm(a, b);
    std::size_t bad = 0, first_r = 0, first_c = 0;
    for (std::size_t r = 0; r < c.rows(); ++r)
      for (std::size_t col = 0; col < c.cols(); ++col)
        if (c(r, col) != expect(r, col) && bad++ == 0) {
          first_r = r;
          first_c = col;
        }
    if (bad != 0) {
      out << " verify=FAIL\n";
      err << "verification failed: " << bad << " of " << c.size() << " elements differ; first at ("
          << first_r << ", " << first_c << "): got " << value_str(c(first_r, first_c)) << ", expected "
          << value_str(expect(first_r, first_c)) << '\n';
      return kVerifyFailed;
    }
    out << " verify=ok";
  }
  out << '\n';
  return kOk;
}

template <typename T>
void run_bench(const RunSpec& spec, Algorithm algo, std::size_t m, std::size_t k, std::size_t n,
               std::ostream& out) {
  std::mt19937_64 rng(spec.seed);
  const auto a = random_matrix<T>(m, k, rng);
  const auto b = random_matrix<T>(k, n, rng);
  const EngineConfig cfg = engine_config(spec, algo);
  std::vector<double> times;
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    auto c = gemm(a, b, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  const double med = median(times);
  const double best = *std::min_element(times.begin(), times.end());
  const std::size_t calls = count_microkernel_calls(padded(m), padded(k), padded(n), cfg);
  out << to_string(algo) << ',' << to_string(elem_type_v<T>) << ',' << m << ',' << k << ',' << n
      << ',' << std::setprecision(6) << std::scientific << med << ',' << std::fixed
      << std::setprecision(3) << gops_for(m, k, n, med) << ',' << calls << ','
      << std::setprecision(6) << std::scientific << best << std::defaultfloat << '\n';
}

}  // namespace detail

inline constexpr const char* kBenchHeader =
    "algo,dtype,m,k,n,runtime_s_median,gops,microkernel_calls,runtime_s_min";
inline constexpr const char* kModelHeader = "platform,algo,dtype,n,predicted_gops,bottleneck_stage";

inline int cmd_gemm(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  spec.validate();
  return visit_elem(spec.dtype, [&](auto tag) -> int {
    using T = typename decltype(tag)::type;
    if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, int128_t>) {
      throw UsageError("dtype must be i8, i16 or i32");
    } else {
      return detail::run_gemm<T>(spec, out, err);
    }
  });
}

// Timing columns (runtime_s_*, gops) vary run to run; the rest is a
// function of the spec.
inline int cmd_bench(const RunSpec& spec, std::ostream& out) {
  spec.validate();
  const auto algos = spec.algos.empty() ? std::vector{Algorithm::Standard, Algorithm::Strassen2} : spec.algos;
  out << "# s2gemm bench rng=" << kRngName << " seed=" << spec.seed << " repetitions=" << spec.repetitions
      << " threads=" << spec.threads << '\n'
      << kBenchHeader << '\n';
  std::vector<std::array<std::size_t, 3>> dims;
  if (spec.sizes.empty()) dims.push_back({spec.m, spec.k, spec.n});
  for (auto s : spec.sizes) dims.push_back({s, s, s});
  for (const auto& d : dims)
    for (auto algo : algos)
      visit_elem(spec.dtype, [&](auto tag) {
        using T = typename decltype(tag)::type;
        if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, int128_t>) {
          throw UsageError("dtype must be i8, i16 or i32");
        } else {
          detail::run_bench<T>(spec, algo, d[0], d[1], d[2], out);
        }
      });
  return kOk;
}

inline int cmd_model(const RunSpec& spec, std::ostream& out) {
  spec.validate();
  const auto algos = spec.algos.empty() ? std::vector{Algorithm::Standard, Algorithm::Strassen2} : spec.algos;
  const auto dtypes = spec.dtypes.empty() ? std::vector{spec.dtype} : spec.dtypes;
  const auto names = spec.platforms.empty() ? std::vector<std::string>{"hbm", "ddr"} : spec.platforms;
  const auto sizes = spec.sizes.empty()
                         ? std::vector<std::size_t>{256, 512, 1024, 2048, 4096, 6144, 8192}
                         : spec.sizes;
  std::vector<SweepConfig> configs;
  for (const auto& name : names) {
    const PlatformModel p = load_platform(name);
    for (auto algo : algos)
      for (auto dt : dtypes) configs.push_back({std::string(to_string(algo)), schedule_for(algo), p, dt});
  }
  out << kModelHeader << '\n';
  for (const auto& row : sweep(sizes, configs)) {
    out << row.platform << ',' << row.algo << ',' << to_string(row.elem) << ',' << row.n << ','
        << std::fixed << std::setprecision(3) << row.report.gops << std::defaultfloat << ','
        << row.report.bottleneck_label() << '\n';
  }
  return kOk;
}

inline Schedule named_schedule(const std::string& name) {
  if (name == "base" || name == "strassen") return base_schedule();
  if (name == "standard2") return standard_schedule(2);
  if (name == "standard4" || name == "standard") return standard_schedule(4);
  if (name == "strassen1") return schedule_for(Algorithm::Strassen1);
  if (name == "strassen2") return strassen_squared_schedule();
  throw UsageError("unknown schedule '" + name + "' (base, standard2, standard4, strassen1, strassen2)");
}

inline int cmd_schedule(const RunSpec& spec, std::ostream& out) {
  write_schedule_json(out, named_schedule(spec.schedule_name));
  return kOk;
}

inline int cmd_sim_trace(const RunSpec& spec, std::ostream& out) {
  const SystolicConfig cfg{spec.array_dim, spec.tile_m, spec.tile_k, spec.tile_n};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.steady_state_cycles() > 4096) throw UsageError("sim trace is limited to 4096 steady-state cycles");
  std::mt19937_64 rng(spec.seed);
  return visit_elem(spec.dtype, [&](auto tag) -> int {
    using T = typename decltype(tag)::type;
    if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, int128_t>) {
      throw UsageError("dtype must be i8, i16 or i32");
    } else {
      using Acc = accum_t<T>;
      const auto lt = convert<Acc>(random_matrix<T>(cfg.k_p, cfg.m_p, rng));
      const auto r = convert<Acc>(random_matrix<T>(cfg.k_p, cfg.n_p, rng));
      write_systolic_trace(out, cfg, lt, r);
      return kOk;
    }
  });
}

// Runs `body` and maps exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const MatrixIoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const PlatformConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace s2gemm::cli
