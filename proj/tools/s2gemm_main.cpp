#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "s2gemm/cli.hpp"

namespace {

using namespace s2gemm;
using cli::RunSpec;

// Opens --out if given, otherwise stdout.
std::ostream& output(const RunSpec& spec, std::unique_ptr<std::ofstream>& file) {
  if (spec.out_path.empty()) return std::cout;
  file = std::make_unique<std::ofstream>(spec.out_path);
  if (!*file) throw MatrixIoError("cannot open '" + spec.out_path + "' for writing");
  return *file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strassen-squared blocked integer GeMM: engine, schedules, systolic simulator, perf model"};
  app.require_subcommand(1);

  RunSpec spec;
  std::string dtype = "i16", algo = "strassen2", backend = "fast";
  std::vector<std::string> algos, dtypes;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dtype", dtype, "Element type: i8, i16, i32")->capture_default_str();
    sub->add_option("--seed", spec.seed, "PRNG seed (mt19937_64)")->capture_default_str();
    sub->add_option("--threads", spec.threads, "Worker threads over output blocks")->capture_default_str();
    sub->add_option("--backend", backend, "Tile product backend: fast, systolic")->capture_default_str();
  };
  auto add_dims = [&](CLI::App* sub) {
    sub->add_option("--m", spec.m)->capture_default_str();
    sub->add_option("--k", spec.k)->capture_default_str();
    sub->add_option("--n", spec.n)->capture_default_str();
  };

  auto* gemm = app.add_subcommand("gemm", "Multiply seeded random (or file) matrices");
  add_common(gemm);
  add_dims(gemm);
  gemm->add_option("--algo", algo, "standard, strassen1, strassen2")->capture_default_str();
  gemm->add_option("--a", spec.a_path, "SGMM file for A");
  gemm->add_option("--b", spec.b_path, "SGMM file for B");
  gemm->add_option("--out", spec.out_path, "Write C as an SGMM file");
  gemm->add_flag("--verify", spec.verify, "Check against the triple-loop reference");

  auto* bench = app.add_subcommand("bench", "Time algorithms, emit CSV");
  add_common(bench);
  add_dims(bench);
  bench->add_option("--sizes", spec.sizes, "Square sizes (overrides --m/--k/--n)");
  bench->add_option("--algo", algos, "Algorithms to run (default: standard strassen2)");
  bench->add_option("--repetitions,-r", spec.repetitions)->capture_default_str();
  bench->add_option("--out", spec.out_path, "CSV path (default stdout)");

  auto* model = app.add_subcommand("model", "Predicted GOPS curves, emit CSV");
  model->add_option("--platform", spec.platforms, "hbm, ddr, or key=value platform file");
  model->add_option("--algo", algos, "Algorithms (default: standard strassen2)");
  model->add_option("--dtype", dtypes, "Element types (default: i16)");
  model->add_option("--sizes", spec.sizes, "Square sizes");
  model->add_option("--out", spec.out_path, "CSV path (default stdout)");

  auto* schedule = app.add_subcommand("schedule", "Schedule tools");
  schedule->require_subcommand(1);
  auto* dump = schedule->add_subcommand("dump", "Emit a schedule as JSON");
  dump->add_option("name", spec.schedule_name, "base, standard2, standard4, strassen1, strassen2")
      ->capture_default_str();
  dump->add_option("--out", spec.out_path);

  auto* sim = app.add_subcommand("sim", "Systolic simulator tools");
  sim->require_subcommand(1);
  auto* trace = sim->add_subcommand("trace", "Per-cycle CSV register trace of one tile product");
  trace->add_option("--array-dim", spec.array_dim)->capture_default_str();
  trace->add_option("--tile-m", spec.tile_m)->capture_default_str();
  trace->add_option("--tile-k", spec.tile_k)->capture_default_str();
  trace->add_option("--tile-n", spec.tile_n)->capture_default_str();
  trace->add_option("--dtype", dtype)->capture_default_str();
  trace->add_option("--seed", spec.seed)->capture_default_str();
  trace->add_option("--out", spec.out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  return cli::guarded(std::cerr, [&]() -> int {
    try {
      spec.dtype = parse_elem_type(dtype);
      spec.algo = parse_algorithm(algo);
      for (const auto& a : algos) spec.algos.push_back(parse_algorithm(a));
      for (const auto& d : dtypes) spec.dtypes.push_back(parse_elem_type(d));
      if (backend == "fast") spec.backend = Backend::Fast;
      else if (backend == "systolic") spec.backend = Backend::Systolic;
      else throw cli::UsageError("unknown backend '" + backend + "'");
    } catch (const std::invalid_argument& e) {
      throw cli::UsageError(e.what());
    }

    std::unique_ptr<std::ofstream> file;
    if (*gemm) return cli::cmd_gemm(spec, std::cout, std::cerr);
    if (*bench) return cli::cmd_bench(spec, output(spec, file));
    if (*model) return cli::cmd_model(spec, output(spec, file));
    if (*dump) return cli::cmd_schedule(spec, output(spec, file));
    if (*trace) return cli::cmd_sim_trace(spec, output(spec, file));
    throw cli::UsageError("no subcommand");
  });
}
