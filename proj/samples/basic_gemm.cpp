// Multiplies two random int8 matrices with the Strassen-squared engine and
// prints the micro-kernel call count next to the standard schedule's.
#include <cstdio>
#include <random>

#include "s2gemm/s2gemm.hpp"

int main() {
  using namespace s2gemm;
  std::mt19937_64 rng(kDefaultSeed);
  const auto a = random_matrix<std::int8_t>(512, 512, rng);
  const auto b = random_matrix<std::int8_t>(512, 512, rng);

  EngineConfig fast;
  GemmStats stats;
  const auto c = gemm(a, b, fast, &stats);

  EngineConfig standard;
  standard.schedule = standard_schedule(4);
  const bool same = c == gemm(a, b, standard);

  std::printf("strassen2 calls: %zu, standard calls: %zu, results equal: %s\n", stats.microkernel_calls,
              count_microkernel_calls(512, 512, 512, standard), same ? "yes" : "no");
  return same ? 0 : 1;
}
