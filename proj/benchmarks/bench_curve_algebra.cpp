#include <benchmark/benchmark.h>

#include "thurston/curve_algebra.hpp"

using namespace thurston;

static void BM_word_of_matrix(benchmark::State& state) {
  Slope s(Int(state.range(0)), Int(state.range(0) + 1));
  TwistMatrix m = twist_matrix(s, 2) * twist_matrix(Slope(1, 0), -1) * twist_matrix(Slope(0, 1), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(word_of_matrix(m));
  }
}
BENCHMARK(BM_word_of_matrix)->Arg(4)->Arg(64)->Arg(1024);

static void BM_classify_parabolic(benchmark::State& state) {
  TwistMatrix m = twist_matrix(Slope(Int(state.range(0)), Int(state.range(0) + 1)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_parabolic(m));
  }
}
BENCHMARK(BM_classify_parabolic)->Arg(8)->Arg(512);
