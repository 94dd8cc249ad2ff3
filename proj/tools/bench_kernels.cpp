// Benchmarks the OpenMP kernels against their serial reference
// implementations over training-sized shapes. Run with
// --benchmark_filter=affine etc. to narrow; OMP_NUM_THREADS controls the
// parallel side.

#include <benchmark/benchmark.h>

#include "grain/kernels.hpp"
#include "grain/rng.hpp"

namespace {

grain::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  grain::Matrix m(rows, cols);
  grain::Rng rng(seed);
  for (double& v : m.values) {
    v = rng.normal();
  }
  return m;
}

// Shapes follow the forward pass of a batch: batch x dim times dim x classes.
void shape_args(benchmark::internal::Benchmark* b) {
  b->Args({32, 64, 16});     // minibatch-sized
  b->Args({256, 256, 64});   // mid
  b->Args({1024, 512, 128}); // full-dataset evaluation pass
}

template <typename Fn>
void bench_affine(benchmark::State& state, Fn fn) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto m = static_cast<std::size_t>(state.range(2));
  const grain::Matrix x = random_matrix(n, d, 1);
  const grain::Matrix w = random_matrix(d, m, 2);
  const std::vector<double> bias(m, 0.5);
  grain::Matrix out;
  for (auto _ : state) {
    fn(x, w, bias, out);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d * m));
}

void BM_affine_serial(benchmark::State& state) {
  bench_affine(state, grain::kernels::ref::affine);
}
void BM_affine_omp(benchmark::State& state) {
  bench_affine(state, grain::kernels::affine);
}
BENCHMARK(BM_affine_serial)->Apply(shape_args);
BENCHMARK(BM_affine_omp)->Apply(shape_args);

template <typename Fn>
void bench_matmul_at_b(benchmark::State& state, Fn fn) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const grain::Matrix a = random_matrix(n, d, 3);
  const grain::Matrix b = random_matrix(n, k, 4);
  grain::Matrix out;
  for (auto _ : state) {
    fn(a, b, out);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d * k));
}

void BM_matmul_at_b_serial(benchmark::State& state) {
  bench_matmul_at_b(state, grain::kernels::ref::matmul_at_b);
}
void BM_matmul_at_b_omp(benchmark::State& state) {
  bench_matmul_at_b(state, grain::kernels::matmul_at_b);
}
BENCHMARK(BM_matmul_at_b_serial)->Apply(shape_args);
BENCHMARK(BM_matmul_at_b_omp)->Apply(shape_args);

template <typename Fn>
void bench_matmul_a_bt(benchmark::State& state, Fn fn) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto m = static_cast<std::size_t>(state.range(2));
  const grain::Matrix a = random_matrix(n, d, 5);
  const grain::Matrix b = random_matrix(m, d, 6);
  grain::Matrix out;
  for (auto _ : state) {
    fn(a, b, out);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d * m));
}

void BM_matmul_a_bt_serial(benchmark::State& state) {
  bench_matmul_a_bt(state, grain::kernels::ref::matmul_a_bt);
}
void BM_matmul_a_bt_omp(benchmark::State& state) {
  bench_matmul_a_bt(state, grain::kernels::matmul_a_bt);
}
BENCHMARK(BM_matmul_a_bt_serial)->Apply(shape_args);
BENCHMARK(BM_matmul_a_bt_omp)->Apply(shape_args);

template <typename Fn>
void bench_softmax(benchmark::State& state, Fn fn) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const grain::Matrix src = random_matrix(n, k, 7);
  grain::Matrix work;
  for (auto _ : state) {
    work = src;
    fn(work);
    benchmark::DoNotOptimize(work.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * k));
}

void BM_softmax_rows_serial(benchmark::State& state) {
  bench_softmax(state, grain::kernels::ref::softmax_rows);
}
void BM_softmax_rows_omp(benchmark::State& state) {
  bench_softmax(state, grain::kernels::softmax_rows);
}
BENCHMARK(BM_softmax_rows_serial)->Args({1024, 16})->Args({4096, 128});
BENCHMARK(BM_softmax_rows_omp)->Args({1024, 16})->Args({4096, 128});

}  // namespace

BENCHMARK_MAIN();
