// SPDX-License-Identifier: Apache-2.0
#include "clmn/autodiff.hpp"
#include "clmn/gru.hpp"
#include "clmn/ops.hpp"
#include "clmn/random.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace clmn;
using namespace clmn::nn;

Mat gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.1 * rng.normal();
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = state.range(0);
  const Mat a = gaussian(n, n, 1), b = gaussian(n, n, 2);
  for (auto _ : state) {
    Graph g(false);
    benchmark::DoNotOptimize(matmul(g.constant(a), g.constant(b)).value().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(300);

void BM_SoftmaxRowsBackward(benchmark::State& state) {
  const Tensor x = Tensor::from_mat(gaussian(50, 100, 3));
  for (auto _ : state) {
    Graph g;
    Var loss = sum(softmax_rows(hadamard(g.param("x", x), g.param("x", x))));
    benchmark::DoNotOptimize(g.backward(loss));
  }
}
BENCHMARK(BM_SoftmaxRowsBackward);

// One GRU layer over `batch` sequences of 2L * 50 steps, forward and backward.
void BM_GruLayer(benchmark::State& state) {
  const Eigen::Index d = state.range(0), batch = state.range(1), steps = 200;
  const Tensor x = Tensor::from_mat(gaussian(batch * steps, d, 4));
  const Tensor wi = Tensor::from_mat(gaussian(d, 3 * d, 5)), wr = Tensor::from_mat(gaussian(d, 3 * d, 6));
  const Tensor b = Tensor::from_mat(Mat::Zero(1, 3 * d));
  for (auto _ : state) {
    Graph g;
    GruWeights w{g.param("wi", wi), g.param("wr", wr), g.param("b", b)};
    GruOutput out = gru_layer(g.param("x", x), w, g.constant(Mat::Zero(1, d)), batch);
    benchmark::DoNotOptimize(g.backward(sum(out.last)));
  }
  state.SetItemsProcessed(state.iterations() * batch * steps);
}
BENCHMARK(BM_GruLayer)->Args({64, 1})->Args({64, 4})->Args({300, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
