// SPDX-License-Identifier: Apache-2.0
#include "clmn/alignment.hpp"
#include "clmn/random.hpp"
#include "clmn/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <span>

namespace {

using namespace clmn;

struct Fixture {
  embed::EmbeddingTable src{1}, tgt{1};
  align::SeedLexicon lexicon;

  Fixture(std::size_t n, std::size_t d) : src(d), tgt(d) {
    Rng rng(7);
    const nn::Mat r = data::random_orthogonal(d, 8);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::RowVectorXd x(static_cast<Eigen::Index>(d));
      for (auto& v : x) v = rng.normal();
      Eigen::RowVectorXd y = x * r;
      const std::string s = "s" + std::to_string(i), t = "t" + std::to_string(i);
      src.add(s, std::span<const double>(x.data(), d));
      tgt.add(t, std::span<const double>(y.data(), d));
      lexicon.pairs.emplace_back(s, t);
    }
  }
};

void BM_Procrustes(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(align::procrustes_init(f.src, f.tgt, f.lexicon, align::Direction::kCh2En));
  }
}
BENCHMARK(BM_Procrustes)->Args({500, 50})->Args({2000, 300})->Unit(benchmark::kMillisecond);

void BM_CslsLexicon(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)), 64);
  const auto m = align::procrustes_init(f.src, f.tgt, f.lexicon, align::Direction::kCh2En).mapping;
  for (auto _ : state) benchmark::DoNotOptimize(align::csls_lexicon(m, f.src, f.tgt));
}
BENCHMARK(BM_CslsLexicon)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Retraction(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  nn::Mat w = data::random_orthogonal(static_cast<std::size_t>(d), 9);
  for (auto _ : state) {
    align::retract_in_place(w, 0.01);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_Retraction)->Arg(64)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
