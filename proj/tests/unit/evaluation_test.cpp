// SPDX-License-Identifier: Apache-2.0
#include "clmn/errors.hpp"
#include "clmn/evaluation.hpp"
#include "clmn/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace clmn::eval {
namespace {

std::vector<data::PairExample> positives(std::size_t n) {
  std::vector<data::PairExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    data::PairExample p;
    p.id = "q" + std::to_string(i);
    p.desc_id = p.id;
    p.attributes = {"a" + std::to_string(i)};
    p.description = {"d" + std::to_string(i)};
    out.push_back(p);
  }
  return out;
}

void check_pool(const EvalPool& p, const data::PairExample& query, std::size_t n) {
  ASSERT_EQ(p.candidates.size(), n);
  ASSERT_EQ(p.candidate_ids.size(), n);
  ASSERT_LT(p.gold, n);
  EXPECT_EQ(p.candidate_ids[p.gold], query.desc_id);
  EXPECT_EQ(p.candidates[p.gold], query.description);
  EXPECT_EQ(p.attributes, query.attributes);
  std::set<std::string> ids(p.candidate_ids.begin(), p.candidate_ids.end());
  EXPECT_EQ(ids.size(), n) << "duplicate candidates";
}

TEST(BuildPools, TenCandidatesOneGold) {
  const auto pos = positives(30);
  const auto pools = build_pools(pos, pos, 10, 1);
  ASSERT_EQ(pools.size(), 30u);
  for (std::size_t i = 0; i < pools.size(); ++i) {
    EXPECT_EQ(pools[i].query_id, pos[i].id);
    check_pool(pools[i], pos[i], 10);
  }
}

TEST(BuildPools, TwoCandidatePools) {
  const auto pos = positives(5);
  for (const auto& p : build_pools(pos, pos, 2, 2)) EXPECT_EQ(p.candidates.size(), 2u);
}

TEST(BuildPools, SeededDeterminism) {
  const auto pos = positives(40);
  const auto a = build_pools(pos, pos, 10, 7), b = build_pools(pos, pos, 10, 7), c = build_pools(pos, pos, 10, 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].candidate_ids, b[i].candidate_ids);
    EXPECT_EQ(a[i].gold, b[i].gold);
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].candidate_ids != c[i].candidate_ids;
  EXPECT_TRUE(differs);
}

TEST(BuildPools, GoldSlotIsUniform) {
  const auto pos = positives(20);
  std::vector<int> counts(10, 0);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    for (const auto& p : build_pools(pos, pos, 10, seed)) ++counts[p.gold];
  }
  // 10000 draws, expected 1000 per slot; 5 sigma is about 150.
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(BuildPools, InsufficientDescriptionsRaise) {
  const auto pos = positives(9);
  EXPECT_THROW(build_pools(pos, pos, 10, 0), ContractError);
  EXPECT_THROW(build_pools(pos, pos, 1, 0), ContractError);
}

TEST(BuildPoolSet, IndependentStreams) {
  const auto pos = positives(25);
  PoolSet s = build_pool_set(pos, 3);
  EXPECT_EQ(s.n10.size(), 25u);
  EXPECT_EQ(s.n2.size(), 25u);
  PoolSet only10 = build_pool_set(pos, 3, true, false);
  EXPECT_TRUE(only10.n2.empty());
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(only10.n10[i].candidate_ids, s.n10[i].candidate_ids);
}

TEST(RankPool, Basics) {
  EXPECT_EQ(rank_pool({0.1, 0.9, 0.3}, 1), 1u);
  std::vector<double> distinct{9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
  EXPECT_EQ(rank_pool(distinct, 9), 10u);
  std::vector<double> ties(10, 0.5);
  EXPECT_EQ(rank_pool(ties, 0), 1u);
  EXPECT_EQ(rank_pool(ties, 9), 10u);
  EXPECT_EQ(rank_pool({0.5, 0.7, 0.5, 0.5}, 2), 3u);
  EXPECT_THROW(rank_pool({0.1, std::nan("")}, 0), NumericError);
  EXPECT_THROW(rank_pool({0.1, 0.2}, 2), ContractError);
}

TEST(RankPool, InvariantUnderIncreasingTransforms) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(10);
    for (double& v : s) v = rng.uniform(-3, 3);
    if (trial % 5 == 0) s[3] = s[7];
    const std::size_t gold = rng.index(10);
    std::vector<double> t1, t2;
    for (double v : s) {
      t1.push_back(std::exp(v));
      t2.push_back(2.0 * v + 1.0);
    }
    const std::size_t r = rank_pool(s, gold);
    EXPECT_EQ(rank_pool(t1, gold), r);
    EXPECT_EQ(rank_pool(t2, gold), r);
  }
}

TEST(ComputeMetrics, DefinitionArithmetic) {
  MetricsReport r = compute_metrics({1, 2, 4}, {});
  EXPECT_NEAR(*r.mrr, 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(*r.r10_at_1, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(*r.r10_at_2, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*r.r10_at_5, 1.0, 1e-15);
  EXPECT_FALSE(r.r2_at_1.has_value());
  EXPECT_EQ(r.pool_count, 3u);
}

TEST(ComputeMetrics, PerfectRanking) {
  MetricsReport r = compute_metrics({1, 1, 1, 1}, {1, 1});
  EXPECT_EQ(*r.mrr, 1.0);
  EXPECT_EQ(*r.r10_at_1, 1.0);
  EXPECT_EQ(*r.r10_at_2, 1.0);
  EXPECT_EQ(*r.r10_at_5, 1.0);
  EXPECT_EQ(*r.r2_at_1, 1.0);
  EXPECT_EQ(r.pool_count_n2, 2u);
}

TEST(ComputeMetrics, RandomScoresMatchClosedForm) {
  // Monte-Carlo oracle: uniform scores make the gold rank uniform on 1..10.
  Rng rng(2024);
  std::vector<std::size_t> r10, r2;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> s(10);
    for (double& v : s) v = rng.uniform();
    r10.push_back(rank_pool(s, rng.index(10)));
    r2.push_back(rank_pool({rng.uniform(), rng.uniform()}, rng.index(2)));
  }
  MetricsReport m = compute_metrics(r10, r2);
  double harmonic = 0.0;
  for (int u = 1; u <= 10; ++u) harmonic += 1.0 / u;
  EXPECT_NEAR(harmonic / 10.0, 0.2929, 1e-4);
  EXPECT_NEAR(*m.r10_at_1, 0.10, 0.02);
  EXPECT_NEAR(*m.r10_at_2, 0.20, 0.02);
  EXPECT_NEAR(*m.r10_at_5, 0.50, 0.03);
  EXPECT_NEAR(*m.mrr, harmonic / 10.0, 0.01);
  EXPECT_NEAR(*m.r2_at_1, 0.50, 0.03);
}

TEST(ComputeMetrics, MonotoneBoundedAndOrderFree) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> ranks(1 + rng.index(50));
    for (auto& r : ranks) r = 1 + rng.index(10);
    MetricsReport a = compute_metrics(ranks, {});
    EXPECT_LE(*a.r10_at_1, *a.r10_at_2);
    EXPECT_LE(*a.r10_at_2, *a.r10_at_5);
    EXPECT_LE(*a.r10_at_5, 1.0);
    EXPECT_GE(*a.mrr, 0.1);
    EXPECT_LE(*a.mrr, 1.0);
    std::vector<std::size_t> shuffled = ranks;
    rng.shuffle(shuffled);
    MetricsReport b = compute_metrics(shuffled, {});
    EXPECT_EQ(*a.r10_at_1, *b.r10_at_1);
    EXPECT_NEAR(*a.mrr, *b.mrr, 1e-15);
  }
  EXPECT_THROW(compute_metrics({}, {}), ContractError);
  EXPECT_THROW(compute_metrics({0}, {}), ContractError);
}

TEST(MetricsReport, JsonRoundTripKeepsUnsetFields) {
  MetricsReport r = compute_metrics({}, {1, 2, 1});
  MetricsReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(back, r);
  EXPECT_FALSE(back.mrr.has_value());
  MetricsReport full = compute_metrics({3, 1, 7}, {2, 1});
  EXPECT_EQ(report_from_json(report_to_json(full)), full);
  EXPECT_THROW(report_from_json("[1,2"), ParseError);
}

TEST(Evaluate, OracleScorerIsPerfectAndConstantScorerFollowsTieRule) {
  const auto pos = positives(30);
  PoolSet pools = build_pool_set(pos, 5);
  PoolScorer oracle = [](const data::Tokens& attrs, const std::vector<data::Tokens>& cands) {
    std::vector<double> s;
    for (const auto& c : cands) s.push_back(c[0].substr(1) == attrs[0].substr(1) ? 1.0 : 0.0);
    return s;
  };
  MetricsReport best = evaluate(pools, oracle);
  EXPECT_EQ(*best.mrr, 1.0);
  EXPECT_EQ(*best.r2_at_1, 1.0);

  PoolScorer flat = [](const data::Tokens&, const std::vector<data::Tokens>& cands) {
    return std::vector<double>(cands.size(), 0.0);
  };
  const auto ranks = rank_pools(pools.n10, flat);
  for (std::size_t i = 0; i < ranks.size(); ++i) EXPECT_EQ(ranks[i], pools.n10[i].gold + 1);

  PoolScorer short_scorer = [](const data::Tokens&, const std::vector<data::Tokens>&) {
    return std::vector<double>{1.0};
  };
  EXPECT_THROW(rank_pools(pools.n10, short_scorer), DimensionError);
}

}  // namespace
}  // namespace clmn::eval
