// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/dataset.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace clmn::eval {

/// One attribute set against n candidate descriptions, exactly one of them gold.
struct EvalPool {
  std::string query_id;
  data::Tokens attributes;
  std::vector<std::string> candidate_ids;
  std::vector<data::Tokens> candidates;
  std::size_t gold = 0;
};

/// Each positive becomes a pool holding its own description plus n-1
/// distinct other descriptions drawn uniformly; the gold slot is uniform.
/// Throws ContractError if fewer than n distinct descriptions exist.
std::vector<EvalPool> build_pools(const std::vector<data::PairExample>& positives,
                                  const std::vector<data::PairExample>& all_descriptions,
                                  std::size_t n, std::uint64_t seed);

/// 1 + #(scores > gold score) + #(ties at indices before gold).
/// Throws NumericError on NaN.
std::size_t rank_pool(const std::vector<double>& scores, std::size_t gold);

struct MetricsReport {
  std::optional<double> r2_at_1;
  std::optional<double> r10_at_1;
  std::optional<double> r10_at_2;
  std::optional<double> r10_at_5;
  std::optional<double> mrr;
  std::size_t pool_count = 0;
  std::size_t pool_count_n2 = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Rn@k = fraction of pools with rank <= k; MRR = mean 1/rank over the
/// 10-candidate pools. Either list may be empty (its metrics stay unset) but
/// not both.
MetricsReport compute_metrics(const std::vector<std::size_t>& ranks_n10,
                              const std::vector<std::size_t>& ranks_n2);

std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const std::string& text);

using PoolScorer =
    std::function<std::vector<double>(const data::Tokens& attrs, const std::vector<data::Tokens>& cands)>;

std::vector<std::size_t> rank_pools(const std::vector<EvalPool>& pools, const PoolScorer& scorer);

/// Frozen 10- and 2-candidate pools for a split; drawn from independent
/// seed streams.
struct PoolSet {
  std::vector<EvalPool> n10;
  std::vector<EvalPool> n2;
};
PoolSet build_pool_set(const std::vector<data::PairExample>& positives, std::uint64_t seed,
                       bool with_n10 = true, bool with_n2 = true);

MetricsReport evaluate(const PoolSet& pools, const PoolScorer& scorer);

}  // namespace clmn::eval
