// SPDX-License-Identifier: Apache-2.0
#include "clmn/evaluation.hpp"

#include "clmn/errors.hpp"
#include "clmn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace clmn::eval {

std::vector<EvalPool> build_pools(const std::vector<data::PairExample>& positives,
                                  const std::vector<data::PairExample>& all_descriptions,
                                  std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractError("build_pools: pool size must be >= 2");
  // Distinct descriptions keyed by description id, in first-seen order.
  std::vector<const data::PairExample*> distinct;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& p : all_descriptions) {
    if (index.emplace(p.desc_id, distinct.size()).second) distinct.push_back(&p);
  }
  if (distinct.size() < n) {
    throw ContractError("build_pools: need " + std::to_string(n) +
                        " distinct descriptions, have " + std::to_string(distinct.size()));
  }

  Rng rng(seed);
  std::vector<EvalPool> pools;
  pools.reserve(positives.size());
  for (const auto& pos : positives) {
    EvalPool pool;
    pool.query_id = pos.id;
    pool.attributes = pos.attributes;
    std::vector<std::size_t> chosen;
    auto own = index.find(pos.desc_id);
    while (chosen.size() + 1 < n) {
      const std::size_t c = rng.index(distinct.size());
      if (own != index.end() && c == own->second) continue;
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      chosen.push_back(c);
    }
    pool.gold = rng.index(n);
    std::size_t k = 0;
    for (std::size_t slot = 0; slot < n; ++slot) {
      if (slot == pool.gold) {
        pool.candidate_ids.push_back(pos.desc_id);
        pool.candidates.push_back(pos.description);
      } else {
        const auto* d = distinct[chosen[k++]];
        pool.candidate_ids.push_back(d->desc_id);
        pool.candidates.push_back(d->description);
      }
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::size_t rank_pool(const std::vector<double>& scores, std::size_t gold) {
  if (gold >= scores.size()) throw ContractError("rank_pool: gold index out of range");
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("rank_pool: NaN score");
  }
  const double g = scores[gold];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > g || (scores[i] == g && i < gold)) ++rank;
  }
  return rank;
}

MetricsReport compute_metrics(const std::vector<std::size_t>& ranks_n10,
                              const std::vector<std::size_t>& ranks_n2) {
  if (ranks_n10.empty() && ranks_n2.empty()) throw ContractError("compute_metrics: no ranks");
  MetricsReport r;
  auto frac_within = [](const std::vector<std::size_t>& ranks, std::size_t k) {
    std::size_t hits = 0;
    for (auto x : ranks) hits += x <= k ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
  };
  if (!ranks_n10.empty()) {
    r.r10_at_1 = frac_within(ranks_n10, 1);
    r.r10_at_2 = frac_within(ranks_n10, 2);
    r.r10_at_5 = frac_within(ranks_n10, 5);
    double acc = 0.0;
    for (auto x : ranks_n10) {
      if (x == 0) throw ContractError("compute_metrics: rank 0 is invalid");
      acc += 1.0 / static_cast<double>(x);
    }
    r.mrr = acc / static_cast<double>(ranks_n10.size());
    r.pool_count = ranks_n10.size();
  }
  if (!ranks_n2.empty()) {
    r.r2_at_1 = frac_within(ranks_n2, 1);
    r.pool_count_n2 = ranks_n2.size();
  }
  return r;
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  put("r2_at_1", r.r2_at_1);
  put("r10_at_1", r.r10_at_1);
  put("r10_at_2", r.r10_at_2);
  put("r10_at_5", r.r10_at_5);
  put("mrr", r.mrr);
  j["pool_count"] = r.pool_count;
  j["pool_count_n2"] = r.pool_count_n2;
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("metrics report: ") + e.what());
  }
  MetricsReport r;
  auto get = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
  };
  r.r2_at_1 = get("r2_at_1");
  r.r10_at_1 = get("r10_at_1");
  r.r10_at_2 = get("r10_at_2");
  r.r10_at_5 = get("r10_at_5");
  r.mrr = get("mrr");
  r.pool_count = j.value("pool_count", std::size_t{0});
  r.pool_count_n2 = j.value("pool_count_n2", std::size_t{0});
  return r;
}

std::vector<std::size_t> rank_pools(const std::vector<EvalPool>& pools, const PoolScorer& scorer) {
  std::vector<std::size_t> ranks;
  ranks.reserve(pools.size());
  for (const auto& p : pools) {
    const auto scores = scorer(p.attributes, p.candidates);
    if (scores.size() != p.candidates.size()) {
      throw DimensionError("scorer returned " + std::to_string(scores.size()) + " scores for " +
                           std::to_string(p.candidates.size()) + " candidates");
    }
    ranks.push_back(rank_pool(scores, p.gold));
  }
  return ranks;
}

PoolSet build_pool_set(const std::vector<data::PairExample>& positives, std::uint64_t seed,
                       bool with_n10, bool with_n2) {
  PoolSet s;
  if (with_n10) s.n10 = build_pools(positives, positives, 10, derive_seed(seed, 10));
  if (with_n2) s.n2 = build_pools(positives, positives, 2, derive_seed(seed, 2));
  return s;
}

MetricsReport evaluate(const PoolSet& pools, const PoolScorer& scorer) {
  return compute_metrics(rank_pools(pools.n10, scorer), rank_pools(pools.n2, scorer));
}

}  // namespace clmn::eval
