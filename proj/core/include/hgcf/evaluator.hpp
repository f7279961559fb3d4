#pragma once

#include "hgcf/common.hpp"
#include "hgcf/corpus.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hgcf {

// Fills `scores` for `items` of `user`.
using ScoreFn = std::function<void(UserId user, std::span<const ItemId> items, std::span<double> scores)>;

// 1-based rank of scores[test_position] under a descending sort, with the
// test entry placed last among equal scores. Throws Error on a non-finite
// score or an out-of-range position.
std::uint32_t rank_candidates(std::span<const double> scores, std::size_t test_position);

// Scores a candidate list (exactly 100 items, containing `test_item`) and
// ranks the test item.
std::uint32_t rank_candidates(const ScoreFn& score, UserId user, std::span<const ItemId> candidates,
                              ItemId test_item);

struct HitMetrics {
  double hr = 0.0;
  double ndcg = 0.0;
};

// HR@k = mean [rank <= k]; NDCG@k = mean 1/log2(rank + 1) over hits.
// Throws Error on an empty rank list.
HitMetrics metrics_at_k(std::span<const std::uint32_t> ranks, std::uint32_t k);

struct MetricReport {
  std::vector<std::uint32_t> ks;
  std::vector<HitMetrics> at_k;  // parallel to ks
  std::vector<UserId> users;     // evaluated users
  std::vector<std::uint32_t> ranks;  // parallel to users

  const HitMetrics& at(std::uint32_t k) const;
  // {"10": {"hr": .., "ndcg": ..}, ..., "users_evaluated": n, "seed": s}
  nlohmann::json to_json(std::uint64_t seed) const;
};

MetricReport evaluate(const InteractionCorpus& corpus, const ScoreFn& score, std::span<const std::uint32_t> ks);

}  // namespace hgcf
