#include "hgcf/evaluator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace hgcf {

std::uint32_t rank_candidates(std::span<const double> scores, std::size_t test_position) {
  if (test_position >= scores.size()) throw Error("test position outside the candidate list");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error("non-finite candidate score");
  }
  const double target = scores[test_position];
  std::uint32_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != test_position && scores[i] >= target) ++rank;
  }
  return rank;
}

std::uint32_t rank_candidates(const ScoreFn& score, UserId user, std::span<const ItemId> candidates,
                              ItemId test_item) {
  if (candidates.size() != kEvalCandidates) {
    throw Error("expected " + std::to_string(kEvalCandidates) + " candidates, got " +
                std::to_string(candidates.size()));
  }
  auto it = std::find(candidates.begin(), candidates.end(), test_item);
  if (it == candidates.end()) throw Error("test item missing from candidate list");
  std::vector<double> scores(candidates.size());
  score(user, candidates, scores);
  return rank_candidates(scores, static_cast<std::size_t>(it - candidates.begin()));
}

HitMetrics metrics_at_k(std::span<const std::uint32_t> ranks, std::uint32_t k) {
  if (ranks.empty()) throw Error("metrics over an empty user set");
  HitMetrics m;
  for (auto rank : ranks) {
    if (rank == 0) throw Error("ranks are 1-based");
    if (rank <= k) {
      m.hr += 1.0;
      m.ndcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
    }
  }
  m.hr /= static_cast<double>(ranks.size());
  m.ndcg /= static_cast<double>(ranks.size());
  return m;
}

const HitMetrics& MetricReport::at(std::uint32_t k) const {
  auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw Error("metric at k=" + std::to_string(k) + " was not computed");
  return at_k[static_cast<std::size_t>(it - ks.begin())];
}

nlohmann::json MetricReport::to_json(std::uint64_t seed) const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    j[std::to_string(ks[i])] = {{"hr", at_k[i].hr}, {"ndcg", at_k[i].ndcg}};
  }
  j["users_evaluated"] = users.size();
  j["seed"] = seed;
  return j;
}

MetricReport evaluate(const InteractionCorpus& corpus, const ScoreFn& score, std::span<const std::uint32_t> ks) {
  MetricReport report;
  report.ks.assign(ks.begin(), ks.end());
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const auto& t = corpus.test[i];
    report.users.push_back(t.user);
    report.ranks.push_back(rank_candidates(score, t.user, corpus.candidates[i], t.item));
  }
  for (auto k : ks) report.at_k.push_back(metrics_at_k(report.ranks, k));
  return report;
}

}  // namespace hgcf
