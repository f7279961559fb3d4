#pragma once

#include "hgcf/common.hpp"
#include "hgcf/config.hpp"
#include "hgcf/corpus.hpp"
#include "hgcf/evaluator.hpp"
#include "hgcf/hetgraph.hpp"
#include "hgcf/prednet.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace hgcf {

struct Triple {
  UserId user;
  ItemId positive;
  ItemId negative;

  bool operator==(const Triple&) const = default;
};

// One triple per train interaction, in shuffled order, each with a negative
// drawn uniformly from the items the user never interacted with (train or
// test). Users who interacted with every item are skipped.
std::vector<Triple> sample_training_triples(const InteractionCorpus& corpus, std::mt19937_64& rng);

// ln(1 + e^x) without overflow.
double softplus(double x);

double squared_norm(const PredictiveParams& params);

// sum_b softplus(-(pos_b - neg_b)) + lambda * ||params||^2
double bpr_loss(std::span<const double> positive, std::span<const double> negative, const PredictiveParams& params,
                double lambda);

struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;

  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(const PredictiveParams& params);
};

// One bias-corrected Adam update; increments state.step.
void adam_step(PredictiveParams& params, const Gradients& grads, AdamState& state, double lr);

struct BatchResult {
  double data_loss = 0.0;
  double reg_loss = 0.0;
  Gradients grads;

  double loss() const { return data_loss + reg_loss; }
};

// BPR objective and its exact gradient over a batch of triples, reading
// inputs from rows of the combined embedding matrix (user m -> row m,
// item n -> row users + n).
BatchResult batch_gradient(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& embeddings,
                           std::uint32_t num_users, std::span<const Triple> batch, double lambda,
                           const Dropout* dropout = nullptr);

// Scores candidate items with the trained model in evaluation mode.
class ModelScorer {
 public:
  ModelScorer(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& embeddings,
              std::uint32_t num_users, std::uint32_t num_items);

  void operator()(UserId user, std::span<const ItemId> items, std::span<double> scores) const;

 private:
  const PredictiveParams& params_;
  NetworkConfig cfg_;
  Matrix users_;  // projected
  Matrix items_;
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double loss = 0.0;
  std::optional<MetricReport> metrics;
  double wall_ms = 0.0;

  // One trace line; wall_ms is left out when `with_timing` is false so that
  // deterministic runs produce identical traces.
  nlohmann::json to_json(bool with_timing) const;
};

struct TrainResult {
  PredictiveParams params;
  std::vector<EpochRecord> trace;
  bool diverged = false;  // params then hold the last finite state
};

using EpochHook = std::function<void(const EpochRecord&, const PredictiveParams&)>;

// Mini-batch BPR training with Adam. `initial` is E^(0) (needed only for
// node dropout); `combined` is the cached propagated embedding matrix.
TrainResult train(const InteractionCorpus& corpus, const HeteroGraph& graph, const Matrix& initial,
                  const Matrix& combined, const RunConfig& cfg, const EpochHook& on_epoch = {});

}  // namespace hgcf
