#include "hgcf/trainer.hpp"

#include "hgcf/propagate.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>

namespace hgcf {
namespace {

// Independent generator streams derived from the run seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Matrix gather_rows(const Matrix& source, std::span<const NodeId> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  return out;
}

bool all_finite(const PredictiveParams& params) {
  for (const auto& t : tensors(params)) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<Triple> sample_training_triples(const InteractionCorpus& corpus, std::mt19937_64& rng) {
  const ItemId num_items = corpus.items.size();
  std::vector<std::size_t> order(corpus.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Triple> triples;
  triples.reserve(order.size());
  std::uniform_int_distribution<ItemId> any_item(0, num_items - 1);
  std::vector<UserId> saturated;
  for (auto idx : order) {
    const auto& x = corpus.train[idx];
    const auto& seen = corpus.user_items[x.user];
    if (seen.size() >= num_items) {
      if (std::find(saturated.begin(), saturated.end(), x.user) == saturated.end()) saturated.push_back(x.user);
      continue;
    }
    ItemId negative;
    if (seen.size() * 2 < num_items) {
      do negative = any_item(rng);
      while (std::binary_search(seen.begin(), seen.end(), negative));
    } else {
      // Dense user: pick the r-th non-interacted item directly.
      std::uniform_int_distribution<ItemId> pick(0, num_items - static_cast<ItemId>(seen.size()) - 1);
      ItemId r = pick(rng);
      negative = r;
      for (ItemId s : seen) {
        if (s <= negative) ++negative;
        else break;
      }
    }
    triples.push_back({x.user, x.item, negative});
  }
  for (auto u : saturated) spdlog::warn("user {} interacted with every item; no negatives to sample", u);
  return triples;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double squared_norm(const PredictiveParams& params) {
  double total = 0.0;
  for (const auto& t : tensors(params)) {
    for (double v : t.values) total += v * v;
  }
  return total;
}

double bpr_loss(std::span<const double> positive, std::span<const double> negative, const PredictiveParams& params,
                double lambda) {
  if (positive.size() != negative.size()) throw Error("bpr_loss: score lists differ in length");
  double loss = 0.0;
  for (std::size_t b = 0; b < positive.size(); ++b) {
    if (std::isnan(positive[b]) || std::isnan(negative[b])) throw Error("bpr_loss: NaN score");
    loss += softplus(-(positive[b] - negative[b]));
  }
  return loss + lambda * squared_norm(params);
}

AdamState AdamState::for_params(const PredictiveParams& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

void adam_step(PredictiveParams& params, const Gradients& grads, AdamState& state, double lr) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(AdamState::beta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::beta2, t);
  auto p = tensors(params);
  auto g = tensors(grads);
  auto m = tensors(state.first_moment);
  auto v = tensors(state.second_moment);
  if (p.size() != g.size() || p.size() != m.size()) throw Error("adam_step: parameter layout mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].values.size() != g[i].values.size()) throw Error("adam_step: shape mismatch in " + p[i].name);
    for (std::size_t k = 0; k < p[i].values.size(); ++k) {
      const double grad = g[i].values[k];
      double& mk = m[i].values[k];
      double& vk = v[i].values[k];
      mk = AdamState::beta1 * mk + (1.0 - AdamState::beta1) * grad;
      vk = AdamState::beta2 * vk + (1.0 - AdamState::beta2) * grad * grad;
      const double m_hat = mk / correction1;
      const double v_hat = vk / correction2;
      p[i].values[k] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
  }
}

BatchResult batch_gradient(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& embeddings,
                           std::uint32_t num_users, std::span<const Triple> batch, double lambda,
                           const Dropout* dropout) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  std::vector<NodeId> rows(3 * batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rows[i] = batch[i].user;
    rows[batch.size() + i] = num_users + batch[i].positive;
    rows[2 * batch.size() + i] = num_users + batch[i].negative;
  }
  StackCache proj_cache;
  Matrix projected = project(params, cfg, gather_rows(embeddings, rows), &proj_cache, dropout);

  Matrix u(2 * b, projected.cols());
  u << projected.topRows(b), projected.topRows(b);
  Matrix v = projected.bottomRows(2 * b);
  ForwardCache cache;
  Vector scores = forward(u, v, params, cfg, &cache, dropout);

  BatchResult result;
  result.grads = zeros_like(params);
  Vector d_score(2 * b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double diff = scores[i] - scores[b + i];
    result.data_loss += softplus(-diff);
    // d/d diff of softplus(-diff) = -sigmoid(-diff)
    const double g = -1.0 / (1.0 + std::exp(diff));
    d_score[i] = g;
    d_score[b + i] = -g;
  }
  Matrix d_u;
  Matrix d_v;
  backward(cache, d_score, params, cfg, result.grads, d_u, d_v);

  Matrix d_projected(3 * b, projected.cols());
  d_projected << d_u.topRows(b) + d_u.bottomRows(b), d_v;
  project_backward(params, cfg, proj_cache, d_projected, result.grads);

  result.reg_loss = lambda * squared_norm(params);
  if (lambda != 0.0) {
    auto g = tensors(result.grads);
    auto p = tensors(params);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t k = 0; k < g[i].values.size(); ++k) g[i].values[k] += 2.0 * lambda * p[i].values[k];
    }
  }
  return result;
}

ModelScorer::ModelScorer(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& embeddings,
                         std::uint32_t num_users, std::uint32_t num_items)
    : params_(params), cfg_(cfg) {
  users_ = project(params, cfg, embeddings.topRows(num_users));
  items_ = project(params, cfg, embeddings.middleRows(num_users, num_items));
}

void ModelScorer::operator()(UserId user, std::span<const ItemId> items, std::span<double> scores) const {
  const auto n = static_cast<Eigen::Index>(items.size());
  Matrix u = users_.row(user).replicate(n, 1);
  Matrix v(n, items_.cols());
  for (Eigen::Index i = 0; i < n; ++i) v.row(i) = items_.row(items[static_cast<std::size_t>(i)]);
  Vector s = forward(u, v, params_, cfg_);
  std::copy(s.data(), s.data() + s.size(), scores.begin());
}

nlohmann::json EpochRecord::to_json(bool with_timing) const {
  nlohmann::json j = {{"epoch", epoch}, {"loss", loss}};
  if (metrics) {
    for (std::size_t i = 0; i < metrics->ks.size(); ++i) {
      j["hr@" + std::to_string(metrics->ks[i])] = metrics->at_k[i].hr;
      j["ndcg@" + std::to_string(metrics->ks[i])] = metrics->at_k[i].ndcg;
    }
  }
  if (with_timing) j["wall_ms"] = wall_ms;
  return j;
}

TrainResult train(const InteractionCorpus& corpus, const HeteroGraph& graph, const Matrix& initial,
                  const Matrix& combined, const RunConfig& cfg, const EpochHook& on_epoch) {
  cfg.validate();
  const NetworkConfig net = cfg.network();
  const PropagationConfig prop = cfg.propagation();
  const std::uint32_t num_users = graph.nodes().users;
  const std::uint32_t num_items = graph.nodes().items;
  if (combined.rows() != graph.nodes().total() || combined.cols() != net.input_dim) {
    throw Error("combined embeddings do not match the graph and input_dim");
  }

  TrainResult result{init_params(net, cfg.seed), {}, false};
  AdamState state = AdamState::for_params(result.params);
  std::mt19937_64 sample_rng(stream_seed(cfg.seed, 1));
  std::mt19937_64 dropout_rng(stream_seed(cfg.seed, 2));
  std::mt19937_64 node_rng(stream_seed(cfg.seed, 3));
  Dropout dropout{cfg.dropout_net, &dropout_rng};
  const Dropout* dropout_ptr = cfg.dropout_net > 0.0 ? &dropout : nullptr;

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto start = std::chrono::steady_clock::now();
    Matrix dropped;
    const Matrix* embeddings = &combined;
    if (prop.node_dropout > 0.0) {
      dropped = run_embedding_network(graph, initial, prop, node_rng);
      embeddings = &dropped;
    }

    auto triples = sample_training_triples(corpus, sample_rng);
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t begin = 0; begin < triples.size(); begin += cfg.batch) {
      auto count = std::min<std::size_t>(cfg.batch, triples.size() - begin);
      auto batch = std::span<const Triple>(triples).subspan(begin, count);
      BatchResult step = batch_gradient(result.params, net, *embeddings, num_users, batch, cfg.lambda, dropout_ptr);
      if (!std::isfinite(step.loss())) {
        spdlog::error("loss diverged at epoch {}; keeping the last finite parameters", epoch);
        result.diverged = true;
        return result;
      }
      PredictiveParams before = result.params;
      adam_step(result.params, step.grads, state, cfg.lr);
      if (!all_finite(result.params)) {
        spdlog::error("parameters diverged at epoch {}; keeping the last finite parameters", epoch);
        result.params = std::move(before);
        result.diverged = true;
        return result;
      }
      record.loss += step.loss();
    }

    bool evaluate_now = (cfg.eval_every > 0 && epoch % cfg.eval_every == 0) || epoch == cfg.epochs;
    if (evaluate_now && !corpus.test.empty()) {
      ModelScorer scorer(result.params, net, combined, num_users, num_items);
      record.metrics = evaluate(corpus, std::cref(scorer), cfg.k);
    }
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back(record);
    if (on_epoch) on_epoch(result.trace.back(), result.params);
  }
  return result;
}

}  // namespace hgcf
