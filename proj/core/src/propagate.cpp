#include "hgcf/propagate.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace hgcf {

std::vector<double> resolved_layer_weights(const PropagationConfig& cfg) {
  if (cfg.layers < 1) throw Error("propagation needs at least one layer");
  if (cfg.node_dropout < 0.0 || cfg.node_dropout >= 1.0) throw Error("node dropout must be in [0, 1)");
  if (cfg.layer_weights.empty()) return std::vector<double>(cfg.layers + 1, 1.0 / cfg.layers);
  if (cfg.layer_weights.size() != cfg.layers + 1) {
    throw Error("expected " + std::to_string(cfg.layers + 1) + " layer weights, got " +
                std::to_string(cfg.layer_weights.size()));
  }
  for (double w : cfg.layer_weights) {
    if (!std::isfinite(w)) throw Error("non-finite layer weight");
  }
  return cfg.layer_weights;
}

Matrix init_embeddings(const HeteroGraph& graph, const TextEmbeddingSet& text, std::uint32_t dimension,
                       InitReport* report) {
  if (text.dimension != dimension && !text.vectors.empty()) {
    throw Error("text embedding dimension " + std::to_string(text.dimension) + " does not match input size " +
                std::to_string(dimension));
  }
  const auto& nodes = graph.nodes();
  Matrix e0 = Matrix::Zero(nodes.total(), dimension);
  InitReport local;
  for (NodeKind kind : {NodeKind::Description, NodeKind::Comment}) {
    for (std::uint32_t ordinal = 0; ordinal < nodes.count(kind); ++ordinal) {
      auto it = text.vectors.find({kind, ordinal});
      if (it == text.vectors.end()) {
        ++local.missing;
        continue;
      }
      e0.row(nodes.global(kind, ordinal)) = Eigen::Map<const RowVector>(it->second.data(), dimension);
      ++local.copied;
    }
  }
  if (local.missing > 0) spdlog::warn("{} text nodes have no embedding; initialized to zero", local.missing);
  if (report) *report = local;
  return e0;
}

Matrix propagate_layer(const HeteroGraph& graph, const Matrix& prev, const Matrix* first, std::uint32_t layer,
                       const PropagationConfig& cfg, std::span<const double> source_scale) {
  const auto n = graph.nodes().total();
  if (layer < 1) throw Error("layer numbers start at 1");
  if (prev.rows() != n) throw Error("embedding rows do not match node count");
  const bool residual = layer >= 2 && cfg.initial_residual;
  if (residual != (first != nullptr)) throw Error("layer-1 embeddings required exactly when the residual applies");
  if (first && (first->rows() != prev.rows() || first->cols() != prev.cols())) {
    throw Error("layer-1 embedding shape mismatch");
  }
  if (!source_scale.empty() && source_scale.size() != n) throw Error("dropout mask size mismatch");

  const auto& csr = graph.incoming();
  Matrix out(prev.rows(), prev.cols());
  RowVector acc(prev.cols());
  for (NodeId i = 0; i < n; ++i) {
    acc.setZero();
    for (auto k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      double w = csr.coefs[k];
      if (!source_scale.empty()) w *= source_scale[csr.sources[k]];
      if (w != 0.0) acc.noalias() += w * prev.row(csr.sources[k]);
    }
    if (cfg.activation == Activation::LeakyRelu) {
      acc = acc.unaryExpr([](double x) { return x > 0.0 ? x : kLeakySlope * x; });
    }
    if (residual) acc += first->row(i);
    if (!acc.allFinite()) {
      throw Error("non-finite embedding at layer " + std::to_string(layer) + ", node " + std::to_string(i));
    }
    out.row(i) = acc;
  }
  return out;
}

Matrix combine_layers(std::span<const Matrix> layers, std::span<const double> weights) {
  if (layers.empty()) throw Error("combine_layers: no layers");
  if (layers.size() != weights.size()) throw Error("combine_layers: layer/weight count mismatch");
  Matrix out = Matrix::Zero(layers[0].rows(), layers[0].cols());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows() != out.rows() || layers[l].cols() != out.cols()) {
      throw Error("combine_layers: shape mismatch at layer " + std::to_string(l));
    }
    out.noalias() += weights[l] * layers[l];
  }
  return out;
}

namespace {

Matrix run_with_mask(const HeteroGraph& graph, const Matrix& initial, const PropagationConfig& cfg,
                     std::span<const double> mask) {
  auto weights = resolved_layer_weights(cfg);
  // Streams the layers into the weighted sum; the accumulation order matches
  // combine_layers exactly.
  Matrix combined;
  if (cfg.layer_combination) {
    combined = Matrix::Zero(initial.rows(), initial.cols());
    combined.noalias() += weights[0] * initial;
  }
  Matrix first;
  Matrix prev;
  for (std::uint32_t l = 1; l <= cfg.layers; ++l) {
    const Matrix& input = l == 1 ? initial : prev;
    const Matrix* residual = (l >= 2 && cfg.initial_residual) ? &first : nullptr;
    Matrix current = propagate_layer(graph, input, residual, l, cfg, mask);
    if (cfg.layer_combination) combined.noalias() += weights[l] * current;
    if (l == 1) first = current;
    prev = std::move(current);
  }
  return cfg.layer_combination ? combined : prev;
}

}  // namespace

Matrix run_embedding_network(const HeteroGraph& graph, const Matrix& initial, const PropagationConfig& cfg) {
  return run_with_mask(graph, initial, cfg, {});
}

Matrix run_embedding_network(const HeteroGraph& graph, const Matrix& initial, const PropagationConfig& cfg,
                             std::mt19937_64& rng) {
  if (cfg.node_dropout <= 0.0) return run_with_mask(graph, initial, cfg, {});
  std::vector<double> mask(graph.nodes().total());
  std::bernoulli_distribution keep(1.0 - cfg.node_dropout);
  const double scale = 1.0 / (1.0 - cfg.node_dropout);
  for (auto& m : mask) m = keep(rng) ? scale : 0.0;
  return run_with_mask(graph, initial, cfg, mask);
}

void write_embedding_dump(std::ostream& out, const HeteroGraph& graph, const Matrix& embeddings) {
  const auto& nodes = graph.nodes();
  if (embeddings.rows() != nodes.total()) throw Error("embedding dump: row count mismatch");
  TextEmbeddingSet set;
  set.dimension = static_cast<std::uint32_t>(embeddings.cols());
  for (NodeId id = 0; id < nodes.total(); ++id) {
    auto row = embeddings.row(id);
    set.vectors.emplace(TextNodeKey{nodes.kind_of(id), nodes.ordinal_of(id)},
                        std::vector<double>(row.data(), row.data() + row.size()));
  }
  write_embedding_file(out, set);
}

}  // namespace hgcf
