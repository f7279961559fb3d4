#pragma once

#include "hgcf/common.hpp"
#include "hgcf/hetgraph.hpp"
#include "hgcf/textembed.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

namespace hgcf {

struct PropagationConfig {
  std::uint32_t layers = 4;
  // alpha_0..alpha_L; empty means 1/L for every layer including layer 0.
  std::vector<double> layer_weights;
  bool initial_residual = true;
  bool layer_combination = true;
  Activation activation = Activation::None;
  // Inverted dropout on outgoing messages of whole nodes (training only).
  double node_dropout = 0.0;
};

// Validates the config and returns alpha_0..alpha_L.
std::vector<double> resolved_layer_weights(const PropagationConfig& cfg);

struct InitReport {
  std::size_t copied = 0;
  std::size_t missing = 0;  // text nodes without a vector (left at zero)
};

// E^(0): user and item rows zero, text rows copied from `text`. Throws Error
// if the set's dimension differs from `dimension`.
Matrix init_embeddings(const HeteroGraph& graph, const TextEmbeddingSet& text, std::uint32_t dimension,
                       InitReport* report = nullptr);

// One propagation step for layer `layer` >= 1:
//   row i = act(sum_r sum_{j in N^r_i} L^r_ij * prev[j]) (+ first[i] when layer >= 2)
// `first` must be given exactly when layer >= 2 and the residual is enabled.
// `source_scale`, when non-empty, multiplies each source node's message
// (node dropout). Throws Error naming the node on a non-finite result.
Matrix propagate_layer(const HeteroGraph& graph, const Matrix& prev, const Matrix* first, std::uint32_t layer,
                       const PropagationConfig& cfg, std::span<const double> source_scale = {});

// sum_l alpha_l E^(l). Throws Error on shape or count mismatch.
Matrix combine_layers(std::span<const Matrix> layers, std::span<const double> weights);

// Runs layers 1..L and combines them (or returns E^(L) when combination is
// off). The propagation has no trainable state, so callers compute this once.
Matrix run_embedding_network(const HeteroGraph& graph, const Matrix& initial, const PropagationConfig& cfg);

// Same, with a node-dropout mask drawn from `rng` when cfg.node_dropout > 0.
Matrix run_embedding_network(const HeteroGraph& graph, const Matrix& initial, const PropagationConfig& cfg,
                             std::mt19937_64& rng);

// Writes every row in the interchange layout, node kinds 0..3.
void write_embedding_dump(std::ostream& out, const HeteroGraph& graph, const Matrix& embeddings);

}  // namespace hgcf
