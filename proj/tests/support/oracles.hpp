#pragma once

#include "hgcf/hetgraph.hpp"
#include "hgcf/prednet.hpp"
#include "hgcf/propagate.hpp"

#include <random>
#include <vector>

namespace hgcf::testing {

struct GraphSpec {
  NodeIndex nodes;
  std::vector<Association> associations;
};

// Random heterograph with at most `max_nodes` nodes and `max_edges` directed
// edges. Every comment node is tied to one user and one item, like the real
// construction; some nodes may stay isolated.
GraphSpec random_graph(std::mt19937_64& rng, std::uint32_t max_nodes = 50, std::uint32_t max_edges = 200);

// Dense normalized operator per relation, built from the associations with
// no reference to HeteroGraph. Indexed by Relation; SelfLoop is zero unless
// self-connection is on.
std::vector<Matrix> dense_operators(const GraphSpec& spec, const GraphOptions& options);

// Layer-by-layer propagation with dense matrix products.
Matrix dense_propagation(const GraphSpec& spec, const GraphOptions& options, const Matrix& initial,
                         const PropagationConfig& cfg);

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0);

// Scalar evaluation of the scorer for one (u, v) pair of projected vectors,
// using plain loops over the parameter tensors.
double straight_line_score(const PredictiveParams& params, const NetworkConfig& cfg, const std::vector<double>& u,
                           const std::vector<double>& v);

// Scalar evaluation of the projection head for one embedding row.
std::vector<double> straight_line_project(const PredictiveParams& params, const NetworkConfig& cfg,
                                          const std::vector<double>& x);

PredictiveParams random_params(const NetworkConfig& cfg, std::uint64_t seed, double scale = 0.5);

}  // namespace hgcf::testing
