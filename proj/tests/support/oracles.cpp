#include "oracles.hpp"

#include <cmath>
#include <set>
#include <tuple>

namespace hgcf::testing {

GraphSpec random_graph(std::mt19937_64& rng, std::uint32_t max_nodes, std::uint32_t max_edges) {
  std::uniform_int_distribution<std::uint32_t> small(1, 8);
  GraphSpec spec;
  auto& n = spec.nodes;
  n.users = small(rng);
  n.items = small(rng);
  n.descriptions = std::uniform_int_distribution<std::uint32_t>(0, n.items)(rng);
  const std::uint32_t room = max_nodes - n.users - n.items - n.descriptions;
  n.comments = std::uniform_int_distribution<std::uint32_t>(0, std::min<std::uint32_t>(room, 20))(rng);

  // Each comment costs two associations (four directed edges).
  std::uint32_t budget = max_edges / 2;
  auto pick = [&](std::uint32_t count) { return std::uniform_int_distribution<std::uint32_t>(0, count - 1)(rng); };
  for (std::uint32_t c = 0; c < n.comments && budget >= 2; ++c) {
    spec.associations.push_back({AssociationKind::Authorship, pick(n.users), c});
    spec.associations.push_back({AssociationKind::CommentItem, c, pick(n.items)});
    budget -= 2;
  }
  for (std::uint32_t d = 0; d < n.descriptions && budget >= 1; ++d) {
    spec.associations.push_back({AssociationKind::ItemDescription, pick(n.items), d});
    --budget;
  }
  std::uint32_t interactions = std::uniform_int_distribution<std::uint32_t>(0, budget)(rng);
  for (std::uint32_t k = 0; k < interactions; ++k) {
    spec.associations.push_back({AssociationKind::Interaction, pick(n.users), pick(n.items)});
  }
  return spec;
}

namespace {

struct Directed {
  Relation forward;
  Relation backward;
  NodeId a;
  NodeId b;
};

Directed endpoints(const NodeIndex& n, const Association& x) {
  const NodeId user0 = 0;
  const NodeId item0 = n.users;
  const NodeId desc0 = n.users + n.items;
  const NodeId comment0 = desc0 + n.descriptions;
  switch (x.kind) {
    case AssociationKind::Interaction:
      return {Relation::UserInteractsItem, Relation::ItemInteractedByUser, user0 + x.first, item0 + x.second};
    case AssociationKind::Authorship:
      return {Relation::UserWritesComment, Relation::CommentWrittenByUser, user0 + x.first, comment0 + x.second};
    case AssociationKind::CommentItem:
      return {Relation::CommentAboutItem, Relation::ItemHasComment, comment0 + x.first, item0 + x.second};
    case AssociationKind::ItemDescription:
      return {Relation::ItemHasDescription, Relation::DescriptionOfItem, item0 + x.first, desc0 + x.second};
  }
  return {};
}

}  // namespace

std::vector<Matrix> dense_operators(const GraphSpec& spec, const GraphOptions& options) {
  const Eigen::Index n = spec.nodes.total();
  // adjacency[r](dst, src) = 1 when dst receives from src under r.
  std::vector<Matrix> adjacency(kRelationCount, Matrix::Zero(n, n));
  for (const auto& x : spec.associations) {
    auto e = endpoints(spec.nodes, x);
    adjacency[static_cast<std::size_t>(e.forward)](e.b, e.a) = 1.0;
    adjacency[static_cast<std::size_t>(e.backward)](e.a, e.b) = 1.0;
  }
  Matrix all = Matrix::Zero(n, n);
  for (const auto& a : adjacency) all += a;
  const Vector total = all.rowwise().sum();
  const double loop = options.self_connection ? 1.0 : 0.0;

  std::vector<Matrix> ops(kRelationCount, Matrix::Zero(n, n));
  for (std::size_t r = 0; r < kAssociationRelationCount; ++r) {
    Vector in_deg = adjacency[r].rowwise().sum();
    Vector out_deg = adjacency[r].colwise().sum().transpose();
    if (options.homogeneous) {
      in_deg = total.array() + loop;
      out_deg = total.array() + loop;
    }
    Vector left = in_deg.unaryExpr([](double d) { return d > 0 ? 1.0 / std::sqrt(d) : 0.0; });
    Vector right = out_deg.unaryExpr([](double d) { return d > 0 ? 1.0 / std::sqrt(d) : 0.0; });
    ops[r] = left.asDiagonal() * adjacency[r] * right.asDiagonal();
  }
  if (options.self_connection) {
    Vector self = (total.array() + 1.0).inverse();
    ops[static_cast<std::size_t>(Relation::SelfLoop)] = self.asDiagonal();
  }
  return ops;
}

Matrix dense_propagation(const GraphSpec& spec, const GraphOptions& options, const Matrix& initial,
                         const PropagationConfig& cfg) {
  auto ops = dense_operators(spec, options);
  Matrix m = Matrix::Zero(initial.rows(), initial.rows());
  for (const auto& op : ops) m += op;
  auto act = [&](Matrix x) {
    if (cfg.activation == Activation::LeakyRelu) {
      x = x.unaryExpr([](double z) { return z < 0 ? 0.01 * z : z; });
    }
    return x;
  };
  std::vector<double> alpha = cfg.layer_weights;
  if (alpha.empty()) alpha.assign(cfg.layers + 1, 1.0 / cfg.layers);

  std::vector<Matrix> layers{initial};
  for (std::uint32_t l = 1; l <= cfg.layers; ++l) {
    Matrix next = act(m * layers.back());
    if (l >= 2 && cfg.initial_residual) next += layers[1];
    layers.push_back(next);
  }
  if (!cfg.layer_combination) return layers.back();
  Matrix out = Matrix::Zero(initial.rows(), initial.cols());
  for (std::size_t l = 0; l < layers.size(); ++l) out += alpha[l] * layers[l];
  return out;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

namespace {

std::vector<double> dense_layer(const Linear& layer, const std::vector<double>& x, Activation act, bool activate) {
  std::vector<double> y(static_cast<std::size_t>(layer.weight.rows()));
  for (Eigen::Index o = 0; o < layer.weight.rows(); ++o) {
    double s = layer.bias[o];
    for (Eigen::Index i = 0; i < layer.weight.cols(); ++i) s += layer.weight(o, i) * x[static_cast<std::size_t>(i)];
    if (activate && act == Activation::LeakyRelu && s < 0) s *= 0.01;
    y[static_cast<std::size_t>(o)] = s;
  }
  return y;
}

std::vector<double> run_stack(const std::vector<Linear>& stack, std::vector<double> x, Activation act) {
  for (const auto& layer : stack) x = dense_layer(layer, x, act, true);
  return x;
}

}  // namespace

double straight_line_score(const PredictiveParams& p, const NetworkConfig& cfg, const std::vector<double>& u,
                           const std::vector<double>& v) {
  if (cfg.matching == Matching::Inner) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  }
  std::vector<double> fused;
  if (cfg.matching == Matching::Combined) {
    auto hu = run_stack(p.user_tower, u, cfg.activation);
    auto hv = run_stack(cfg.shared_towers ? p.user_tower : p.item_tower, v, cfg.activation);
    for (std::size_t i = 0; i < hu.size(); ++i) fused.push_back(hu[i] * hv[i]);
  }
  std::vector<double> concat = u;
  concat.insert(concat.end(), v.begin(), v.end());
  auto hm = run_stack(p.matching, concat, cfg.activation);
  fused.insert(fused.end(), hm.begin(), hm.end());
  return dense_layer(*p.fusion, fused, cfg.activation, false)[0];
}

std::vector<double> straight_line_project(const PredictiveParams& p, const NetworkConfig& cfg,
                                          const std::vector<double>& x) {
  return run_stack(p.projection, x, cfg.activation);
}

PredictiveParams random_params(const NetworkConfig& cfg, std::uint64_t seed, double scale) {
  PredictiveParams p = init_params(cfg, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& t : tensors(p)) {
    for (auto& x : t.values) x = u(rng);
  }
  return p;
}

}  // namespace hgcf::testing
