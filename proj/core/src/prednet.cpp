#include "hgcf/prednet.hpp"

#include <cmath>

namespace hgcf {

const char* to_string(Matching m) {
  switch (m) {
    case Matching::Inner: return "inner";
    case Matching::Mlp: return "mlp";
    case Matching::Combined: return "combined";
  }
  return "unknown";
}

Matching parse_matching(std::string_view text) {
  if (text == "inner") return Matching::Inner;
  if (text == "mlp") return Matching::Mlp;
  if (text == "combined") return Matching::Combined;
  throw Error("unknown matching variant: " + std::string(text));
}

void validate(const NetworkConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.hidden == 0 || cfg.output_dim == 0) throw Error("network dimensions must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw Error("network dropout must be in [0, 1)");
}

namespace {

void append(std::vector<TensorRef>& out, const std::string& name, Linear& layer) {
  out.push_back({name + ".weight",
                 {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())},
                 {static_cast<std::uint64_t>(layer.weight.rows()), static_cast<std::uint64_t>(layer.weight.cols())}});
  out.push_back({name + ".bias",
                 {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())},
                 {static_cast<std::uint64_t>(layer.bias.size())}});
}

void append_stack(std::vector<TensorRef>& out, const std::string& prefix, std::vector<Linear>& stack) {
  for (std::size_t i = 0; i < stack.size(); ++i) append(out, prefix + "." + std::to_string(i), stack[i]);
}

Linear make_linear(std::uint32_t in, std::uint32_t out) {
  return {Matrix::Zero(out, in), Vector::Zero(out)};
}

std::vector<Linear> make_stack(std::uint32_t in, std::uint32_t width, std::uint32_t depth) {
  std::vector<Linear> stack;
  for (std::uint32_t i = 0; i < depth; ++i) {
    stack.push_back(make_linear(i == 0 ? in : width, width));
  }
  return stack;
}

PredictiveParams skeleton(const NetworkConfig& cfg) {
  validate(cfg);
  PredictiveParams p;
  p.projection.push_back(make_linear(cfg.input_dim, cfg.hidden));
  p.projection.push_back(make_linear(cfg.hidden, cfg.output_dim));
  if (cfg.matching == Matching::Inner) return p;

  std::uint32_t fusion_width = 0;
  if (cfg.matching == Matching::Combined) {
    p.user_tower = make_stack(cfg.output_dim, cfg.hidden, cfg.rl_depth);
    if (!cfg.shared_towers) p.item_tower = make_stack(cfg.output_dim, cfg.hidden, cfg.rl_depth);
    fusion_width += cfg.rl_depth == 0 ? cfg.output_dim : cfg.hidden;
  }
  p.matching = make_stack(2 * cfg.output_dim, cfg.hidden, cfg.ml_depth);
  fusion_width += cfg.ml_depth == 0 ? 2 * cfg.output_dim : cfg.hidden;
  p.fusion = make_linear(fusion_width, 1);
  return p;
}

double activate(double x, Activation act) {
  return (act == Activation::LeakyRelu && x < 0.0) ? kLeakySlope * x : x;
}

double activate_grad(double pre, Activation act) {
  return (act == Activation::LeakyRelu && pre < 0.0) ? kLeakySlope : 1.0;
}

// Linear layers, each followed by the activation and (when training) dropout.
Matrix stack_forward(const std::vector<Linear>& stack, const Matrix& x, Activation act, StackCache* cache,
                     const Dropout* dropout) {
  if (cache) cache->clear();
  Matrix h = x;
  for (const auto& layer : stack) {
    LayerCache entry;
    Matrix pre = h * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    Matrix post = pre.unaryExpr([act](double z) { return activate(z, act); });
    if (dropout && dropout->rate > 0.0) {
      std::bernoulli_distribution keep(1.0 - dropout->rate);
      const double scale = 1.0 / (1.0 - dropout->rate);
      entry.mask.resize(post.rows(), post.cols());
      for (Eigen::Index k = 0; k < entry.mask.size(); ++k) {
        entry.mask.data()[k] = keep(*dropout->rng) ? scale : 0.0;
      }
      post = post.cwiseProduct(entry.mask);
    }
    if (cache) {
      entry.input = std::move(h);
      entry.pre = std::move(pre);
      cache->push_back(std::move(entry));
    }
    h = std::move(post);
  }
  return h;
}

// Returns d(input); accumulates into `grads`.
Matrix stack_backward(const std::vector<Linear>& stack, const StackCache& cache, Matrix d_out, Activation act,
                      std::vector<Linear>& grads) {
  for (std::size_t i = stack.size(); i-- > 0;) {
    const auto& entry = cache[i];
    if (entry.mask.size() > 0) d_out = d_out.cwiseProduct(entry.mask);
    if (act != Activation::None) {
      d_out = d_out.cwiseProduct(entry.pre.unaryExpr([act](double z) { return activate_grad(z, act); }));
    }
    grads[i].weight.noalias() += d_out.transpose() * entry.input;
    grads[i].bias.noalias() += d_out.colwise().sum().transpose();
    d_out = d_out * stack[i].weight;
  }
  return d_out;
}

void check_scores(const Vector& scores) {
  for (Eigen::Index b = 0; b < scores.size(); ++b) {
    if (!std::isfinite(scores[b])) throw Error("non-finite score at batch row " + std::to_string(b));
  }
}

}  // namespace

std::vector<TensorRef> tensors(PredictiveParams& params) {
  std::vector<TensorRef> out;
  append_stack(out, "projection", params.projection);
  append_stack(out, "user_tower", params.user_tower);
  append_stack(out, "item_tower", params.item_tower);
  append_stack(out, "matching", params.matching);
  if (params.fusion) append(out, "fusion", *params.fusion);
  return out;
}

std::vector<ConstTensorRef> tensors(const PredictiveParams& params) {
  std::vector<ConstTensorRef> out;
  for (auto& t : tensors(const_cast<PredictiveParams&>(params))) {
    out.push_back({std::move(t.name), t.values, std::move(t.shape)});
  }
  return out;
}

std::size_t parameter_count(const PredictiveParams& params) {
  std::size_t n = 0;
  for (const auto& t : tensors(params)) n += t.values.size();
  return n;
}

PredictiveParams zeros_like(const PredictiveParams& params) {
  PredictiveParams z = params;
  for (auto& t : tensors(z)) std::fill(t.values.begin(), t.values.end(), 0.0);
  return z;
}

PredictiveParams init_params(const NetworkConfig& cfg, std::uint64_t seed) {
  PredictiveParams p = skeleton(cfg);
  std::mt19937_64 rng(seed);
  for (auto& t : tensors(p)) {
    if (t.shape.size() != 2) continue;  // biases stay zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.shape[1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : t.values) w = dist(rng);
  }
  return p;
}

Matrix project(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& rows, StackCache* cache,
               const Dropout* dropout) {
  if (rows.cols() != cfg.input_dim) throw Error("projection input width does not match input_dim");
  return stack_forward(params.projection, rows, cfg.activation, cache, dropout);
}

void project_backward(const PredictiveParams& params, const NetworkConfig& cfg, const StackCache& cache,
                      const Matrix& d_out, Gradients& grads) {
  if (cache.size() != params.projection.size()) throw Error("projection cache does not match parameters");
  // The gradient with respect to the propagated embeddings is discarded.
  stack_backward(params.projection, cache, d_out, cfg.activation, grads.projection);
}

Vector forward(const Matrix& u, const Matrix& v, const PredictiveParams& params, const NetworkConfig& cfg,
               ForwardCache* cache, const Dropout* dropout) {
  if (u.rows() != v.rows() || u.cols() != cfg.output_dim || v.cols() != cfg.output_dim) {
    throw Error("scorer inputs must both be batch x output_dim");
  }
  if (cache) {
    cache->u = u;
    cache->v = v;
  }
  if (cfg.matching == Matching::Inner) {
    Vector scores = u.cwiseProduct(v).rowwise().sum();
    check_scores(scores);
    return scores;
  }

  const Eigen::Index batch = u.rows();
  Matrix fusion_input;
  Matrix h_ml;
  {
    Matrix joined(batch, u.cols() + v.cols());
    joined << u, v;
    h_ml = stack_forward(params.matching, joined, cfg.activation, cache ? &cache->matching : nullptr, dropout);
  }
  if (cfg.matching == Matching::Combined) {
    const auto& item_tower = cfg.shared_towers ? params.user_tower : params.item_tower;
    Matrix h_u = stack_forward(params.user_tower, u, cfg.activation, cache ? &cache->user_tower : nullptr, dropout);
    Matrix h_v = stack_forward(item_tower, v, cfg.activation, cache ? &cache->item_tower : nullptr, dropout);
    fusion_input.resize(batch, h_u.cols() + h_ml.cols());
    fusion_input << h_u.cwiseProduct(h_v), h_ml;
    if (cache) {
      cache->h_user = std::move(h_u);
      cache->h_item = std::move(h_v);
    }
  } else {
    fusion_input = std::move(h_ml);
  }
  const Linear& fusion = *params.fusion;
  Vector scores = fusion_input * fusion.weight.row(0).transpose();
  scores.array() += fusion.bias[0];
  check_scores(scores);
  if (cache) cache->fusion_input = std::move(fusion_input);
  return scores;
}

void backward(const ForwardCache& cache, const Vector& d_score, const PredictiveParams& params,
              const NetworkConfig& cfg, Gradients& grads, Matrix& d_u, Matrix& d_v) {
  if (d_score.size() != cache.u.rows()) throw Error("upstream gradient size does not match the cached batch");
  if (cfg.matching == Matching::Inner) {
    d_u = cache.v.array().colwise() * d_score.array();
    d_v = cache.u.array().colwise() * d_score.array();
    return;
  }

  const Linear& fusion = *params.fusion;
  grads.fusion->weight.row(0).noalias() += (cache.fusion_input.transpose() * d_score).transpose();
  grads.fusion->bias[0] += d_score.sum();
  Matrix d_fusion = d_score * fusion.weight.row(0);  // batch x fusion width

  const Eigen::Index out_dim = cache.u.cols();
  const Eigen::Index ml_width = d_fusion.cols() - (cfg.matching == Matching::Combined ? cache.h_user.cols() : 0);
  Matrix d_joined = stack_backward(params.matching, cache.matching, d_fusion.rightCols(ml_width), cfg.activation,
                                   grads.matching);
  d_u = d_joined.leftCols(out_dim);
  d_v = d_joined.rightCols(out_dim);

  if (cfg.matching == Matching::Combined) {
    Matrix d_rl = d_fusion.leftCols(cache.h_user.cols());
    Matrix d_hu = d_rl.cwiseProduct(cache.h_item);
    Matrix d_hv = d_rl.cwiseProduct(cache.h_user);
    d_u += stack_backward(params.user_tower, cache.user_tower, std::move(d_hu), cfg.activation, grads.user_tower);
    if (cfg.shared_towers) {
      d_v += stack_backward(params.user_tower, cache.item_tower, std::move(d_hv), cfg.activation, grads.user_tower);
    } else {
      d_v += stack_backward(params.item_tower, cache.item_tower, std::move(d_hv), cfg.activation, grads.item_tower);
    }
  }
}

}  // namespace hgcf
