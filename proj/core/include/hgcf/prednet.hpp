#pragma once

#include "hgcf/common.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hgcf {

enum class Matching {
  Inner,     // score = u . v, no branch parameters
  Mlp,       // fusion over the matching branch only
  Combined,  // fusion over [representation branch, matching branch]
};

const char* to_string(Matching m);
Matching parse_matching(std::string_view text);

struct NetworkConfig {
  std::uint32_t input_dim = 256;
  std::uint32_t hidden = 128;
  std::uint32_t output_dim = 64;
  std::uint32_t rl_depth = 1;
  std::uint32_t ml_depth = 2;
  Matching matching = Matching::Combined;
  Activation activation = Activation::None;
  bool shared_towers = false;
  double dropout = 0.0;  // inverted dropout after every non-fusion layer, training only
};

void validate(const NetworkConfig& cfg);

// y = x W^T + b for a batch of row vectors.
struct Linear {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Trainable tensors. The projection head maps combined node embeddings
// (input_dim) through hidden to output_dim; the scorer works on its output.
struct PredictiveParams {
  std::vector<Linear> projection;
  std::vector<Linear> user_tower;
  std::vector<Linear> item_tower;  // empty when towers are shared
  std::vector<Linear> matching;
  std::optional<Linear> fusion;    // absent for the inner-product scorer
};

using Gradients = PredictiveParams;

struct TensorRef {
  std::string name;
  std::span<double> values;
  std::vector<std::uint64_t> shape;
};

struct ConstTensorRef {
  std::string name;
  std::span<const double> values;
  std::vector<std::uint64_t> shape;
};

// Stable order: projection, user_tower, item_tower, matching, fusion.
std::vector<TensorRef> tensors(PredictiveParams& params);
std::vector<ConstTensorRef> tensors(const PredictiveParams& params);
std::size_t parameter_count(const PredictiveParams& params);

PredictiveParams zeros_like(const PredictiveParams& params);

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
PredictiveParams init_params(const NetworkConfig& cfg, std::uint64_t seed);

// Present only while training with dropout > 0.
struct Dropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
};

struct LayerCache {
  Matrix input;
  Matrix pre;   // pre-activation
  Matrix mask;  // dropout mask, empty when unused
};

using StackCache = std::vector<LayerCache>;

struct ForwardCache {
  Matrix u;
  Matrix v;
  StackCache user_tower;
  StackCache item_tower;
  StackCache matching;
  Matrix h_user;
  Matrix h_item;
  Matrix fusion_input;
};

// Projection head over rows of the combined embedding matrix.
Matrix project(const PredictiveParams& params, const NetworkConfig& cfg, const Matrix& rows,
               StackCache* cache = nullptr, const Dropout* dropout = nullptr);

// Accumulates projection gradients; the upstream embeddings are constants.
void project_backward(const PredictiveParams& params, const NetworkConfig& cfg, const StackCache& cache,
                      const Matrix& d_out, Gradients& grads);

// Scores each row pair (u_b, v_b) of two batches of projected vectors.
// Throws Error on a non-finite score.
Vector forward(const Matrix& u, const Matrix& v, const PredictiveParams& params, const NetworkConfig& cfg,
               ForwardCache* cache = nullptr, const Dropout* dropout = nullptr);

// Accumulates parameter gradients for upstream d_score and writes the
// gradients with respect to u and v.
void backward(const ForwardCache& cache, const Vector& d_score, const PredictiveParams& params,
              const NetworkConfig& cfg, Gradients& grads, Matrix& d_u, Matrix& d_v);

// Checkpoint layout (little-endian): "LTHP" | u32 version=1 | per tensor:
//   u32 name_len | name | u32 rank | rank x u64 dims | row-major f64 values
inline constexpr std::string_view kCheckpointMagic = "LTHP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const PredictiveParams& params);

// Reads a checkpoint into the layout implied by `cfg`. Throws FormatError on
// a malformed file and Error when names or shapes do not match.
PredictiveParams load_checkpoint(std::istream& in, const NetworkConfig& cfg);

}  // namespace hgcf
