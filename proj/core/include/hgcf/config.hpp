#pragma once

#include "hgcf/common.hpp"
#include "hgcf/hetgraph.hpp"
#include "hgcf/prednet.hpp"
#include "hgcf/propagate.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace hgcf {

// Every hyperparameter and ablation switch of a run. Each field maps to one
// key of the flat config file and one command-line flag.
struct RunConfig {
  // Inputs.
  std::string reviews;
  std::string meta;
  std::string glove;
  std::string embeddings;
  std::string stoplist;  // empty: built-in list
  bool pretrain = true;  // false: random text-node vectors

  // Graph.
  bool comments = true;
  bool descriptions = true;
  bool homogeneous_gcn = false;
  bool self_connection = false;

  // Propagation.
  std::uint32_t layers = 4;
  std::vector<double> layer_weights;  // empty: 1/L each
  bool init_residual = true;
  bool layer_comb = true;
  double dropout_node = 0.0;

  // Predictive network.
  std::uint32_t input_dim = 256;
  std::uint32_t hidden = 128;
  std::uint32_t output_dim = 64;
  std::uint32_t rl_depth = 1;
  std::uint32_t ml_depth = 2;
  Matching matching = Matching::Combined;
  bool shared_towers = false;
  double dropout_net = 0.0;

  // Both networks.
  Activation activation = Activation::None;

  // Training.
  double lr = 1e-3;
  double lambda = 1e-4;
  std::uint32_t batch = 1024;
  std::uint32_t epochs = 50;
  std::uint64_t seed = 2021;
  std::vector<std::uint32_t> k = {10, 20};
  std::uint32_t eval_every = 1;  // 0: evaluate only after the last epoch
  bool deterministic = false;

  std::string out;

  GraphOptions graph_options() const;
  PropagationConfig propagation() const;
  NetworkConfig network() const;

  // Throws Error describing the first invalid field.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

const char* to_string(Activation a);
Activation parse_activation(const std::string& text);

std::map<std::string, std::string> to_key_values(const RunConfig& cfg);

// Applies `values` on top of `base`. Throws Error on an unknown key or a value
// that does not parse.
RunConfig apply_key_values(const std::map<std::string, std::string>& values, RunConfig base = {});

// "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_key_values(std::istream& in);
void write_config(std::ostream& out, const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace hgcf
