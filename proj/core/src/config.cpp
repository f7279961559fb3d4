#include "hgcf/config.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace hgcf {

const char* to_string(Activation a) { return a == Activation::LeakyRelu ? "leaky-relu" : "none"; }

Activation parse_activation(const std::string& text) {
  if (text == "none") return Activation::None;
  if (text == "leaky-relu") return Activation::LeakyRelu;
  throw Error("unknown activation: " + text);
}

GraphOptions RunConfig::graph_options() const {
  return {.homogeneous = homogeneous_gcn,
          .self_connection = self_connection,
          .include_comments = comments,
          .include_descriptions = descriptions};
}

PropagationConfig RunConfig::propagation() const {
  return {.layers = layers,
          .layer_weights = layer_weights,
          .initial_residual = init_residual,
          .layer_combination = layer_comb,
          .activation = activation,
          .node_dropout = dropout_node};
}

NetworkConfig RunConfig::network() const {
  return {.input_dim = input_dim,
          .hidden = hidden,
          .output_dim = output_dim,
          .rl_depth = rl_depth,
          .ml_depth = ml_depth,
          .matching = matching,
          .activation = activation,
          .shared_towers = shared_towers,
          .dropout = dropout_net};
}

void RunConfig::validate() const {
  resolved_layer_weights(propagation());
  hgcf::validate(network());
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("learning rate must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be non-negative");
  if (batch == 0) throw Error("batch size must be positive");
  if (k.empty()) throw Error("at least one cutoff k is required");
  for (auto v : k) {
    if (v == 0) throw Error("cutoffs must be positive");
  }
}

namespace {

std::string join_list(const auto& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config " + key + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw Error("config " + key + ": cannot parse '" + v + "'");
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(parse_number<T>(key, part));
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> to_key_values(const RunConfig& c) {
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  return {
      {"reviews", c.reviews},
      {"meta", c.meta},
      {"glove", c.glove},
      {"embeddings", c.embeddings},
      {"stoplist", c.stoplist},
      {"pretrain", b(c.pretrain)},
      {"comments", b(c.comments)},
      {"descriptions", b(c.descriptions)},
      {"homogeneous-gcn", b(c.homogeneous_gcn)},
      {"self-connection", b(c.self_connection)},
      {"layers", std::to_string(c.layers)},
      {"layer-weights", join_list(c.layer_weights)},
      {"init-residual", b(c.init_residual)},
      {"layer-comb", b(c.layer_comb)},
      {"dropout-node", fmt_double(c.dropout_node)},
      {"input-dim", std::to_string(c.input_dim)},
      {"hidden", std::to_string(c.hidden)},
      {"output-dim", std::to_string(c.output_dim)},
      {"rl-depth", std::to_string(c.rl_depth)},
      {"ml-depth", std::to_string(c.ml_depth)},
      {"matching", to_string(c.matching)},
      {"shared-towers", b(c.shared_towers)},
      {"dropout-net", fmt_double(c.dropout_net)},
      {"activation", to_string(c.activation)},
      {"lr", fmt_double(c.lr)},
      {"lambda", fmt_double(c.lambda)},
      {"batch", std::to_string(c.batch)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"k", join_list(c.k)},
      {"eval-every", std::to_string(c.eval_every)},
      {"deterministic", b(c.deterministic)},
      {"out", c.out},
  };
}

RunConfig apply_key_values(const std::map<std::string, std::string>& values, RunConfig c) {
  for (const auto& [key, v] : values) {
    if (key == "reviews") c.reviews = v;
    else if (key == "meta") c.meta = v;
    else if (key == "glove") c.glove = v;
    else if (key == "embeddings") c.embeddings = v;
    else if (key == "stoplist") c.stoplist = v;
    else if (key == "pretrain") c.pretrain = parse_bool(key, v);
    else if (key == "comments") c.comments = parse_bool(key, v);
    else if (key == "descriptions") c.descriptions = parse_bool(key, v);
    else if (key == "homogeneous-gcn") c.homogeneous_gcn = parse_bool(key, v);
    else if (key == "self-connection") c.self_connection = parse_bool(key, v);
    else if (key == "layers") c.layers = parse_number<std::uint32_t>(key, v);
    else if (key == "layer-weights") c.layer_weights = parse_list<double>(key, v);
    else if (key == "init-residual") c.init_residual = parse_bool(key, v);
    else if (key == "layer-comb") c.layer_comb = parse_bool(key, v);
    else if (key == "dropout-node") c.dropout_node = parse_number<double>(key, v);
    else if (key == "input-dim") c.input_dim = parse_number<std::uint32_t>(key, v);
    else if (key == "hidden") c.hidden = parse_number<std::uint32_t>(key, v);
    else if (key == "output-dim") c.output_dim = parse_number<std::uint32_t>(key, v);
    else if (key == "rl-depth") c.rl_depth = parse_number<std::uint32_t>(key, v);
    else if (key == "ml-depth") c.ml_depth = parse_number<std::uint32_t>(key, v);
    else if (key == "matching") c.matching = parse_matching(v);
    else if (key == "shared-towers") c.shared_towers = parse_bool(key, v);
    else if (key == "dropout-net") c.dropout_net = parse_number<double>(key, v);
    else if (key == "activation") c.activation = parse_activation(v);
    else if (key == "lr") c.lr = parse_number<double>(key, v);
    else if (key == "lambda") c.lambda = parse_number<double>(key, v);
    else if (key == "batch") c.batch = parse_number<std::uint32_t>(key, v);
    else if (key == "epochs") c.epochs = parse_number<std::uint32_t>(key, v);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "k") c.k = parse_list<std::uint32_t>(key, v);
    else if (key == "eval-every") c.eval_every = parse_number<std::uint32_t>(key, v);
    else if (key == "deterministic") c.deterministic = parse_bool(key, v);
    else if (key == "out") c.out = v;
    else throw Error("unknown config key: " + key);
  }
  return c;
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [key, value] : to_key_values(cfg)) out << key << " = " << value << '\n';
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"reviews", c.reviews},
      {"meta", c.meta},
      {"glove", c.glove},
      {"embeddings", c.embeddings},
      {"stoplist", c.stoplist},
      {"use_pretrain", c.pretrain},
      {"use_comments", c.comments},
      {"use_descriptions", c.descriptions},
      {"homogeneous_gcn", c.homogeneous_gcn},
      {"use_self_connection", c.self_connection},
      {"layers", c.layers},
      {"layer_weights", c.layer_weights},
      {"use_initial_residual", c.init_residual},
      {"use_layer_combination", c.layer_comb},
      {"dropout_node", c.dropout_node},
      {"input_dim", c.input_dim},
      {"hidden", c.hidden},
      {"output_dim", c.output_dim},
      {"rl_depth", c.rl_depth},
      {"ml_depth", c.ml_depth},
      {"matching", to_string(c.matching)},
      {"shared_towers", c.shared_towers},
      {"dropout_net", c.dropout_net},
      {"activation", to_string(c.activation)},
      {"lr", c.lr},
      {"lambda", c.lambda},
      {"batch", c.batch},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"k", c.k},
      {"eval_every", c.eval_every},
      {"deterministic", c.deterministic},
      {"out", c.out},
  };
}

}  // namespace hgcf
