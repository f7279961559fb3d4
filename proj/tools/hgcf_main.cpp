#include "hgcf/config.hpp"
#include "hgcf/experiment.hpp"
#include "hgcf/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using KeyValues = std::map<std::string, std::string>;

// Flag values land in `flags` under their config key, so the file and the
// command line share one parser.
struct RunFlags {
  std::string config_file;
  KeyValues flags;
  hgcf::RunOptions options;

  void bind(CLI::App& app) {
    app.add_option("--config", config_file, "flat key = value config file; flags override it")
        ->check(CLI::ExistingFile);

    auto value = [&](const std::string& flag, const std::string& key, const std::string& help) {
      app.add_option(flag, flags[key], help);
    };
    auto toggle = [&](const std::string& flag, const std::string& key, bool set_to, const std::string& help) {
      app.add_flag_callback(flag, [this, key, set_to] { flags[key] = set_to ? "true" : "false"; }, help);
    };

    value("--reviews", "reviews", "review JSON lines");
    value("--meta", "meta", "item metadata JSON lines");
    auto* glove = app.add_option("--glove", flags["glove"], "GloVe text vectors");
    auto* emb = app.add_option("--embeddings", flags["embeddings"], "precomputed text-node interchange file");
    glove->excludes(emb);
    value("--stoplist", "stoplist", "stopword list, one word per line");
    value("--layers", "layers", "propagation layers");
    value("--layer-weights", "layer-weights", "comma-separated combination weights, layers + 1 values");
    value("--input-dim", "input-dim", "text embedding size");
    value("--hidden", "hidden", "hidden width of the projection head and branches");
    value("--output-dim", "output-dim", "projected embedding size");
    value("--rl-depth", "rl-depth", "representation-learning branch depth");
    value("--ml-depth", "ml-depth", "matching-function branch depth");
    app.add_option("--matching", flags["matching"], "scoring function")
        ->check(CLI::IsMember({"inner", "mlp", "combined"}));
    app.add_option("--activation", flags["activation"], "non-linearity")
        ->check(CLI::IsMember({"none", "leaky-relu"}));
    value("--dropout-net", "dropout-net", "predictive-network dropout rate");
    value("--dropout-node", "dropout-node", "propagation message dropout rate");
    value("--lambda", "lambda", "L2 regularization weight");
    value("--lr", "lr", "Adam learning rate");
    value("--batch", "batch", "triples per batch");
    value("--epochs", "epochs", "training epochs");
    value("--seed", "seed", "master seed");
    value("--k", "k", "comma-separated cutoffs");
    value("--eval-every", "eval-every", "evaluate every N epochs, 0 = only at the end");
    value("--out", "out", "output directory");
    toggle("--no-layer-comb", "layer-comb", false, "use the last layer instead of the weighted sum");
    toggle("--self-connection", "self-connection", true, "add self loops");
    toggle("--no-init-residual", "init-residual", false, "drop the first-layer residual");
    toggle("--homogeneous-gcn", "homogeneous-gcn", true, "ignore relation types when normalizing");
    toggle("--no-pretrain", "pretrain", false, "random text-node vectors");
    toggle("--drop-comments", "comments", false, "leave comment nodes out of the graph");
    toggle("--drop-descriptions", "descriptions", false, "leave description nodes out of the graph");
    toggle("--shared-towers", "shared-towers", true, "one tower for users and items");
    toggle("--deterministic", "deterministic", true, "omit timings from the metric trace");

    app.add_flag("--dry-run", options.dry_run, "validate config and inputs, write the manifest, no training");
    app.add_option("--export-texts", options.export_texts, "write the text-node manifest (JSON lines)");
    app.add_flag("--dump-embeddings", options.dump_embeddings, "write propagated embeddings");
  }

  hgcf::RunConfig resolve(const CLI::App& app) const {
    KeyValues merged;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      merged = hgcf::read_key_values(in);
    }
    for (const auto& [key, v] : flags) {
      if (!v.empty()) merged[key] = v;
    }
    // Explicitly empty path flags still override the file.
    for (const char* name : {"--reviews", "--meta", "--glove", "--embeddings", "--stoplist", "--out"}) {
      if (app.count(name) > 0) merged[std::string(name).substr(2)] = flags.at(std::string(name).substr(2));
    }
    auto cfg = hgcf::apply_key_values(merged);
    cfg.validate();
    return cfg;
  }
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(part, &used);
    if (used != part.size()) throw hgcf::Error("cannot parse sweep value '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) throw hgcf::Error("no sweep values given");
  return out;
}

int report_stage_error(const hgcf::StageError& e) {
  spdlog::error("{}", e.what());
  std::cout << e.manifest().dump(2) << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("hgcf"));

  CLI::App app{"Heterograph collaborative filtering"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* run = app.add_subcommand("run", "train and evaluate one configuration");
  RunFlags run_flags;
  run_flags.bind(*run);

  auto* sweep = app.add_subcommand("sweep", "one run per value of a hyperparameter");
  RunFlags sweep_flags;
  sweep_flags.bind(*sweep);
  std::string axis;
  std::string values;
  sweep->add_option("--axis", axis, "layers, output-size, dropout-net, dropout-node, lambda, rl-depth, ml-depth")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  auto* synth = app.add_subcommand("synth", "write the planted-preference fixture");
  hgcf::PlantedOptions planted;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--users", planted.users);
  synth->add_option("--items", planted.items);
  synth->add_option("--blocks", planted.blocks);
  synth->add_option("--dimension", planted.dimension);
  synth->add_option("--interactions", planted.interactions_per_user, "interactions per user");
  synth->add_option("--in-block-rate", planted.in_block_rate, "probability of an in-block interaction");
  synth->add_option("--popularity", planted.popularity_exponent, "Zipf exponent of item choice");
  synth->add_option("--word-noise", planted.word_noise, "word-vector noise relative to the centroid scale");
  synth->add_option("--seed", planted.seed);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) {
      auto cfg = run_flags.resolve(*run);
      auto outcome = hgcf::run_experiment(cfg, run_flags.options);
      std::cout << outcome.manifest.dump(2) << '\n';
      return 0;
    }
    if (*sweep) {
      auto cfg = sweep_flags.resolve(*sweep);
      auto report = hgcf::sweep(cfg, hgcf::parse_sweep_axis(axis), parse_values(values));
      std::cout << report.table();
      if (!cfg.out.empty()) {
        std::ofstream(std::filesystem::path(cfg.out) / "sweep.json") << report.to_json().dump(2) << '\n';
        std::ofstream(std::filesystem::path(cfg.out) / "sweep.tsv") << report.table();
      }
      return 0;
    }
    if (*synth) {
      hgcf::write_planted_dataset(hgcf::make_planted_dataset(planted), synth_out);
      spdlog::info("planted fixture written to {}", synth_out);
      return 0;
    }
  } catch (const hgcf::StageError& e) {
    return report_stage_error(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
