#include "hgcf/experiment.hpp"

#include "hgcf/propagate.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace hgcf {
namespace fs = std::filesystem;

TextEmbeddingSet embed_text_nodes(const TextNodes& nodes, std::span<const ReviewRecord> reviews,
                                  std::span<const DescriptionRecord> descriptions, const WordVectorTable& words,
                                  const StopList& stoplist) {
  TextEmbeddingSet set;
  set.dimension = static_cast<std::uint32_t>(words.dimension);
  for (std::uint64_t p = 0; p < nodes.descriptions.size(); ++p) {
    auto tokens = tokenize_and_strip(descriptions[nodes.descriptions[p].record].description_text, stoplist);
    set.vectors.emplace(TextNodeKey{NodeKind::Description, p}, glove_embed(tokens, words));
  }
  for (std::uint64_t q = 0; q < nodes.comments.size(); ++q) {
    auto tokens = tokenize_and_strip(reviews[nodes.comments[q].review].comment_text, stoplist);
    set.vectors.emplace(TextNodeKey{NodeKind::Comment, q}, glove_embed(tokens, words));
  }
  return set;
}

void export_text_manifest(std::ostream& out, const TextNodes& nodes, std::span<const ReviewRecord> reviews,
                          std::span<const DescriptionRecord> descriptions) {
  for (std::size_t p = 0; p < nodes.descriptions.size(); ++p) {
    out << nlohmann::json{{"kind", static_cast<int>(NodeKind::Description)},
                          {"ordinal", p},
                          {"text", descriptions[nodes.descriptions[p].record].description_text}}
               .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
        << '\n';
  }
  for (std::size_t q = 0; q < nodes.comments.size(); ++q) {
    out << nlohmann::json{{"kind", static_cast<int>(NodeKind::Comment)},
                          {"ordinal", q},
                          {"text", reviews[nodes.comments[q].review].comment_text}}
               .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
        << '\n';
  }
}

namespace {

class StageClock {
 public:
  StageClock(PipelineResult& result, const PipelineHooks& hooks) : result_(result), hooks_(hooks) {}
  ~StageClock() { finish(); }

  void begin(std::string_view stage) {
    finish();
    stage_ = stage;
    start_ = std::chrono::steady_clock::now();
    if (hooks_.on_stage) hooks_.on_stage(stage);
  }

  void finish() {
    if (stage_.empty()) return;
    result_.timings_ms[stage_] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    stage_.clear();
  }

 private:
  PipelineResult& result_;
  const PipelineHooks& hooks_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

PipelineResult run_pipeline(const ExperimentInputs& inputs, const RunConfig& cfg, const PipelineHooks& hooks) {
  PipelineResult result;
  StageClock clock(result, hooks);

  clock.begin("corpus");
  cfg.validate();
  result.corpus = build_corpus(inputs.reviews, cfg.seed);
  result.reviews = strip_test_comments(inputs.reviews, result.corpus);

  clock.begin("hetgraph");
  const auto graph_options = cfg.graph_options();
  result.text_nodes = collect_text_nodes(result.corpus, result.reviews, inputs.descriptions, graph_options);
  result.graph.emplace(build_graph(result.corpus, result.text_nodes, graph_options));
  if (hooks.stop_before_training) return result;

  clock.begin("textembed");
  TextEmbeddingSet text;
  if (!cfg.pretrain) {
    auto keys = result.text_nodes.keys();
    text = random_text_embeddings(keys, cfg.input_dim, cfg.seed ^ 0x5eedULL);
  } else if (inputs.text) {
    text = *inputs.text;
  } else if (inputs.words) {
    text = embed_text_nodes(result.text_nodes, result.reviews, inputs.descriptions, *inputs.words, inputs.stoplist);
  } else {
    throw Error("no text source: provide word vectors or precomputed embeddings, or disable pretraining");
  }

  clock.begin("propagate");
  InitReport init_report;
  result.initial = init_embeddings(*result.graph, text, cfg.input_dim, &init_report);
  result.combined = run_embedding_network(*result.graph, result.initial, cfg.propagation());

  clock.begin("train");
  result.training = train(result.corpus, *result.graph, result.initial, result.combined, cfg, hooks.on_epoch);
  if (!result.training.trace.empty()) result.final_report = result.training.trace.back().metrics;
  clock.finish();
  return result;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

namespace {

std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

nlohmann::json corpus_stats(const InteractionCorpus& c) {
  return {{"users", c.users.size()},
          {"items", c.items.size()},
          {"train", c.train.size()},
          {"test", c.test.size()},
          {"excluded_users", c.excluded_users.size()}};
}

}  // namespace

ExperimentOutcome run_experiment(const RunConfig& cfg, const RunOptions& options) {
  ExperimentOutcome outcome;
  auto& manifest = outcome.manifest;
  manifest["config"] = to_json(cfg);
  manifest["seed"] = cfg.seed;
  manifest["status"] = "running";
  manifest["dry_run"] = options.dry_run;
  const bool write_files = !cfg.out.empty();
  const fs::path out_dir = cfg.out;
  std::string stage = "config";

  auto artifact = [&](const std::string& key, const fs::path& name) {
    manifest["artifacts"][key] = (out_dir / name).string();
    return out_dir / name;
  };

  try {
    cfg.validate();
    if (write_files) {
      fs::create_directories(out_dir);
      std::ofstream config_out(artifact("config", "config.txt"));
      write_config(config_out, cfg);
    }

    stage = "inputs";
    if (cfg.reviews.empty()) throw Error("no review file given");
    nlohmann::json digests = nlohmann::json::object();
    for (const auto* path : {&cfg.reviews, &cfg.meta, &cfg.glove, &cfg.embeddings, &cfg.stoplist}) {
      if (!path->empty()) digests[*path] = sha256_file(*path);
    }
    manifest["inputs"] = digests;

    ExperimentInputs inputs;
    {
      auto in = open_input(cfg.reviews);
      inputs.reviews = parse_reviews(in).records;
    }
    if (!cfg.meta.empty()) {
      auto in = open_input(cfg.meta);
      inputs.descriptions = parse_descriptions(in).records;
    }
    if (!cfg.stoplist.empty()) {
      auto in = open_input(cfg.stoplist);
      inputs.stoplist = load_stoplist(in);
    } else {
      inputs.stoplist = long_stopword_list();
    }
    const bool needs_text = cfg.pretrain && !options.dry_run;
    if (needs_text && !cfg.embeddings.empty()) {
      auto in = open_input(cfg.embeddings, std::ios::binary);
      inputs.text = read_embedding_file(in);
    } else if (needs_text && !cfg.glove.empty()) {
      auto in = open_input(cfg.glove);
      inputs.words = load_glove_text(in);
    } else if (needs_text) {
      throw Error("no text source: pass --glove or --embeddings, or --no-pretrain");
    }

    PipelineHooks hooks;
    hooks.on_stage = [&](std::string_view s) { stage = std::string(s); };
    hooks.stop_before_training = options.dry_run;
    std::unique_ptr<std::ofstream> trace_out;
    if (write_files && !options.dry_run) {
      trace_out = std::make_unique<std::ofstream>(artifact("trace", "trace.jsonl"));
    }
    hooks.on_epoch = [&](const EpochRecord& record, const PredictiveParams&) {
      auto line = record.to_json(!cfg.deterministic);
      spdlog::info("epoch {}", line.dump());
      if (trace_out) *trace_out << line.dump() << '\n' << std::flush;
    };

    PipelineResult result = run_pipeline(inputs, cfg, hooks);
    stage = "outputs";
    manifest["corpus"] = corpus_stats(result.corpus);
    manifest["graph"] = result.graph->summary();
    manifest["timings_ms"] = result.timings_ms;

    if (write_files) {
      write_json(artifact("split", "split.json"), split_manifest(result.corpus));
      write_json(artifact("graph", "graph.json"), result.graph->summary());
    }
    if (!options.export_texts.empty()) {
      std::ofstream out(options.export_texts);
      if (!out) throw Error("cannot write " + options.export_texts);
      export_text_manifest(out, result.text_nodes, result.reviews, inputs.descriptions);
      manifest["artifacts"]["text_manifest"] = options.export_texts;
    }

    if (options.dry_run) {
      manifest["status"] = "dry-run";
    } else {
      outcome.trace = result.training.trace;
      outcome.final_report = result.final_report;
      if (result.final_report) manifest["final"] = result.final_report->to_json(cfg.seed);
      manifest["status"] = result.training.diverged ? "diverged" : "ok";
      if (write_files) {
        if (result.final_report) write_json(artifact("report", "report.json"), manifest["final"]);
        std::ofstream ckpt(artifact("checkpoint", "checkpoint.bin"), std::ios::binary);
        save_checkpoint(ckpt, result.training.params);
        if (options.dump_embeddings) {
          std::ofstream dump(artifact("embeddings", "embeddings.bin"), std::ios::binary);
          write_embedding_dump(dump, *result.graph, result.combined);
        }
      }
    }
    if (write_files) write_json(out_dir / "manifest.json", manifest);
    return outcome;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["failed_stage"] = stage;
    manifest["error"] = e.what();
    if (write_files) {
      try {
        fs::create_directories(out_dir);
        write_json(out_dir / "manifest.json", manifest);
      } catch (const std::exception& inner) {
        spdlog::error("could not write partial manifest: {}", inner.what());
      }
    }
    throw StageError(stage, e.what(), manifest);
  }
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "layers") return SweepAxis::Layers;
  if (text == "output-size") return SweepAxis::OutputSize;
  if (text == "dropout-net") return SweepAxis::DropoutNet;
  if (text == "dropout-node") return SweepAxis::DropoutNode;
  if (text == "lambda") return SweepAxis::Lambda;
  if (text == "rl-depth") return SweepAxis::RlDepth;
  if (text == "ml-depth") return SweepAxis::MlDepth;
  throw Error("unknown sweep axis: " + std::string(text));
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Layers: return "layers";
    case SweepAxis::OutputSize: return "output-size";
    case SweepAxis::DropoutNet: return "dropout-net";
    case SweepAxis::DropoutNode: return "dropout-node";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::RlDepth: return "rl-depth";
    case SweepAxis::MlDepth: return "ml-depth";
  }
  return "unknown";
}

RunConfig with_axis_value(RunConfig cfg, SweepAxis axis, double value) {
  auto as_count = [&](const char* what) {
    if (value < 0 || value != std::floor(value)) throw Error(std::string(what) + " must be a whole number");
    return static_cast<std::uint32_t>(value);
  };
  switch (axis) {
    case SweepAxis::Layers:
      cfg.layers = as_count("layers");
      cfg.layer_weights.clear();
      break;
    case SweepAxis::OutputSize: cfg.output_dim = as_count("output size"); break;
    case SweepAxis::DropoutNet: cfg.dropout_net = value; break;
    case SweepAxis::DropoutNode: cfg.dropout_node = value; break;
    case SweepAxis::Lambda: cfg.lambda = value; break;
    case SweepAxis::RlDepth: cfg.rl_depth = as_count("rl depth"); break;
    case SweepAxis::MlDepth: cfg.ml_depth = as_count("ml depth"); break;
  }
  return cfg;
}

std::string SweepReport::table() const {
  std::ostringstream out;
  out << to_string(axis) << "\tfinal_loss";
  for (auto k : ks) out << "\thr@" << k << "\tndcg@" << k;
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%g\t%.6g", row.value, row.final_loss);
    out << buf;
    for (auto k : ks) {
      if (row.report) {
        const auto& m = row.report->at(k);
        std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f", m.hr, m.ndcg);
      } else {
        std::snprintf(buf, sizeof buf, "\t-\t-");
      }
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j{{"axis", to_string(axis)}, {"rows", nlohmann::json::array()}};
  for (const auto& row : rows) {
    nlohmann::json r{{"value", row.value}, {"final_loss", row.final_loss}};
    if (row.report) {
      for (auto k : ks) {
        const auto& m = row.report->at(k);
        r["hr@" + std::to_string(k)] = m.hr;
        r["ndcg@" + std::to_string(k)] = m.ndcg;
      }
    }
    j["rows"].push_back(std::move(r));
  }
  return j;
}

SweepReport sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values, const SweepRunner& runner) {
  SweepReport report{axis, base.k, {}};
  for (double value : values) {
    RunConfig cfg = with_axis_value(base, axis, value);
    spdlog::info("sweep {} = {}", to_string(axis), value);
    SweepRow row = runner(cfg);
    row.value = value;
    report.rows.push_back(std::move(row));
  }
  return report;
}

SweepReport sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values) {
  SweepReport report{axis, base.k, {}};
  for (double value : values) {
    RunConfig cfg = with_axis_value(base, axis, value);
    if (!base.out.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "%s-%g", to_string(axis), value);
      cfg.out = (fs::path(base.out) / name).string();
    }
    spdlog::info("sweep {} = {}", to_string(axis), value);
    auto outcome = run_experiment(cfg);
    SweepRow row;
    row.value = value;
    if (!outcome.trace.empty()) row.final_loss = outcome.trace.back().loss;
    row.report = outcome.final_report;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace hgcf
