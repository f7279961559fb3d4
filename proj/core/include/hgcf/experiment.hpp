#pragma once

#include "hgcf/config.hpp"
#include "hgcf/corpus.hpp"
#include "hgcf/evaluator.hpp"
#include "hgcf/hetgraph.hpp"
#include "hgcf/textembed.hpp"
#include "hgcf/trainer.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hgcf {

// Averaged word vectors for every text node.
TextEmbeddingSet embed_text_nodes(const TextNodes& nodes, std::span<const ReviewRecord> reviews,
                                  std::span<const DescriptionRecord> descriptions, const WordVectorTable& words,
                                  const StopList& stoplist);

// JSON lines {"kind": 0|1, "ordinal": n, "text": "..."} (0 = description,
// 1 = comment), the input of the offline sentence-encoder exporter.
void export_text_manifest(std::ostream& out, const TextNodes& nodes, std::span<const ReviewRecord> reviews,
                          std::span<const DescriptionRecord> descriptions);

// Parsed inputs of one run. Exactly one text source is used: `text` when
// set, else `words` when set, else (pretrain off) random vectors.
struct ExperimentInputs {
  std::vector<ReviewRecord> reviews;
  std::vector<DescriptionRecord> descriptions;
  std::optional<WordVectorTable> words;
  std::optional<TextEmbeddingSet> text;
  StopList stoplist;
};

struct PipelineResult {
  InteractionCorpus corpus;
  std::vector<ReviewRecord> reviews;  // test comments stripped
  TextNodes text_nodes;
  std::optional<HeteroGraph> graph;
  Matrix initial;
  Matrix combined;
  TrainResult training;
  std::optional<MetricReport> final_report;
  nlohmann::json timings_ms = nlohmann::json::object();
};

struct PipelineHooks {
  std::function<void(std::string_view stage)> on_stage;
  EpochHook on_epoch;
  bool stop_before_training = false;
};

// corpus -> text embeddings -> graph -> propagation -> training/evaluation.
PipelineResult run_pipeline(const ExperimentInputs& inputs, const RunConfig& cfg, const PipelineHooks& hooks = {});

struct RunOptions {
  bool dry_run = false;
  std::string export_texts;  // path for the text manifest, empty: none
  bool dump_embeddings = false;
};

// A stage failure. The partial manifest (also written to the output
// directory when one is configured) names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, nlohmann::json manifest)
      : Error(stage + ": " + what), stage_(std::move(stage)), manifest_(std::move(manifest)) {}

  const std::string& stage() const noexcept { return stage_; }
  const nlohmann::json& manifest() const noexcept { return manifest_; }

 private:
  std::string stage_;
  nlohmann::json manifest_;
};

struct ExperimentOutcome {
  nlohmann::json manifest;
  std::vector<EpochRecord> trace;
  std::optional<MetricReport> final_report;
};

// File-based run: reads cfg's input paths, records their SHA-256 digests,
// runs the pipeline and writes manifest.json, config.txt, split.json,
// graph.json, trace.jsonl, report.json and checkpoint.bin under cfg.out.
ExperimentOutcome run_experiment(const RunConfig& cfg, const RunOptions& options = {});

std::string sha256_file(const std::filesystem::path& path);

enum class SweepAxis { Layers, OutputSize, DropoutNet, DropoutNode, Lambda, RlDepth, MlDepth };

SweepAxis parse_sweep_axis(std::string_view text);
const char* to_string(SweepAxis axis);
RunConfig with_axis_value(RunConfig cfg, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  double final_loss = 0.0;
  std::optional<MetricReport> report;
};

struct SweepReport {
  SweepAxis axis;
  std::vector<std::uint32_t> ks;
  std::vector<SweepRow> rows;

  // Tab-separated table: axis value, final loss, HR@k/NDCG@k per cutoff.
  std::string table() const;
  nlohmann::json to_json() const;
};

using SweepRunner = std::function<SweepRow(const RunConfig&)>;

SweepReport sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values, const SweepRunner& runner);

// File-based sweep: one run_experiment per value, outputs under
// base.out/<axis>-<value>/.
SweepReport sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values);

}  // namespace hgcf
