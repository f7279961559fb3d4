#include "hgcf/evaluator.hpp"
#include "hgcf/prednet.hpp"
#include "hgcf/propagate.hpp"
#include "hgcf/synthetic.hpp"
#include "hgcf/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace hgcf;

Matrix random_rows(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Random bipartite graph plus one description per item and one comment per interaction.
HeteroGraph random_graph(std::uint32_t users, std::uint32_t items, std::uint32_t per_user) {
  std::mt19937_64 rng(1);
  NodeIndex nodes{users, items, items, users * per_user};
  std::vector<Association> assoc;
  std::uint32_t comment = 0;
  for (std::uint32_t u = 0; u < users; ++u) {
    for (std::uint32_t k = 0; k < per_user; ++k) {
      const auto i = static_cast<std::uint32_t>(rng() % items);
      assoc.push_back({AssociationKind::Interaction, u, i});
      assoc.push_back({AssociationKind::Authorship, u, comment});
      assoc.push_back({AssociationKind::CommentItem, comment, i});
      ++comment;
    }
  }
  for (std::uint32_t i = 0; i < items; ++i) assoc.push_back({AssociationKind::ItemDescription, i, i});
  return HeteroGraph::from_associations(nodes, assoc, {});
}

void BM_Propagation(benchmark::State& state) {
  const auto users = static_cast<std::uint32_t>(state.range(0));
  auto graph = random_graph(users, users, 10);
  Matrix e0 = random_rows(graph.nodes().total(), 64, 2);
  PropagationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_embedding_network(graph, e0, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(graph.edge_count()) * cfg.layers);
}
BENCHMARK(BM_Propagation)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

NetworkConfig default_network(Matching m) {
  NetworkConfig cfg;
  cfg.matching = m;
  return cfg;
}

void BM_ForwardBackward(benchmark::State& state) {
  auto cfg = default_network(static_cast<Matching>(state.range(0)));
  auto params = init_params(cfg, 3);
  const Eigen::Index batch = 1024;
  Matrix x = random_rows(batch, cfg.input_dim, 4);
  Matrix y = random_rows(batch, cfg.input_dim, 5);
  for (auto _ : state) {
    StackCache cx, cy;
    Matrix u = project(params, cfg, x, &cx);
    Matrix v = project(params, cfg, y, &cy);
    ForwardCache cache;
    Vector s = forward(u, v, params, cfg, &cache);
    auto grads = zeros_like(params);
    Matrix du, dv;
    backward(cache, Vector::Ones(s.size()), params, cfg, grads, du, dv);
    project_backward(params, cfg, cx, du, grads);
    project_backward(params, cfg, cy, dv, grads);
    benchmark::DoNotOptimize(grads);
  }
  state.SetItemsProcessed(state.iterations() * batch);
  state.SetLabel(to_string(cfg.matching));
}
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  PlantedOptions o;
  o.dimension = 16;
  auto data = make_planted_dataset(o);
  auto corpus = build_corpus(data.reviews, 2021);
  auto cfg = default_network(Matching::Combined);
  cfg.input_dim = 16;
  auto params = init_params(cfg, 6);
  Matrix emb = random_rows(corpus.users.size() + corpus.items.size(), 16, 7);
  ModelScorer scorer(params, cfg, emb, static_cast<std::uint32_t>(corpus.users.size()),
                     static_cast<std::uint32_t>(corpus.items.size()));
  std::vector<std::uint32_t> ks{10, 20};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(corpus, scorer, ks));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.test.size()));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
