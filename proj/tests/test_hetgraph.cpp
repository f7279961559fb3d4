#include "fixtures.hpp"
#include "oracles.hpp"

#include "hgcf/hetgraph.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <random>

namespace hgcf {
namespace {

using testing::review;

std::vector<ReviewRecord> single_user_reviews(const std::string& comment) {
  return {review("u1", "v1", 10, comment)};
}

TEST(BuildGraph, SingleInteractionWithTexts) {
  auto reviews = single_user_reviews("nice tune");
  std::vector<DescriptionRecord> descriptions{{"v1", "a record"}};
  auto corpus = build_corpus(reviews, 1);
  GraphOptions options;
  auto text = collect_text_nodes(corpus, reviews, descriptions, options);
  auto graph = build_graph(corpus, text, options);

  EXPECT_EQ(graph.nodes(), (NodeIndex{1, 1, 1, 1}));
  EXPECT_EQ(graph.edge_count(), 8u);
  const NodeId u = 0, v = 1, d = 2, c = 3;
  EXPECT_EQ(graph.edges(Relation::UserInteractsItem).size(), 1u);
  EXPECT_EQ(graph.edges(Relation::UserInteractsItem)[0].src, u);
  EXPECT_EQ(graph.edges(Relation::UserInteractsItem)[0].dst, v);
  EXPECT_EQ(graph.edges(Relation::UserWritesComment)[0].dst, c);
  EXPECT_EQ(graph.edges(Relation::CommentAboutItem)[0].src, c);
  EXPECT_EQ(graph.edges(Relation::ItemHasDescription)[0].dst, d);
  for (std::size_t r = 0; r < kAssociationRelationCount; ++r) {
    EXPECT_EQ(graph.edges(static_cast<Relation>(r)).size(), 1u) << to_string(static_cast<Relation>(r));
  }
}

TEST(BuildGraph, EmptyCommentMakesNoNode) {
  auto reviews = single_user_reviews("");
  std::vector<DescriptionRecord> descriptions{{"v1", "a record"}};
  auto corpus = build_corpus(reviews, 1);
  auto text = collect_text_nodes(corpus, reviews, descriptions, {});
  auto graph = build_graph(corpus, text, {});
  EXPECT_EQ(graph.nodes(), (NodeIndex{1, 1, 1, 0}));
  EXPECT_EQ(graph.edge_count(), 4u);
}

TEST(BuildGraph, AblationsDropTextNodes) {
  auto reviews = single_user_reviews("nice tune");
  std::vector<DescriptionRecord> descriptions{{"v1", "a record"}};
  auto corpus = build_corpus(reviews, 1);
  GraphOptions options;
  options.include_comments = false;
  options.include_descriptions = false;
  auto text = collect_text_nodes(corpus, reviews, descriptions, options);
  auto graph = build_graph(corpus, text, options);
  EXPECT_EQ(graph.nodes(), (NodeIndex{1, 1, 0, 0}));
  EXPECT_EQ(graph.edge_count(), 2u);
}

TEST(BuildGraph, TestPairCommentsStayOut) {
  std::vector<ReviewRecord> reviews{review("u", "a", 1, "first"), review("u", "b", 2, "second")};
  for (int i = 0; i < 120; ++i) reviews.push_back(review("w", "x" + std::to_string(i), 1, "filler"));
  auto corpus = build_corpus(reviews, 1);
  ASSERT_EQ(corpus.test.size(), 1u);
  auto text = collect_text_nodes(corpus, reviews, {}, {});
  for (const auto& c : text.comments) {
    EXPECT_FALSE(c.user == corpus.test[0].user && c.item == corpus.test[0].item);
  }
  EXPECT_EQ(text.comments.size(), 121u);
}

NodeIndex four_users_one_item() { return {4, 1, 0, 0}; }

TEST(Normalization, DegreesFourAndOne) {
  std::vector<Association> assoc;
  for (std::uint32_t m = 0; m < 4; ++m) assoc.push_back({AssociationKind::Interaction, m, 0});
  auto g = HeteroGraph::from_associations(four_users_one_item(), assoc, {});
  const NodeId item = 4;
  EXPECT_DOUBLE_EQ(g.norm_coefficient(Relation::UserInteractsItem, item, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.norm_coefficient(Relation::ItemInteractedByUser, 0, item), 0.5);
}

TEST(Normalization, UnitDegrees) {
  std::vector<Association> assoc{{AssociationKind::Interaction, 0, 0}};
  auto g = HeteroGraph::from_associations({1, 1, 0, 0}, assoc, {});
  EXPECT_EQ(g.norm_coefficient(Relation::UserInteractsItem, 1, 0), 1.0);
}

TEST(Normalization, MissingEdgeThrows) {
  std::vector<Association> assoc{{AssociationKind::Interaction, 0, 0}};
  auto g = HeteroGraph::from_associations({2, 1, 0, 0}, assoc, {});
  EXPECT_THROW(g.norm_coefficient(Relation::UserInteractsItem, 2, 1), Error);
}

TEST(Construction, OutOfRangeThrows) {
  std::vector<Association> assoc{{AssociationKind::Interaction, 0, 3}};
  EXPECT_THROW(HeteroGraph::from_associations({1, 1, 0, 0}, assoc, {}), Error);
}

TEST(Construction, DuplicatesCollapse) {
  std::vector<Association> assoc{{AssociationKind::Interaction, 0, 0}, {AssociationKind::Interaction, 0, 0}};
  auto g = HeteroGraph::from_associations({1, 1, 0, 0}, assoc, {});
  EXPECT_EQ(g.edge_count(), 2u);
}

Matrix operator_from_graph(const HeteroGraph& g, Relation r) {
  const auto n = static_cast<Eigen::Index>(g.nodes().total());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& e : g.edges(r)) m(e.dst, e.src) += g.norm_coefficient(r, e.dst, e.src);
  return m;
}

class DenseNormalization : public ::testing::TestWithParam<GraphOptions> {};

TEST_P(DenseNormalization, MatchesDenseOracle) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    auto spec = testing::random_graph(rng);
    auto g = HeteroGraph::from_associations(spec.nodes, spec.associations, GetParam());
    auto oracle = testing::dense_operators(spec, GetParam());
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      Matrix got = operator_from_graph(g, static_cast<Relation>(r));
      EXPECT_LE((got - oracle[r]).cwiseAbs().maxCoeff(), 1e-12) << "relation " << r << " trial " << trial;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, DenseNormalization,
                         ::testing::Values(GraphOptions{}, GraphOptions{.homogeneous = true},
                                           GraphOptions{.self_connection = true},
                                           GraphOptions{.homogeneous = true, .self_connection = true}));

TEST(Properties, InverseSymmetry) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = testing::random_graph(rng);
    for (bool homogeneous : {false, true}) {
      auto g = HeteroGraph::from_associations(spec.nodes, spec.associations, {.homogeneous = homogeneous});
      for (std::size_t r = 0; r < kAssociationRelationCount; ++r) {
        auto rel = static_cast<Relation>(r);
        for (const auto& e : g.edges(rel)) {
          EXPECT_EQ(g.norm_coefficient(rel, e.dst, e.src), g.norm_coefficient(inverse(rel), e.src, e.dst));
        }
      }
    }
  }
}

TEST(Properties, TextNodeDegrees) {
  std::mt19937_64 rng(3);
  std::vector<ReviewRecord> reviews;
  std::vector<DescriptionRecord> descriptions;
  for (int u = 0; u < 30; ++u) {
    for (int k = 0; k < 6; ++k) {
      reviews.push_back(review("u" + std::to_string(u), "i" + std::to_string(rng() % 40), k, k % 3 ? "words" : ""));
    }
  }
  for (int i = 0; i < 40; i += 2) descriptions.push_back({"i" + std::to_string(i), "about"});
  auto corpus = build_corpus(reviews, 2);
  auto text = collect_text_nodes(corpus, reviews, descriptions, {});
  auto g = build_graph(corpus, text, {});
  const auto& n = g.nodes();
  for (std::uint32_t q = 0; q < n.comments; ++q) {
    NodeId c = n.global(NodeKind::Comment, q);
    EXPECT_EQ(g.in_degree(Relation::UserWritesComment, c), 1u);
    EXPECT_EQ(g.in_degree(Relation::ItemHasComment, c), 1u);
    EXPECT_EQ(g.total_degree(c), 2u);
  }
  for (std::uint32_t p = 0; p < n.descriptions; ++p) {
    NodeId d = n.global(NodeKind::Description, p);
    EXPECT_EQ(g.in_degree(Relation::ItemHasDescription, d), 1u);
    EXPECT_EQ(g.total_degree(d), 1u);
  }
}

TEST(Properties, SelfEdgesOnlyWithAblation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto spec = testing::random_graph(rng);
    auto plain = HeteroGraph::from_associations(spec.nodes, spec.associations, {});
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      for (const auto& e : plain.edges(static_cast<Relation>(r))) EXPECT_NE(e.src, e.dst);
    }
    auto looped = HeteroGraph::from_associations(spec.nodes, spec.associations, {.self_connection = true});
    std::vector<int> loops(spec.nodes.total(), 0);
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      for (const auto& e : looped.edges(static_cast<Relation>(r))) {
        if (e.src == e.dst) {
          EXPECT_EQ(static_cast<Relation>(r), Relation::SelfLoop);
          ++loops[e.dst];
        }
      }
    }
    for (int count : loops) EXPECT_EQ(count, 1);
  }
}

TEST(Incoming, CsrCoversEveryEdgeInOrder) {
  std::mt19937_64 rng(15);
  auto spec = testing::random_graph(rng);
  auto g = HeteroGraph::from_associations(spec.nodes, spec.associations, {});
  const auto& csr = g.incoming();
  ASSERT_EQ(csr.offsets.size(), g.nodes().total() + 1u);
  EXPECT_EQ(csr.offsets.back(), g.edge_count());
  for (NodeId dst = 0; dst < g.nodes().total(); ++dst) {
    for (auto k = csr.offsets[dst]; k < csr.offsets[dst + 1]; ++k) {
      EXPECT_EQ(csr.coefs[k], g.norm_coefficient(csr.relations[k], dst, csr.sources[k]));
      if (k > csr.offsets[dst]) {
        EXPECT_LE(std::pair(csr.relations[k - 1], csr.sources[k - 1]), std::pair(csr.relations[k], csr.sources[k]));
      }
    }
  }
}

TEST(NodeIndex, LayoutAndLookup) {
  NodeIndex n{2, 3, 1, 4};
  EXPECT_EQ(n.total(), 10u);
  EXPECT_EQ(n.global(NodeKind::Item, 0), 2u);
  EXPECT_EQ(n.global(NodeKind::Description, 0), 5u);
  EXPECT_EQ(n.global(NodeKind::Comment, 3), 9u);
  EXPECT_EQ(n.kind_of(6), NodeKind::Comment);
  EXPECT_EQ(n.ordinal_of(6), 0u);
  EXPECT_THROW(n.global(NodeKind::Item, 3), Error);
}

TEST(Summary, CountsEdgesPerRelation) {
  std::vector<Association> assoc{{AssociationKind::Interaction, 0, 0}};
  auto g = HeteroGraph::from_associations({1, 1, 0, 0}, assoc, {});
  auto s = g.summary();
  EXPECT_EQ(s["edges"]["user_interacts_item"], 1);
  EXPECT_EQ(s["edge_total"], 2);
}

}  // namespace
}  // namespace hgcf
