#pragma once

#include "hgcf/common.hpp"
#include "hgcf/corpus.hpp"
#include "hgcf/textembed.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hgcf {

// Node counts and the global id layout [users | items | descriptions | comments].
struct NodeIndex {
  std::uint32_t users = 0;
  std::uint32_t items = 0;
  std::uint32_t descriptions = 0;
  std::uint32_t comments = 0;

  std::uint32_t total() const noexcept { return users + items + descriptions + comments; }
  std::uint32_t base(NodeKind kind) const;
  std::uint32_t count(NodeKind kind) const;
  NodeId global(NodeKind kind, std::uint32_t ordinal) const;
  NodeKind kind_of(NodeId id) const;
  std::uint32_t ordinal_of(NodeId id) const { return id - base(kind_of(id)); }

  NodeId user(UserId m) const { return m; }
  NodeId item(ItemId n) const { return users + n; }

  bool operator==(const NodeIndex&) const = default;
};

// Directed relations. An edge (src -> dst) under relation r means dst
// aggregates a message from src. Every association contributes one edge to
// a relation and the reverse edge to its inverse.
enum class Relation : std::uint8_t {
  UserInteractsItem,     // user -> item
  ItemInteractedByUser,  // item -> user
  UserWritesComment,     // user -> comment
  CommentWrittenByUser,  // comment -> user
  CommentAboutItem,      // comment -> item
  ItemHasComment,        // item -> comment
  ItemHasDescription,    // item -> description
  DescriptionOfItem,     // description -> item
  SelfLoop,              // only with the self-connection ablation
};

inline constexpr std::size_t kRelationCount = 9;
inline constexpr std::size_t kAssociationRelationCount = 8;

Relation inverse(Relation r);
const char* to_string(Relation r);

enum class AssociationKind : std::uint8_t { Interaction, Authorship, CommentItem, ItemDescription };

// An undirected association between two nodes, given by per-kind ordinals:
//   Interaction (user, item), Authorship (user, comment),
//   CommentItem (comment, item), ItemDescription (item, description).
struct Association {
  AssociationKind kind;
  std::uint32_t first;
  std::uint32_t second;
};

struct GraphOptions {
  // Normalize with total degrees over all relations (the plain-GCN ablation).
  bool homogeneous = false;
  // Add one self-edge per node in a dedicated relation.
  bool self_connection = false;
  bool include_comments = true;
  bool include_descriptions = true;
};

struct Edge {
  NodeId src;
  NodeId dst;
  double coef;
};

class HeteroGraph {
 public:
  // Incoming adjacency in CSR form. Within one destination, entries are
  // ordered by (relation, source), which fixes the summation order.
  struct IncomingCsr {
    std::vector<std::uint64_t> offsets;  // size total()+1
    std::vector<NodeId> sources;
    std::vector<double> coefs;
    std::vector<Relation> relations;
  };

  // Throws Error when an association references an ordinal outside `nodes`.
  // Duplicate associations collapse into one.
  static HeteroGraph from_associations(const NodeIndex& nodes, std::span<const Association> associations,
                                       const GraphOptions& options);

  const NodeIndex& nodes() const noexcept { return nodes_; }
  const GraphOptions& options() const noexcept { return options_; }

  std::span<const Edge> edges(Relation r) const { return edges_[static_cast<std::size_t>(r)]; }
  std::size_t edge_count() const;

  std::uint32_t in_degree(Relation r, NodeId node) const;
  std::uint32_t out_degree(Relation r, NodeId node) const;
  // Number of association edges touching `node` (self-loops excluded).
  std::uint32_t total_degree(NodeId node) const { return total_degree_.at(node); }

  // L^r for the edge src -> dst under r:
  //   relational:  1 / sqrt(in_deg_r(dst) * out_deg_r(src))
  //   homogeneous: 1 / sqrt(deg(dst) * deg(src)) over all relations
  // Self-connection adds one to every degree in homogeneous mode; the self
  // edge itself gets 1 / (deg + 1). Throws Error if the edge does not exist.
  double norm_coefficient(Relation r, NodeId dst, NodeId src) const;

  const IncomingCsr& incoming() const noexcept { return incoming_; }

  // Node counts and per-relation edge counts.
  nlohmann::json summary() const;

 private:
  HeteroGraph() = default;
  double compute_coefficient(Relation r, NodeId dst, NodeId src) const;
  bool has_edge(Relation r, NodeId dst, NodeId src) const;

  NodeIndex nodes_;
  GraphOptions options_;
  std::array<std::vector<Edge>, kRelationCount> edges_;
  std::array<std::vector<std::uint32_t>, kRelationCount> in_degree_;
  std::array<std::vector<std::uint32_t>, kRelationCount> out_degree_;
  std::vector<std::uint32_t> total_degree_;
  IncomingCsr incoming_;
};

// Text nodes derived from the training data.
struct CommentNode {
  UserId user;
  ItemId item;
  std::size_t review;  // index into the review list the node was built from
};

struct DescriptionNode {
  ItemId item;
  std::size_t record;  // index into the description list
};

struct TextNodes {
  std::vector<CommentNode> comments;          // ordinal = position
  std::vector<DescriptionNode> descriptions;  // ordinal = position, sorted by item
  std::size_t dropped_comments = 0;           // reviews naming unknown users/items
  std::size_t dropped_descriptions = 0;       // descriptions of unknown items

  std::vector<TextNodeKey> keys() const;
};

// One comment node per non-empty review whose (user, item) pair is a train
// interaction, in review order; one description node per known item with a
// non-empty description (first record wins).
TextNodes collect_text_nodes(const InteractionCorpus& corpus, std::span<const ReviewRecord> reviews,
                             std::span<const DescriptionRecord> descriptions, const GraphOptions& options);

// Heterograph over train interactions plus the given text nodes.
HeteroGraph build_graph(const InteractionCorpus& corpus, const TextNodes& text, const GraphOptions& options);

}  // namespace hgcf
