#include "hgcf/hetgraph.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

namespace hgcf {

std::uint32_t NodeIndex::base(NodeKind kind) const {
  switch (kind) {
    case NodeKind::User: return 0;
    case NodeKind::Item: return users;
    case NodeKind::Description: return users + items;
    case NodeKind::Comment: return users + items + descriptions;
  }
  throw Error("invalid node kind");
}

std::uint32_t NodeIndex::count(NodeKind kind) const {
  switch (kind) {
    case NodeKind::User: return users;
    case NodeKind::Item: return items;
    case NodeKind::Description: return descriptions;
    case NodeKind::Comment: return comments;
  }
  throw Error("invalid node kind");
}

NodeId NodeIndex::global(NodeKind kind, std::uint32_t ordinal) const {
  if (ordinal >= count(kind)) {
    throw Error(std::string("node ordinal out of range for kind ") + to_string(kind) + ": " +
                std::to_string(ordinal));
  }
  return base(kind) + ordinal;
}

NodeKind NodeIndex::kind_of(NodeId id) const {
  if (id < users) return NodeKind::User;
  if (id < users + items) return NodeKind::Item;
  if (id < users + items + descriptions) return NodeKind::Description;
  if (id < total()) return NodeKind::Comment;
  throw Error("node id out of range: " + std::to_string(id));
}

Relation inverse(Relation r) {
  switch (r) {
    case Relation::UserInteractsItem: return Relation::ItemInteractedByUser;
    case Relation::ItemInteractedByUser: return Relation::UserInteractsItem;
    case Relation::UserWritesComment: return Relation::CommentWrittenByUser;
    case Relation::CommentWrittenByUser: return Relation::UserWritesComment;
    case Relation::CommentAboutItem: return Relation::ItemHasComment;
    case Relation::ItemHasComment: return Relation::CommentAboutItem;
    case Relation::ItemHasDescription: return Relation::DescriptionOfItem;
    case Relation::DescriptionOfItem: return Relation::ItemHasDescription;
    case Relation::SelfLoop: return Relation::SelfLoop;
  }
  throw Error("invalid relation");
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::UserInteractsItem: return "user_interacts_item";
    case Relation::ItemInteractedByUser: return "item_interacted_by_user";
    case Relation::UserWritesComment: return "user_writes_comment";
    case Relation::CommentWrittenByUser: return "comment_written_by_user";
    case Relation::CommentAboutItem: return "comment_about_item";
    case Relation::ItemHasComment: return "item_has_comment";
    case Relation::ItemHasDescription: return "item_has_description";
    case Relation::DescriptionOfItem: return "description_of_item";
    case Relation::SelfLoop: return "self_loop";
  }
  return "unknown";
}

namespace {

struct Endpoints {
  NodeId a;
  NodeId b;
  Relation a_to_b;
};

Endpoints resolve(const NodeIndex& nodes, const Association& assoc) {
  switch (assoc.kind) {
    case AssociationKind::Interaction:
      return {nodes.global(NodeKind::User, assoc.first), nodes.global(NodeKind::Item, assoc.second),
              Relation::UserInteractsItem};
    case AssociationKind::Authorship:
      return {nodes.global(NodeKind::User, assoc.first), nodes.global(NodeKind::Comment, assoc.second),
              Relation::UserWritesComment};
    case AssociationKind::CommentItem:
      return {nodes.global(NodeKind::Comment, assoc.first), nodes.global(NodeKind::Item, assoc.second),
              Relation::CommentAboutItem};
    case AssociationKind::ItemDescription:
      return {nodes.global(NodeKind::Item, assoc.first), nodes.global(NodeKind::Description, assoc.second),
              Relation::ItemHasDescription};
  }
  throw Error("invalid association kind");
}

std::size_t idx(Relation r) { return static_cast<std::size_t>(r); }

}  // namespace

HeteroGraph HeteroGraph::from_associations(const NodeIndex& nodes, std::span<const Association> associations,
                                           const GraphOptions& options) {
  HeteroGraph g;
  g.nodes_ = nodes;
  g.options_ = options;
  const std::uint32_t n = nodes.total();
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    g.in_degree_[r].assign(n, 0);
    g.out_degree_[r].assign(n, 0);
  }
  g.total_degree_.assign(n, 0);

  std::set<std::tuple<Relation, NodeId, NodeId>> seen;
  for (const auto& assoc : associations) {
    auto [a, b, forward] = resolve(nodes, assoc);
    if (!seen.emplace(forward, a, b).second) continue;
    Relation backward = inverse(forward);
    g.edges_[idx(forward)].push_back({a, b, 0.0});
    g.edges_[idx(backward)].push_back({b, a, 0.0});
    ++g.out_degree_[idx(forward)][a];
    ++g.in_degree_[idx(forward)][b];
    ++g.out_degree_[idx(backward)][b];
    ++g.in_degree_[idx(backward)][a];
    ++g.total_degree_[a];
    ++g.total_degree_[b];
  }
  if (options.self_connection) {
    auto& loops = g.edges_[idx(Relation::SelfLoop)];
    loops.reserve(n);
    for (NodeId v = 0; v < n; ++v) {
      loops.push_back({v, v, 0.0});
      ++g.out_degree_[idx(Relation::SelfLoop)][v];
      ++g.in_degree_[idx(Relation::SelfLoop)][v];
    }
  }

  struct Entry {
    NodeId dst;
    Relation rel;
    NodeId src;
    double coef;
  };
  std::vector<Entry> entries;
  entries.reserve(g.edge_count());
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    for (auto& e : g.edges_[r]) {
      e.coef = g.compute_coefficient(static_cast<Relation>(r), e.dst, e.src);
      entries.push_back({e.dst, static_cast<Relation>(r), e.src, e.coef});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.dst, x.rel, x.src) < std::tie(y.dst, y.rel, y.src);
  });
  auto& csr = g.incoming_;
  csr.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  csr.sources.reserve(entries.size());
  csr.coefs.reserve(entries.size());
  csr.relations.reserve(entries.size());
  for (const auto& e : entries) {
    ++csr.offsets[e.dst + 1];
    csr.sources.push_back(e.src);
    csr.coefs.push_back(e.coef);
    csr.relations.push_back(e.rel);
  }
  std::partial_sum(csr.offsets.begin(), csr.offsets.end(), csr.offsets.begin());
  return g;
}

std::size_t HeteroGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : edges_) total += list.size();
  return total;
}

std::uint32_t HeteroGraph::in_degree(Relation r, NodeId node) const { return in_degree_[idx(r)].at(node); }

std::uint32_t HeteroGraph::out_degree(Relation r, NodeId node) const { return out_degree_[idx(r)].at(node); }

double HeteroGraph::compute_coefficient(Relation r, NodeId dst, NodeId src) const {
  const double loop = options_.self_connection ? 1.0 : 0.0;
  if (r == Relation::SelfLoop) return 1.0 / (static_cast<double>(total_degree_[dst]) + 1.0);
  double d_dst;
  double d_src;
  if (options_.homogeneous) {
    d_dst = total_degree_[dst] + loop;
    d_src = total_degree_[src] + loop;
  } else {
    d_dst = in_degree_[idx(r)][dst];
    d_src = out_degree_[idx(r)][src];
  }
  if (d_dst <= 0 || d_src <= 0) throw Error("normalization of an edge with zero degree");
  return 1.0 / std::sqrt(d_dst * d_src);
}

bool HeteroGraph::has_edge(Relation r, NodeId dst, NodeId src) const {
  if (dst >= nodes_.total() || src >= nodes_.total()) return false;
  auto begin = incoming_.offsets[dst];
  auto end = incoming_.offsets[dst + 1];
  for (auto k = begin; k < end; ++k) {
    if (incoming_.relations[k] == r && incoming_.sources[k] == src) return true;
  }
  return false;
}

double HeteroGraph::norm_coefficient(Relation r, NodeId dst, NodeId src) const {
  if (!has_edge(r, dst, src)) {
    throw Error(std::string("no edge ") + std::to_string(src) + " -> " + std::to_string(dst) + " under " +
                to_string(r));
  }
  return compute_coefficient(r, dst, src);
}

nlohmann::json HeteroGraph::summary() const {
  nlohmann::json relations = nlohmann::json::object();
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    if (static_cast<Relation>(r) == Relation::SelfLoop && !options_.self_connection) continue;
    relations[to_string(static_cast<Relation>(r))] = edges_[r].size();
  }
  return {
      {"nodes",
       {{"users", nodes_.users},
        {"items", nodes_.items},
        {"descriptions", nodes_.descriptions},
        {"comments", nodes_.comments},
        {"total", nodes_.total()}}},
      {"edges", relations},
      {"edge_total", edge_count()},
      {"normalization", options_.homogeneous ? "homogeneous" : "relational"},
      {"self_connection", options_.self_connection},
  };
}

std::vector<TextNodeKey> TextNodes::keys() const {
  std::vector<TextNodeKey> out;
  out.reserve(comments.size() + descriptions.size());
  for (std::uint64_t p = 0; p < descriptions.size(); ++p) out.push_back({NodeKind::Description, p});
  for (std::uint64_t q = 0; q < comments.size(); ++q) out.push_back({NodeKind::Comment, q});
  return out;
}

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

TextNodes collect_text_nodes(const InteractionCorpus& corpus, std::span<const ReviewRecord> reviews,
                             std::span<const DescriptionRecord> descriptions, const GraphOptions& options) {
  TextNodes text;
  if (options.include_comments) {
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      const auto& r = reviews[i];
      if (blank(r.comment_text)) continue;
      auto m = corpus.users.find(r.user_key);
      auto n = corpus.items.find(r.item_key);
      if (!m || !n) {
        ++text.dropped_comments;
        spdlog::debug("comment of review {} references unknown user/item; dropped", i);
        continue;
      }
      if (!corpus.interacted(*m, *n)) {
        ++text.dropped_comments;
        continue;
      }
      if (auto slot = corpus.test_index(*m); slot && corpus.test[*slot].item == *n) continue;
      text.comments.push_back({*m, *n, i});
    }
  }
  if (options.include_descriptions) {
    std::vector<std::int64_t> first(corpus.items.size(), -1);
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
      const auto& d = descriptions[i];
      auto n = corpus.items.find(d.item_key);
      if (!n) {
        ++text.dropped_descriptions;
        continue;
      }
      if (blank(d.description_text) || first[*n] >= 0) continue;
      first[*n] = static_cast<std::int64_t>(i);
    }
    for (ItemId n = 0; n < first.size(); ++n) {
      if (first[n] >= 0) text.descriptions.push_back({n, static_cast<std::size_t>(first[n])});
    }
  }
  if (text.dropped_comments > 0 || text.dropped_descriptions > 0) {
    spdlog::info("text nodes: dropped {} comments and {} descriptions with dangling references",
                 text.dropped_comments, text.dropped_descriptions);
  }
  return text;
}

HeteroGraph build_graph(const InteractionCorpus& corpus, const TextNodes& text, const GraphOptions& options) {
  NodeIndex nodes{corpus.users.size(), corpus.items.size(), static_cast<std::uint32_t>(text.descriptions.size()),
                  static_cast<std::uint32_t>(text.comments.size())};
  std::vector<Association> assoc;
  assoc.reserve(corpus.train.size() + 2 * text.comments.size() + text.descriptions.size());
  for (const auto& x : corpus.train) assoc.push_back({AssociationKind::Interaction, x.user, x.item});
  for (std::uint32_t q = 0; q < text.comments.size(); ++q) {
    assoc.push_back({AssociationKind::Authorship, text.comments[q].user, q});
    assoc.push_back({AssociationKind::CommentItem, q, text.comments[q].item});
  }
  for (std::uint32_t p = 0; p < text.descriptions.size(); ++p) {
    assoc.push_back({AssociationKind::ItemDescription, text.descriptions[p].item, p});
  }
  return HeteroGraph::from_associations(nodes, assoc, options);
}

}  // namespace hgcf
