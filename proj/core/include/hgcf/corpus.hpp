#pragma once

#include "hgcf/common.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hgcf {

// One line of an Amazon-style review dump. The rating is kept only for
// provenance: any review counts as an interaction.
struct ReviewRecord {
  std::string user_key;
  std::string item_key;
  double rating = 0.0;
  std::string comment_text;
  std::int64_t timestamp = 0;

  bool operator==(const ReviewRecord&) const = default;
};

struct DescriptionRecord {
  std::string item_key;
  std::string description_text;
};

struct LineError {
  std::size_t line;  // 1-based
  std::string message;
};

template <typename Record>
struct ParseReport {
  std::vector<Record> records;
  std::vector<LineError> errors;
  std::size_t lines = 0;  // non-blank lines seen
};

// Fraction of malformed lines above which a parse fails outright.
inline constexpr double kMaxMalformedFraction = 0.01;

// Parses JSON-lines reviews (reviewerID, asin, overall, reviewText,
// unixReviewTime). Bad lines are collected in the report; throws Error when
// more than 1% of the lines are bad.
ParseReport<ReviewRecord> parse_reviews(std::istream& in);

// Parses JSON-lines item metadata (asin, description). A description given as
// an array of strings is joined with single spaces.
ParseReport<DescriptionRecord> parse_descriptions(std::istream& in);

// Dense bijection between opaque string keys and [0, size()).
class KeyIndex {
 public:
  std::uint32_t insert(const std::string& key);
  std::optional<std::uint32_t> find(const std::string& key) const;
  const std::string& key(std::uint32_t id) const { return keys_.at(id); }
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(keys_.size()); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> keys_;
};

struct Interaction {
  UserId user;
  ItemId item;
  std::int64_t timestamp;

  bool operator==(const Interaction&) const = default;
};

inline constexpr std::size_t kEvalNegatives = 99;
inline constexpr std::size_t kEvalCandidates = kEvalNegatives + 1;

// Leave-one-out split over the implicit-feedback matrix. Interactions are
// unique (user, item) pairs; repeated reviews of a pair collapse into one.
struct InteractionCorpus {
  KeyIndex users;
  KeyIndex items;
  std::vector<Interaction> train;  // sorted by (user, timestamp, input order)
  std::vector<Interaction> test;   // one per evaluated user, sorted by user
  // Per test user: 99 sampled negatives followed by the held-out item.
  std::vector<std::vector<ItemId>> candidates;  // parallel to `test`
  // Users with >= 2 interactions but fewer than 99 non-interacted items.
  // They keep all interactions in train and are not evaluated.
  std::vector<UserId> excluded_users;
  // Full interaction set per user (train and test), sorted.
  std::vector<std::vector<ItemId>> user_items;
  // Position in `test` per user, -1 when the user is not evaluated.
  std::vector<std::int64_t> test_slot;

  bool interacted(UserId user, ItemId item) const;
  // Index into `test` for a user, if the user is evaluated.
  std::optional<std::size_t> test_index(UserId user) const;
};

// Builds the split deterministically from the seed. Throws Error on an empty
// review list.
InteractionCorpus build_corpus(std::span<const ReviewRecord> reviews, std::uint64_t seed);

// Copies `reviews`, blanking the comment text of every record whose
// (user, item) pair is a test pair of `corpus`.
std::vector<ReviewRecord> strip_test_comments(std::span<const ReviewRecord> reviews,
                                              const InteractionCorpus& corpus);

// {train: [[m,n,t]...], test: [[m,n,t]...], candidates: {"m": [n...]}}
nlohmann::json split_manifest(const InteractionCorpus& corpus);

}  // namespace hgcf
