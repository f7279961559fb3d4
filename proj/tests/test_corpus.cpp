#include "fixtures.hpp"

#include "hgcf/corpus.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace hgcf {
namespace {

using testing::review;

std::vector<ReviewRecord> random_reviews(std::uint32_t users, std::uint32_t items, std::uint32_t per_user,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> item(0, items - 1);
  std::uniform_int_distribution<std::int64_t> time(0, 50);
  std::vector<ReviewRecord> out;
  for (std::uint32_t u = 0; u < users; ++u) {
    for (std::uint32_t k = 0; k < per_user; ++k) {
      out.push_back(review("U" + std::to_string(u), "I" + std::to_string(item(rng)), time(rng), "text"));
    }
  }
  return out;
}

TEST(ParseReviews, MapsFields) {
  std::istringstream in(R"({"reviewerID":"A1","asin":"B1","overall":5.0,"reviewText":"great","unixReviewTime":100})");
  auto report = parse_reviews(in);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0], (ReviewRecord{"A1", "B1", 5.0, "great", 100}));
  EXPECT_TRUE(report.errors.empty());
}

TEST(ParseReviews, MissingTextIsEmpty) {
  std::istringstream in(R"({"reviewerID":"A1","asin":"B1","overall":4.0,"unixReviewTime":7})");
  auto report = parse_reviews(in);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0].comment_text, "");
}

TEST(ParseReviews, ToleratesFewBadLines) {
  std::ostringstream text;
  for (int i = 0; i < 200; ++i) {
    text << R"({"reviewerID":"A)" << i << R"(","asin":"B1","unixReviewTime":1})" << '\n';
  }
  text << "not json\n\n";
  std::istringstream in(text.str());
  auto report = parse_reviews(in);
  EXPECT_EQ(report.records.size(), 200u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 201u);
}

TEST(ParseReviews, FailsOnManyBadLines) {
  std::istringstream in("{\"reviewerID\":\"A\",\"asin\":\"B\",\"unixReviewTime\":1}\n{\"asin\":\"B\"}\n");
  EXPECT_THROW(parse_reviews(in), Error);
}

TEST(ParseDescriptions, JoinsArrays) {
  std::istringstream in(R"({"asin":"B1","description":["one","two"]})"
                        "\n"
                        R"({"asin":"B2","description":"plain"})");
  auto report = parse_descriptions(in);
  ASSERT_EQ(report.records.size(), 2u);
  EXPECT_EQ(report.records[0].description_text, "one two");
  EXPECT_EQ(report.records[1].description_text, "plain");
}

// A corpus with enough items that every user has 99 negatives available.
std::vector<ReviewRecord> with_catalog(std::vector<ReviewRecord> reviews) {
  for (int i = 0; i < 120; ++i) reviews.push_back(review("filler", "C" + std::to_string(i), 0));
  return reviews;
}

TEST(BuildCorpus, LatestInteractionIsTest) {
  auto reviews = with_catalog({review("u", "a", 1), review("u", "c", 3), review("u", "b", 2)});
  auto corpus = build_corpus(reviews, 1);
  auto u = *corpus.users.find("u");
  auto slot = corpus.test_index(u);
  ASSERT_TRUE(slot.has_value());
  EXPECT_EQ(corpus.items.key(corpus.test[*slot].item), "c");
}

TEST(BuildCorpus, TimestampTieGoesToLaterLine) {
  auto reviews = with_catalog({review("u", "a", 5), review("u", "b", 5)});
  auto corpus = build_corpus(reviews, 1);
  auto slot = corpus.test_index(*corpus.users.find("u"));
  ASSERT_TRUE(slot.has_value());
  EXPECT_EQ(corpus.items.key(corpus.test[*slot].item), "b");
}

TEST(BuildCorpus, SingleInteractionUserStaysInTrain) {
  auto reviews = with_catalog({review("solo", "a", 1)});
  auto corpus = build_corpus(reviews, 1);
  auto solo = *corpus.users.find("solo");
  EXPECT_FALSE(corpus.test_index(solo).has_value());
  EXPECT_EQ(std::count_if(corpus.train.begin(), corpus.train.end(), [&](auto& x) { return x.user == solo; }), 1);
}

TEST(BuildCorpus, RepeatedPairCollapses) {
  auto reviews = with_catalog({review("u", "a", 1), review("u", "a", 4), review("u", "b", 2)});
  auto corpus = build_corpus(reviews, 1);
  auto u = *corpus.users.find("u");
  EXPECT_EQ(corpus.user_items[u].size(), 2u);
  auto slot = corpus.test_index(u);
  ASSERT_TRUE(slot.has_value());
  EXPECT_EQ(corpus.items.key(corpus.test[*slot].item), "a");
}

TEST(BuildCorpus, SmallCatalogUserIsExcluded) {
  std::vector<ReviewRecord> reviews{review("u", "a", 1), review("u", "b", 2), review("v", "c", 1)};
  auto corpus = build_corpus(reviews, 1);
  EXPECT_TRUE(corpus.test.empty());
  EXPECT_EQ(corpus.excluded_users.size(), 1u);
  EXPECT_EQ(corpus.train.size(), 3u);
}

TEST(BuildCorpus, EmptyInputThrows) { EXPECT_THROW(build_corpus({}, 1), Error); }

TEST(BuildCorpus, CandidateInvariants) {
  auto reviews = random_reviews(100, 300, 12, 3);
  auto corpus = build_corpus(reviews, 42);
  ASSERT_FALSE(corpus.test.empty());
  ASSERT_EQ(corpus.candidates.size(), corpus.test.size());
  for (std::size_t t = 0; t < corpus.test.size(); ++t) {
    const auto& cands = corpus.candidates[t];
    ASSERT_EQ(cands.size(), kEvalCandidates);
    EXPECT_EQ(cands.back(), corpus.test[t].item);
    std::set<ItemId> unique(cands.begin(), cands.end());
    EXPECT_EQ(unique.size(), kEvalCandidates);
    std::vector<ItemId> hits;
    for (auto item : cands) {
      if (corpus.interacted(corpus.test[t].user, item)) hits.push_back(item);
    }
    EXPECT_EQ(hits, std::vector<ItemId>{corpus.test[t].item});
  }
}

TEST(BuildCorpus, TrainPlusTestCoversUniquePairs) {
  auto reviews = random_reviews(60, 200, 15, 9);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& r : reviews) pairs.emplace(r.user_key, r.item_key);
  auto corpus = build_corpus(reviews, 5);
  EXPECT_EQ(corpus.train.size() + corpus.test.size(), pairs.size());
}

TEST(BuildCorpus, SameSeedSameSplit) {
  auto reviews = random_reviews(100, 250, 10, 11);
  auto a = split_manifest(build_corpus(reviews, 77)).dump();
  auto b = split_manifest(build_corpus(reviews, 77)).dump();
  EXPECT_EQ(std::hash<std::string>{}(a), std::hash<std::string>{}(b));
  EXPECT_EQ(a, b);
  auto c = split_manifest(build_corpus(reviews, 78)).dump();
  EXPECT_NE(a, c);
}

TEST(StripTestComments, BlanksExactlyTestPairs) {
  auto reviews = random_reviews(50, 200, 8, 21);
  auto corpus = build_corpus(reviews, 3);
  auto stripped = strip_test_comments(reviews, corpus);
  ASSERT_EQ(stripped.size(), reviews.size());

  std::set<std::pair<std::string, std::string>> test_pairs;
  for (const auto& t : corpus.test) test_pairs.emplace(corpus.users.key(t.user), corpus.items.key(t.item));
  std::size_t expected = 0;
  std::size_t emptied = 0;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    bool is_test = test_pairs.count({reviews[i].user_key, reviews[i].item_key}) > 0;
    expected += is_test;
    if (is_test) {
      EXPECT_EQ(stripped[i].comment_text, "");
      ++emptied;
    } else {
      EXPECT_EQ(stripped[i], reviews[i]);
    }
  }
  EXPECT_EQ(emptied, expected);
  EXPECT_GE(emptied, corpus.test.size());
}

TEST(KeyIndex, IsABijection) {
  KeyIndex index;
  EXPECT_EQ(index.insert("x"), 0u);
  EXPECT_EQ(index.insert("y"), 1u);
  EXPECT_EQ(index.insert("x"), 0u);
  EXPECT_EQ(index.size(), 2u);
  EXPECT_EQ(index.key(1), "y");
  EXPECT_FALSE(index.find("z").has_value());
}

}  // namespace
}  // namespace hgcf
