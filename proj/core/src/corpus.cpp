#include "hgcf/corpus.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace hgcf {
namespace {

using nlohmann::json;

template <typename Record, typename LineParser>
ParseReport<Record> parse_lines(std::istream& in, const char* what, LineParser&& parse_line) {
  ParseReport<Record> report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.lines;
    try {
      report.records.push_back(parse_line(json::parse(line)));
    } catch (const std::exception& e) {
      report.errors.push_back({line_no, e.what()});
    }
  }
  if (!report.errors.empty()) {
    spdlog::warn("{}: {} of {} lines malformed (first at line {}: {})", what, report.errors.size(),
                 report.lines, report.errors.front().line, report.errors.front().message);
  }
  if (static_cast<double>(report.errors.size()) >
      kMaxMalformedFraction * static_cast<double>(report.lines)) {
    throw Error(std::string(what) + ": " + std::to_string(report.errors.size()) + " of " +
                std::to_string(report.lines) + " lines malformed, first at line " +
                std::to_string(report.errors.front().line) + ": " + report.errors.front().message);
  }
  return report;
}

std::string required_key(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) throw Error(std::string("missing string field ") + field);
  auto value = it->get<std::string>();
  if (value.empty()) throw Error(std::string("empty field ") + field);
  return value;
}

std::string optional_text(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string joined;
    for (const auto& part : *it) {
      if (!part.is_string()) throw Error(std::string("non-string element in ") + field);
      if (!joined.empty()) joined += ' ';
      joined += part.get<std::string>();
    }
    return joined;
  }
  throw Error(std::string("field ") + field + " is not text");
}

ReviewRecord review_from_json(const json& obj) {
  if (!obj.is_object()) throw Error("line is not a JSON object");
  ReviewRecord r;
  r.user_key = required_key(obj, "reviewerID");
  r.item_key = required_key(obj, "asin");
  if (auto it = obj.find("overall"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) throw Error("field overall is not a number");
    r.rating = it->get<double>();
  }
  r.comment_text = optional_text(obj, "reviewText");
  auto ts = obj.find("unixReviewTime");
  if (ts == obj.end() || !ts->is_number_integer()) throw Error("missing integer field unixReviewTime");
  r.timestamp = ts->get<std::int64_t>();
  if (r.timestamp < 0) throw Error("negative unixReviewTime");
  return r;
}

DescriptionRecord description_from_json(const json& obj) {
  if (!obj.is_object()) throw Error("line is not a JSON object");
  return {required_key(obj, "asin"), optional_text(obj, "description")};
}

}  // namespace

ParseReport<ReviewRecord> parse_reviews(std::istream& in) {
  return parse_lines<ReviewRecord>(in, "reviews", review_from_json);
}

ParseReport<DescriptionRecord> parse_descriptions(std::istream& in) {
  return parse_lines<DescriptionRecord>(in, "metadata", description_from_json);
}

std::uint32_t KeyIndex::insert(const std::string& key) {
  auto [it, inserted] = ids_.try_emplace(key, static_cast<std::uint32_t>(keys_.size()));
  if (inserted) keys_.push_back(key);
  return it->second;
}

std::optional<std::uint32_t> KeyIndex::find(const std::string& key) const {
  auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool InteractionCorpus::interacted(UserId user, ItemId item) const {
  const auto& items_of = user_items.at(user);
  return std::binary_search(items_of.begin(), items_of.end(), item);
}

std::optional<std::size_t> InteractionCorpus::test_index(UserId user) const {
  if (user >= test_slot.size() || test_slot[user] < 0) return std::nullopt;
  return static_cast<std::size_t>(test_slot[user]);
}

InteractionCorpus build_corpus(std::span<const ReviewRecord> reviews, std::uint64_t seed) {
  if (reviews.empty()) throw Error("build_corpus: no reviews");

  InteractionCorpus corpus;
  // Latest (timestamp, input position) per unique pair.
  struct PairInfo {
    std::int64_t timestamp;
    std::size_t order;
  };
  std::map<std::pair<UserId, ItemId>, PairInfo> pairs;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const auto& r = reviews[i];
    if (r.user_key.empty() || r.item_key.empty()) throw Error("build_corpus: empty user or item key");
    UserId m = corpus.users.insert(r.user_key);
    ItemId n = corpus.items.insert(r.item_key);
    auto [it, inserted] = pairs.try_emplace({m, n}, PairInfo{r.timestamp, i});
    if (!inserted && std::tie(r.timestamp, i) > std::tie(it->second.timestamp, it->second.order)) {
      it->second = {r.timestamp, i};
    }
  }

  const std::uint32_t num_users = corpus.users.size();
  const std::uint32_t num_items = corpus.items.size();

  struct Entry {
    ItemId item;
    std::int64_t timestamp;
    std::size_t order;
  };
  std::vector<std::vector<Entry>> per_user(num_users);
  for (const auto& [key, info] : pairs) per_user[key.first].push_back({key.second, info.timestamp, info.order});

  corpus.user_items.resize(num_users);
  corpus.test_slot.assign(num_users, -1);
  std::mt19937_64 rng(seed);
  std::vector<ItemId> pool;

  for (UserId m = 0; m < num_users; ++m) {
    auto& entries = per_user[m];
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.timestamp, a.order) < std::tie(b.timestamp, b.order);
    });
    auto& items_of = corpus.user_items[m];
    for (const auto& e : entries) items_of.push_back(e.item);
    std::sort(items_of.begin(), items_of.end());

    bool evaluate = entries.size() >= 2;
    if (evaluate && num_items - items_of.size() < kEvalNegatives) {
      spdlog::warn("user {} has only {} non-interacted items; excluded from evaluation",
                   corpus.users.key(m), num_items - items_of.size());
      corpus.excluded_users.push_back(m);
      evaluate = false;
    }

    std::size_t train_count = evaluate ? entries.size() - 1 : entries.size();
    for (std::size_t i = 0; i < train_count; ++i) {
      corpus.train.push_back({m, entries[i].item, entries[i].timestamp});
    }
    if (!evaluate) continue;

    const auto& held_out = entries.back();
    corpus.test_slot[m] = static_cast<std::int64_t>(corpus.test.size());
    corpus.test.push_back({m, held_out.item, held_out.timestamp});

    pool.clear();
    for (ItemId n = 0, j = 0; n < num_items; ++n) {
      if (j < items_of.size() && items_of[j] == n) {
        ++j;
        continue;
      }
      pool.push_back(n);
    }
    // Partial Fisher-Yates: the first 99 slots become a uniform sample
    // without replacement.
    std::vector<ItemId> candidates;
    candidates.reserve(kEvalCandidates);
    for (std::size_t i = 0; i < kEvalNegatives; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      candidates.push_back(pool[i]);
    }
    candidates.push_back(held_out.item);
    corpus.candidates.push_back(std::move(candidates));
  }
  return corpus;
}

std::vector<ReviewRecord> strip_test_comments(std::span<const ReviewRecord> reviews,
                                              const InteractionCorpus& corpus) {
  std::vector<ReviewRecord> out(reviews.begin(), reviews.end());
  for (auto& r : out) {
    auto m = corpus.users.find(r.user_key);
    auto n = corpus.items.find(r.item_key);
    if (!m || !n) continue;
    auto slot = corpus.test_index(*m);
    if (slot && corpus.test[*slot].item == *n) r.comment_text.clear();
  }
  return out;
}

nlohmann::json split_manifest(const InteractionCorpus& corpus) {
  json train = json::array();
  for (const auto& x : corpus.train) train.push_back({x.user, x.item, x.timestamp});
  json test = json::array();
  json candidates = json::object();
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const auto& x = corpus.test[i];
    test.push_back({x.user, x.item, x.timestamp});
    candidates[std::to_string(x.user)] = corpus.candidates[i];
  }
  return json{{"train", std::move(train)}, {"test", std::move(test)}, {"candidates", std::move(candidates)}};
}

}  // namespace hgcf
