#include "hgcf/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>

namespace hgcf {
namespace {

std::string user_key(std::uint32_t u) { return "U" + std::to_string(u); }
std::string item_key(std::uint32_t i) { return "B" + std::to_string(i); }
std::string block_word(std::uint32_t b, std::uint32_t w) {
  return "blk" + std::string(1, static_cast<char>('a' + b % 26)) + "w" + std::to_string(w);
}
std::string shared_word(std::uint32_t w) { return "filler" + std::to_string(w); }

std::string sentence(std::mt19937_64& rng, std::uint32_t block, const PlantedOptions& o, std::uint32_t length) {
  std::uniform_int_distribution<std::uint32_t> block_pick(0, o.words_per_block - 1);
  std::uniform_int_distribution<std::uint32_t> shared_pick(0, o.shared_words - 1);
  std::bernoulli_distribution use_block(0.6);
  std::string text = "The";
  for (std::uint32_t i = 0; i < length; ++i) {
    text += ' ';
    text += (o.shared_words == 0 || use_block(rng)) ? block_word(block, block_pick(rng)) : shared_word(shared_pick(rng));
  }
  return text + ", and it was great.";
}

}  // namespace

PlantedDataset make_planted_dataset(const PlantedOptions& o) {
  if (o.blocks == 0 || o.users == 0 || o.items < o.blocks) throw Error("planted fixture: bad sizes");
  if (o.words_per_block == 0) throw Error("planted fixture: empty block vocabulary");
  std::mt19937_64 rng(o.seed);
  PlantedDataset data;

  // Word vectors: block centroids plus per-word noise; filler words random.
  std::normal_distribution<double> gauss(0.0, 0.3);
  data.words.dimension = o.dimension;
  std::vector<std::vector<double>> centroids(o.blocks, std::vector<double>(o.dimension));
  for (auto& c : centroids) {
    for (auto& x : c) x = gauss(rng);
  }
  for (std::uint32_t b = 0; b < o.blocks; ++b) {
    for (std::uint32_t w = 0; w < o.words_per_block; ++w) {
      std::vector<double> v(o.dimension);
      for (std::uint32_t d = 0; d < o.dimension; ++d) v[d] = centroids[b][d] + o.word_noise * gauss(rng);
      data.words.entries.emplace(block_word(b, w), std::move(v));
    }
  }
  for (std::uint32_t w = 0; w < o.shared_words; ++w) {
    std::vector<double> v(o.dimension);
    for (auto& x : v) x = gauss(rng);
    data.words.entries.emplace(shared_word(w), std::move(v));
  }

  data.user_block.resize(o.users);
  data.item_block.resize(o.items);
  for (std::uint32_t u = 0; u < o.users; ++u) data.user_block[u] = u % o.blocks;
  std::vector<std::vector<std::uint32_t>> block_items(o.blocks);
  for (std::uint32_t i = 0; i < o.items; ++i) {
    data.item_block[i] = i % o.blocks;
    block_items[i % o.blocks].push_back(i);
  }
  // Zipf popularity inside each block, over a shuffled item order.
  std::vector<std::discrete_distribution<std::size_t>> popularity;
  for (auto& items : block_items) {
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<double> weights(items.size());
    for (std::size_t r = 0; r < items.size(); ++r) weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), o.popularity_exponent);
    popularity.emplace_back(weights.begin(), weights.end());
  }

  for (std::uint32_t i = 0; i < o.items; ++i) {
    data.descriptions.push_back({item_key(i), sentence(rng, data.item_block[i], o, o.words_per_description)});
  }

  std::bernoulli_distribution in_block(o.in_block_rate);
  std::uniform_int_distribution<std::uint32_t> other_block(0, o.blocks > 1 ? o.blocks - 2 : 0);
  std::uniform_int_distribution<std::int64_t> gap(1, 86400);
  const std::uint32_t per_user = std::min(o.interactions_per_user, o.items);
  for (std::uint32_t u = 0; u < o.users; ++u) {
    std::set<std::uint32_t> chosen;
    std::int64_t t = 1'000'000'000 + static_cast<std::int64_t>(u) * 1000;
    std::size_t attempts = 0;
    while (chosen.size() < per_user && attempts++ < 100 * per_user) {
      std::uint32_t b = data.user_block[u];
      if (o.blocks > 1 && !in_block(rng)) {
        std::uint32_t other = other_block(rng);
        b = other >= b ? other + 1 : other;
      }
      std::uint32_t item = block_items[b][popularity[b](rng)];
      if (!chosen.insert(item).second) continue;
      t += gap(rng);
      data.reviews.push_back({user_key(u), item_key(item), 5.0,
                              sentence(rng, data.item_block[item], o, o.words_per_comment), t});
    }
  }
  // Interleave users in the file the way real dumps are ordered (by item).
  std::stable_sort(data.reviews.begin(), data.reviews.end(),
                   [](const ReviewRecord& a, const ReviewRecord& b) { return a.item_key < b.item_key; });
  return data;
}

void write_planted_dataset(const PlantedDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "reviews.jsonl");
    for (const auto& r : data.reviews) {
      out << nlohmann::json{{"reviewerID", r.user_key},
                            {"asin", r.item_key},
                            {"overall", r.rating},
                            {"reviewText", r.comment_text},
                            {"unixReviewTime", r.timestamp}}
                 .dump()
          << '\n';
    }
  }
  {
    std::ofstream out(dir / "meta.jsonl");
    for (const auto& d : data.descriptions) {
      out << nlohmann::json{{"asin", d.item_key}, {"description", d.description_text}}.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "glove.txt");
    out << std::setprecision(17);
    std::vector<std::string> tokens;
    for (const auto& [token, vec] : data.words.entries) tokens.push_back(token);
    std::sort(tokens.begin(), tokens.end());
    for (const auto& token : tokens) {
      out << token;
      for (double x : data.words.entries.at(token)) out << ' ' << x;
      out << '\n';
    }
  }
}

}  // namespace hgcf
