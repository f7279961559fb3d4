#pragma once

#include "hgcf/corpus.hpp"
#include "hgcf/textembed.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hgcf {

// Planted-preference fixture: users and items split into latent blocks,
// users mostly interact with popular items of their own block, and every
// description/comment is written from its item's block vocabulary, whose
// word vectors cluster around a block centroid.
struct PlantedOptions {
  std::uint32_t users = 200;
  std::uint32_t items = 200;
  std::uint32_t blocks = 2;
  std::uint32_t interactions_per_user = 10;
  double in_block_rate = 0.95;
  double popularity_exponent = 1.5;  // Zipf exponent of item choice inside a block
  std::uint32_t dimension = 256;
  std::uint32_t words_per_block = 40;
  std::uint32_t shared_words = 40;  // block-neutral filler vocabulary
  double word_noise = 0.5;          // relative to the centroid scale
  std::uint32_t words_per_comment = 8;
  std::uint32_t words_per_description = 12;
  std::uint64_t seed = 7;
};

struct PlantedDataset {
  std::vector<ReviewRecord> reviews;
  std::vector<DescriptionRecord> descriptions;
  WordVectorTable words;
  std::vector<std::uint32_t> user_block;  // by generation index
  std::vector<std::uint32_t> item_block;
};

PlantedDataset make_planted_dataset(const PlantedOptions& options);

// Writes reviews.jsonl, meta.jsonl and glove.txt into `dir`.
void write_planted_dataset(const PlantedDataset& data, const std::filesystem::path& dir);

}  // namespace hgcf
