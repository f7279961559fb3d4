#pragma once

#include "hgcf/common.hpp"

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hgcf {

using StopList = std::unordered_set<std::string>;

// Long English stopword list (lowercase, apostrophes split like the tokenizer).
const StopList& long_stopword_list();

// Reads one stopword per line; blank lines and '#' comments ignored.
StopList load_stoplist(std::istream& in);

// Lowercases ASCII letters, splits on every byte that is not an ASCII letter
// or digit (bytes >= 0x80 count as word characters so UTF-8 words stay whole),
// and drops tokens found in `stoplist`. Order is preserved.
std::vector<std::string> tokenize_and_strip(std::string_view text, const StopList& stoplist);

struct WordVectorTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> entries;
  std::size_t skipped_lines = 0;

  const std::vector<double>* find(const std::string& token) const;
};

// GloVe text format: "token v1 ... vd" per line. The first line fixes the
// dimension; later lines with another width are skipped. Throws Error on an
// empty stream or when more than 1% of lines are skipped.
WordVectorTable load_glove_text(std::istream& in);

// Mean of the in-vocabulary token vectors; OOV tokens are left out of both
// the sum and the count. Zero vector when nothing is in vocabulary.
std::vector<double> glove_embed(std::span<const std::string> tokens, const WordVectorTable& table);

// Node kinds as encoded in the interchange format. User and Item appear only
// in full embedding dumps.
enum class NodeKind : std::uint8_t { Description = 0, Comment = 1, User = 2, Item = 3 };

const char* to_string(NodeKind kind);

struct TextNodeKey {
  NodeKind kind;
  std::uint64_t ordinal;

  auto operator<=>(const TextNodeKey&) const = default;
};

struct TextEmbeddingSet {
  std::uint32_t dimension = 0;
  std::map<TextNodeKey, std::vector<double>> vectors;

  bool operator==(const TextEmbeddingSet&) const = default;
};

// Interchange layout (little-endian):
//   "LTHE" | u32 version=1 | u32 dimension | u64 count |
//   count x { u8 kind | u64 ordinal | dimension x f64 }
inline constexpr std::string_view kEmbeddingMagic = "LTHE";
inline constexpr std::uint32_t kEmbeddingVersion = 1;

void write_embedding_file(std::ostream& out, const TextEmbeddingSet& set);

// Throws FormatError on bad magic/version, unknown node kind, truncation or a
// non-finite value. Records sharing a key (per-sentence vectors of one
// document) are averaged into a single document vector.
TextEmbeddingSet read_embedding_file(std::istream& in);

// Uniform on [-0.5/dim, 0.5/dim] per coordinate; used when text nodes are not
// pre-trained.
TextEmbeddingSet random_text_embeddings(std::span<const TextNodeKey> keys, std::uint32_t dimension,
                                        std::uint64_t seed);

}  // namespace hgcf
