#include "hgcf/textembed.hpp"

#include "hgcf/binary_io.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <random>

namespace hgcf {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

StopList load_stoplist(std::istream& in) {
  StopList list;
  std::string line;
  while (std::getline(in, line)) {
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string word = line.substr(begin, end - begin + 1);
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    list.insert(std::move(word));
  }
  return list;
}

std::vector<std::string> tokenize_and_strip(std::string_view text, const StopList& stoplist) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stoplist.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

const std::vector<double>* WordVectorTable::find(const std::string& token) const {
  auto it = entries.find(token);
  return it == entries.end() ? nullptr : &it->second;
}

WordVectorTable load_glove_text(std::istream& in) {
  WordVectorTable table;
  std::string line;
  std::size_t lines = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++lines;
    auto space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      ++table.skipped_lines;
      continue;
    }
    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    bool ok = true;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || !std::isfinite(v)) {
        ok = false;
        break;
      }
      values.push_back(v);
      p = next;
    }
    if (ok && table.dimension == 0 && !values.empty()) table.dimension = values.size();
    if (!ok || values.size() != table.dimension) {
      ++table.skipped_lines;
      continue;
    }
    table.entries.insert_or_assign(line.substr(0, space), values);
  }
  if (table.dimension == 0) throw Error("word vectors: empty stream, no dimension inferable");
  if (static_cast<double>(table.skipped_lines) > 0.01 * static_cast<double>(lines)) {
    throw Error("word vectors: " + std::to_string(table.skipped_lines) + " of " + std::to_string(lines) +
                " lines skipped");
  }
  if (table.skipped_lines > 0) spdlog::warn("word vectors: skipped {} malformed lines", table.skipped_lines);
  return table;
}

std::vector<double> glove_embed(std::span<const std::string> tokens, const WordVectorTable& table) {
  std::vector<double> mean(table.dimension, 0.0);
  std::size_t found = 0;
  for (const auto& token : tokens) {
    const auto* vec = table.find(token);
    if (!vec) continue;
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += (*vec)[d];
    ++found;
  }
  if (found > 0) {
    for (auto& v : mean) v /= static_cast<double>(found);
  }
  return mean;
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Description: return "description";
    case NodeKind::Comment: return "comment";
    case NodeKind::User: return "user";
    case NodeKind::Item: return "item";
  }
  return "unknown";
}

void write_embedding_file(std::ostream& out, const TextEmbeddingSet& set) {
  io::Writer w(out);
  w.bytes(kEmbeddingMagic);
  w.u32(kEmbeddingVersion);
  w.u32(set.dimension);
  w.u64(set.vectors.size());
  for (const auto& [key, vec] : set.vectors) {
    if (vec.size() != set.dimension) throw Error("write_embedding_file: vector width does not match dimension");
    w.u8(static_cast<std::uint8_t>(key.kind));
    w.u64(key.ordinal);
    w.f64s(vec);
  }
  if (!out) throw Error("write_embedding_file: stream write failed");
}

TextEmbeddingSet read_embedding_file(std::istream& in) {
  io::Reader r(in);
  if (r.bytes(kEmbeddingMagic.size()) != kEmbeddingMagic) throw FormatError("bad embedding magic", 0);
  auto version_at = r.offset();
  if (auto version = r.u32(); version != kEmbeddingVersion) {
    throw FormatError("unsupported embedding format version " + std::to_string(version), version_at);
  }
  TextEmbeddingSet set;
  auto dim_at = r.offset();
  set.dimension = r.u32();
  if (set.dimension == 0) throw FormatError("zero embedding dimension", dim_at);
  std::uint64_t count = r.u64();

  std::map<TextNodeKey, std::size_t> multiplicity;
  std::vector<double> vec(set.dimension);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto kind_at = r.offset();
    auto kind = r.u8();
    if (kind > static_cast<std::uint8_t>(NodeKind::Item)) {
      throw FormatError("unknown node kind " + std::to_string(kind), kind_at);
    }
    TextNodeKey key{static_cast<NodeKind>(kind), r.u64()};
    auto values_at = r.offset();
    r.f64s(vec);
    for (std::size_t d = 0; d < vec.size(); ++d) {
      if (!std::isfinite(vec[d])) throw FormatError("non-finite embedding value", values_at + 8 * d);
    }
    auto [it, inserted] = set.vectors.try_emplace(key, vec);
    if (!inserted) {
      for (std::size_t d = 0; d < vec.size(); ++d) it->second[d] += vec[d];
    }
    ++multiplicity[key];
  }
  for (auto& [key, v] : set.vectors) {
    if (auto n = multiplicity[key]; n > 1) {
      for (auto& x : v) x /= static_cast<double>(n);
    }
  }
  return set;
}

TextEmbeddingSet random_text_embeddings(std::span<const TextNodeKey> keys, std::uint32_t dimension,
                                        std::uint64_t seed) {
  TextEmbeddingSet set;
  set.dimension = dimension;
  std::mt19937_64 rng(seed);
  const double half_width = 0.5 / static_cast<double>(dimension);
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  for (const auto& key : keys) {
    std::vector<double> v(dimension);
    for (auto& x : v) x = dist(rng);
    set.vectors.insert_or_assign(key, std::move(v));
  }
  return set;
}

}  // namespace hgcf
