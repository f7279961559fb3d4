#include "hgcf/binary_io.hpp"

#include "hgcf/common.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <vector>

namespace hgcf::io {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian targets are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  } else {
    return v;
  }
}

}  // namespace

void Writer::bytes(std::string_view raw) { out_.write(raw.data(), static_cast<std::streamsize>(raw.size())); }

void Writer::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void Writer::u32(std::uint32_t v) {
  v = to_little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void Writer::u64(std::uint64_t v) {
  v = to_little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::f64s(std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (double v : values) f64(v);
  }
}

void Reader::read_raw(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) throw FormatError("truncated payload", offset_ + got);
  offset_ += n;
}

std::string Reader::bytes(std::size_t n) {
  std::string s(n, '\0');
  read_raw(s.data(), n);
  return s;
}

std::uint8_t Reader::u8() {
  char c;
  read_raw(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t Reader::u32() {
  std::uint32_t v;
  read_raw(reinterpret_cast<char*>(&v), sizeof v);
  return to_little(v);
}

std::uint64_t Reader::u64() {
  std::uint64_t v;
  read_raw(reinterpret_cast<char*>(&v), sizeof v);
  return to_little(v);
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

void Reader::f64s(std::span<double> out) {
  if constexpr (std::endian::native == std::endian::little) {
    read_raw(reinterpret_cast<char*>(out.data()), out.size_bytes());
  } else {
    for (double& v : out) v = f64();
  }
}

bool Reader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

}  // namespace hgcf::io
