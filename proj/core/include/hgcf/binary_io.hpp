#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace hgcf::io {

// Little-endian writer/reader pair used by the embedding interchange and
// checkpoint formats. The reader tracks its offset for error reports.

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(std::string_view raw);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string bytes(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);

  bool at_end();
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  void read_raw(char* dst, std::size_t n);

  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace hgcf::io
