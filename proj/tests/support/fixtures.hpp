#pragma once

#include "hgcf/corpus.hpp"

#include <filesystem>
#include <string>

namespace hgcf::testing {

// Fresh directory under the system temp dir; removed when the object dies.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

ReviewRecord review(const std::string& user, const std::string& item, std::int64_t timestamp,
                    const std::string& text = "");

}  // namespace hgcf::testing
