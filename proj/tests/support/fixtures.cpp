#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace hgcf::testing {

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = std::filesystem::temp_directory_path() / ("hgcf-" + tag + "-" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw Error("cannot create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ReviewRecord review(const std::string& user, const std::string& item, std::int64_t timestamp,
                    const std::string& text) {
  return {user, item, 5.0, text, timestamp};
}

}  // namespace hgcf::testing
