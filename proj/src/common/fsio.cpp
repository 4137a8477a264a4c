#include "communitypoll/common/fsio.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "communitypoll/common/errors.hpp"

namespace communitypoll {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write file: " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw Error("short write: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace communitypoll
