#include "tcvar/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tcvar {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("short write to " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

OutputLock::OutputLock(const std::filesystem::path& target) : lock_path_(target) {
  lock_path_ += ".lock";
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (f == nullptr) {
    throw Error("output " + target.string() + " is locked by another process (" + lock_path_.string() + ")");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  std::filesystem::remove(lock_path_, ec);
}

} // namespace tcvar
