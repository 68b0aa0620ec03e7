#ifndef TCVAR_IO_HPP
#define TCVAR_IO_HPP

#include "tcvar/common.hpp"

#include <filesystem>
#include <string>

namespace tcvar {

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

/// Exclusive lock on an output path, held for the lifetime of the object.
class OutputLock {
public:
  explicit OutputLock(const std::filesystem::path& target);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

private:
  std::filesystem::path lock_path_;
};

} // namespace tcvar

#endif
