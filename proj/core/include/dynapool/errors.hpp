#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace dynapool {

/// Bad or unreadable input data. Carries the offending path when there is one.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& message, std::filesystem::path path = {})
      : std::runtime_error(path.empty() ? message : message + ": " + path.string()),
        path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Input exists but is not in the expected encoding (wrong bit depth, not a PNG, ...).
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace dynapool
