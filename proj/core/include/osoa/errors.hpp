#pragma once

#include <stdexcept>
#include <string>

namespace osoa {

/// Malformed input: bad magic/version, out-of-range field, truncated or
/// misaligned payload, invalid configuration. CLI exit code 2.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Integrity failure: checksum mismatch on a payload, checkpoint or
/// parameter trajectory (corruption or cross-platform nondeterminism).
/// CLI exit code 3.
class ChecksumError : public std::runtime_error {
 public:
  explicit ChecksumError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure. CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace osoa
