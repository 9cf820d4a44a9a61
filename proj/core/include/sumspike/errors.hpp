#ifndef SUMSPIKE_ERRORS_HPP
#define SUMSPIKE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sumspike {

// Malformed or corrupted file content (bad magic, truncation, checksum,
// unparsable text). CLI exit code 2.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally sound input that violates a model or hardware constraint.
// CLI exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sumspike

#endif  // SUMSPIKE_ERRORS_HPP
