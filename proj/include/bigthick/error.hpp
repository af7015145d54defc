#pragma once

#include <stdexcept>
#include <string>

namespace bigthick {

/// Input violates a contract (bad config, malformed record, unknown name).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bigthick
