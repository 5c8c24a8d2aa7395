#pragma once

#include <stdexcept>
#include <string>

namespace densideal {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, failed precondition or catalog lookup.
class validation_error : public error {
 public:
  using error::error;
};

// A search ran past its configured bound without finding what it needed.
class scan_bound_error : public error {
 public:
  using error::error;
};

// Input is well formed but too small for the requested operation.
class degenerate_input_error : public error {
 public:
  using error::error;
};

// The weight synthesis could not satisfy its boundary conditions.
class synthesis_error : public error {
 public:
  synthesis_error(const std::string& what, std::size_t block)
      : error(what + " (block " + std::to_string(block) + ")"), block_(block) {}
  std::size_t block() const noexcept { return block_; }

 private:
  std::size_t block_;
};

// A certified finite inequality did not hold on the constructed witness.
class certification_error : public error {
 public:
  using error::error;
};

}  // namespace densideal
