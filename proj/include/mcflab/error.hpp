#pragma once

#include <stdexcept>
#include <string>

namespace mcflab {

enum class ErrorCode {
  invalid_argument = 1,
  precondition = 2,
  numerical = 3,
  io = 4,
  parse = 5,
  unsupported = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mcflab
