#pragma once

#include <stdexcept>
#include <string>

namespace pot {

// Failure categories surfaced by the library. The CLI maps kinds to exit codes
// (usage/config problems -> 2, guard refusals -> 3, everything else -> 1).
enum class ErrorKind {
  kMalformedInput,    // unparseable file content
  kDimension,         // shape mismatch between operands or files
  kValidation,        // argument outside its documented domain
  kInfeasibleBudget,  // drop budget would disconnect a node's self-degree
  kDegenerate,        // zero-norm embedding row where a direction is required
  kContract,          // internal invariant violated (non-finite loss, reused tape)
  kGuard,             // refusal: input exceeds a hard safety limit
  kConfig,            // config file / CLI usage problem
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pot
