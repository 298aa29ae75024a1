#pragma once

#include <stdexcept>
#include <string>

namespace rcgff {

enum class ErrorKind {
  parameter,
  domain,
  membership,
  geometry,
  size,
  scale,
  unsupported,
  singularity,
  solver,
  numerical,
  accuracy,
  degenerate_environment,
  dynamics,
  io,
};

const char* to_string(ErrorKind kind);

/// Base exception for everything the library throws on a violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error kind (0 is reserved for success).
///   2 parameter-type errors, 3 numerical/solver, 4 degenerate environment.
int exit_code(ErrorKind kind);

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rcgff
