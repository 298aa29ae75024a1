#include "rcgff/errors.hpp"

namespace rcgff {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::membership: return "membership error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::size: return "size error";
    case ErrorKind::scale: return "scale error";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::singularity: return "singularity error";
    case ErrorKind::solver: return "solver error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::accuracy: return "accuracy error";
    case ErrorKind::degenerate_environment: return "degenerate environment";
    case ErrorKind::dynamics: return "dynamics error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::solver:
    case ErrorKind::numerical:
    case ErrorKind::accuracy:
      return 3;
    case ErrorKind::degenerate_environment:
    case ErrorKind::dynamics:
      return 4;
    case ErrorKind::io:
      return 1;
    default:
      return 2;
  }
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace rcgff
