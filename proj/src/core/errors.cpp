#include "simuda/core/errors.hpp"

namespace simuda {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::dependency:
      return 4;
    default:
      return 1;
  }
}

}  // namespace simuda
