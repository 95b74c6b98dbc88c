#pragma once

#include <stdexcept>
#include <string>

namespace simuda {

/// Broad failure categories. The CLI maps each to a process exit code.
enum class ErrorKind {
  config,      // invalid configuration, bad arguments, violated invariants
  data,        // unreadable or malformed input data
  dependency,  // unresolvable external resource (hub checkpoints)
  integrity,   // checkpoint contents disagree with the requested spec
  shape,       // tensor shape mismatch
  contract,    // precondition on numeric inputs violated
  numeric,     // NaN/Inf encountered during a computation
  state,       // operation called in an invalid state
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};
// Raised while scanning a dataset root or list file.
struct IngestionError : DataError {
  explicit IngestionError(const std::string& what) : DataError(what) {}
};
struct DependencyError : Error {
  explicit DependencyError(const std::string& what) : Error(ErrorKind::dependency, what) {}
};
struct IntegrityError : Error {
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};
struct StateError : Error {
  explicit StateError(const std::string& what) : Error(ErrorKind::state, what) {}
};

/// Process exit code for an error kind: 2 config, 3 data, 4 dependency, 1 otherwise.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace simuda
