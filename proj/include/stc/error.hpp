#pragma once

#include <stdexcept>
#include <string>

namespace stc {

enum class Errc {
  // input / validation
  FileNotFound,
  DuplicateId,
  NonContiguousIds,
  RaggedRow,
  EmptyText,
  MixedGoldLabels,
  BadHeader,
  CountMismatch,
  DimensionMismatch,
  NonFinite,
  ZeroRow,
  OutOfRange,
  LengthMismatch,
  MissingClass,
  BadConfig,
  // numeric
  IsolatedVertex,
  EigenFailure,
  // external worker
  WorkerTimeout,
  WorkerMalformed,
  IncompleteResponse,
  WorkerExit,
  WorkerReported,
};

// Input/validation errors map to exit code 2, numeric failures to 3, worker
// failures to 4.
enum class ErrorCategory { Input, Numeric, Worker };

constexpr ErrorCategory category_of(Errc code) {
  switch (code) {
    case Errc::IsolatedVertex:
    case Errc::EigenFailure:
      return ErrorCategory::Numeric;
    case Errc::WorkerTimeout:
    case Errc::WorkerMalformed:
    case Errc::IncompleteResponse:
    case Errc::WorkerExit:
    case Errc::WorkerReported:
      return ErrorCategory::Worker;
    default:
      return ErrorCategory::Input;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

}  // namespace stc
