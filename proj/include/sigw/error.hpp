#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigw {

enum class ErrorKind {
  NonSymmetric,
  NonFinite,
  RankDeficient,
  DimensionMismatch,
  EmptyMeasure,
  InvalidWeights,
  ZeroDimension,
  InfeasibleInit,
  InfeasiblePoint,
  DimensionOrder,
  NotPSD,
  TooFewItems,
  DegenerateAffinity,
  LengthMismatch,
  RowMismatch,
  ZeroMatrix,
  ParseError,
  RaggedRows,
  EmptyFile,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyMeasure: return "EmptyMeasure";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::ZeroDimension: return "ZeroDimension";
    case ErrorKind::InfeasibleInit: return "InfeasibleInit";
    case ErrorKind::InfeasiblePoint: return "InfeasiblePoint";
    case ErrorKind::DimensionOrder: return "DimensionOrder";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::TooFewItems: return "TooFewItems";
    case ErrorKind::DegenerateAffinity: return "DegenerateAffinity";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace sigw
