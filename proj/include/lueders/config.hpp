#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lueders {

/// Every numerical decision in the library reads its threshold from here.
struct Tolerances {
  double herm = 1e-10;       // ||M - M*||_F <= herm * ||M||_F
  double psd = 1e-10;        // eigenvalue slack below 0 / above 1
  double orth = 1e-9;        // orthonormality and idempotence checks
  double recon = 1e-9;       // relative reconstruction error
  double nullspace = 1e-10;  // ||Mx|| <= nullspace * ||M|| * ||x||
  double comm = 1e-9;        // commutators, relative to max ||E_i||
  double norm = 1e-9;        // ||F - I|| for the Resolution class
  double cluster = 1e-9;     // eigenvalue clustering and bin-edge snapping
  double witness = 1e-9;     // "nonzero" block, relative to ||B||
  double subspace = 1e-8;    // projector Frobenius distance
};

enum class ErrorCode {
  NotSquare,
  NotHermitian,
  NoConvergence,
  NotPositive,
  DimensionMismatch,
  SpectrumBelowZero,
  SpectrumAboveOne,
  NotSubnormalized,
  InvalidInterval,
  NotCommuting,
  NotResolution,
  IsResolution,
  SingularSystem,
  NotDensityMatrix,
  IndexOutOfRange,
  CommutesNoWitness,
  ResolutionExhausted,
  RefinementVanished,
  ParseError,
  InvalidArgument,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SpectrumBelowZero: return "SpectrumBelowZero";
    case ErrorCode::SpectrumAboveOne: return "SpectrumAboveOne";
    case ErrorCode::NotSubnormalized: return "NotSubnormalized";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NotCommuting: return "NotCommuting";
    case ErrorCode::NotResolution: return "NotResolution";
    case ErrorCode::IsResolution: return "IsResolution";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotDensityMatrix: return "NotDensityMatrix";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CommutesNoWitness: return "CommutesNoWitness";
    case ErrorCode::ResolutionExhausted: return "ResolutionExhausted";
    case ErrorCode::RefinementVanished: return "RefinementVanished";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lueders
