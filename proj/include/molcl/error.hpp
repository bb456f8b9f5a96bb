// Copyright 2026 The molcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace molcl {

enum class Errc {
  // chem
  EmptyInput,
  InvalidSyntax,
  UnbalancedParenthesis,
  UnclosedRingBond,
  UnknownAtomSymbol,
  ValenceViolation,
  MultiFragmentInput,
  FeatureOutOfRange,
  // fingerprint
  WidthMismatch,
  DomainError,
  // augment / nn
  IndexOutOfRange,
  CodeOutOfVocab,
  PartitionMismatch,
  TraceMismatch,
  ShapeMismatch,
  // loss
  ZeroVector,
  WeightShapeMismatch,
  UnpairedRow,
  NonFinite,
  NonFiniteGrad,
  // train
  EmptyDataset,
  SingleClass,
  ZeroRange,
  TaskTypeMismatch,
  CheckpointVersionMismatch,
  CheckpointFormat,
  Config,
  Io,
};

constexpr std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidSyntax: return "InvalidSyntax";
    case Errc::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case Errc::UnclosedRingBond: return "UnclosedRingBond";
    case Errc::UnknownAtomSymbol: return "UnknownAtomSymbol";
    case Errc::ValenceViolation: return "ValenceViolation";
    case Errc::MultiFragmentInput: return "MultiFragmentInput";
    case Errc::FeatureOutOfRange: return "FeatureOutOfRange";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::DomainError: return "DomainError";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::CodeOutOfVocab: return "CodeOutOfVocab";
    case Errc::PartitionMismatch: return "PartitionMismatch";
    case Errc::TraceMismatch: return "TraceMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::WeightShapeMismatch: return "WeightShapeMismatch";
    case Errc::UnpairedRow: return "UnpairedRow";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NonFiniteGrad: return "NonFiniteGrad";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::SingleClass: return "SingleClass";
    case Errc::ZeroRange: return "ZeroRange";
    case Errc::TaskTypeMismatch: return "TaskTypeMismatch";
    case Errc::CheckpointVersionMismatch: return "CheckpointVersionMismatch";
    case Errc::CheckpointFormat: return "CheckpointFormat";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the `Errc` kinds so
/// callers (and tests) can branch on the kind rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

  Errc code() const noexcept { return code_; }
  /// The message without the kind prefix, for re-raising with more context.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace molcl
