#pragma once

#include <stdexcept>
#include <string>

namespace w2s {

enum class Errc {
  NonSymmetric,
  NonFinite,
  EigenvalueBelowTolerance,
  DimensionMismatch,
  LengthMismatch,
  SingularSystem,
  LabelMismatch,
  MissingPopulation,
  MissingTestSplit,
  SpaceMismatch,
  EmptySubspace,
  DegenerateData,
  NonPSD,
  ConfigViolation,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  NonFiniteEntry,
  Io,
  ConstantInput,
  PreconditionRatioViolated,
  MissingColumn,
  EmptySweep,
  Usage,
};

const char* to_string(Errc code) noexcept;

// Coarse grouping used by the CLI to pick an exit status.
enum class ErrorKind { usage, config, data, numerical };
ErrorKind kind_of(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace w2s
