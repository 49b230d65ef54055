#include "w2s/error.hpp"

namespace w2s {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EigenvalueBelowTolerance: return "EigenvalueBelowTolerance";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::MissingPopulation: return "MissingPopulation";
    case Errc::MissingTestSplit: return "MissingTestSplit";
    case Errc::SpaceMismatch: return "SpaceMismatch";
    case Errc::EmptySubspace: return "EmptySubspace";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::NonPSD: return "NonPSD";
    case Errc::ConfigViolation: return "ConfigViolation";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::NonFiniteEntry: return "NonFiniteEntry";
    case Errc::Io: return "Io";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::PreconditionRatioViolated: return "PreconditionRatioViolated";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::EmptySweep: return "EmptySweep";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorKind kind_of(Errc code) noexcept {
  switch (code) {
    case Errc::Usage:
      return ErrorKind::usage;
    case Errc::ConfigViolation:
    case Errc::PreconditionRatioViolated:
      return ErrorKind::config;
    case Errc::BadMagic:
    case Errc::VersionMismatch:
    case Errc::TruncatedFile:
    case Errc::NonFiniteEntry:
    case Errc::Io:
    case Errc::MissingColumn:
    case Errc::EmptySweep:
    case Errc::LabelMismatch:
    case Errc::MissingPopulation:
    case Errc::MissingTestSplit:
    case Errc::DimensionMismatch:
    case Errc::LengthMismatch:
    case Errc::SpaceMismatch:
      return ErrorKind::data;
    default:
      return ErrorKind::numerical;
  }
}

}  // namespace w2s
