#pragma once

#include <stdexcept>
#include <string>

namespace zonotube {

/// Malformed configuration or input files (CLI exit code 2).
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Gain synthesis or tightening produced no usable result (exit code 3).
struct InfeasibleSynthesis : std::runtime_error {
  explicit InfeasibleSynthesis(const std::string& what) : std::runtime_error(what) {}
};

/// A recorded certificate failed its re-check (exit code 4).
struct CertificateMismatch : std::runtime_error {
  explicit CertificateMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// The closed loop hit an unrecoverable infeasibility at run time (exit 5).
struct RuntimeInfeasible : std::runtime_error {
  explicit RuntimeInfeasible(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zonotube
