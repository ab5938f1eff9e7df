#pragma once

#include <string>

#include "zonotube/sets.hpp"

namespace zonotube {

/// Compact JSON object {"c": [...], "G": [[...]], "F": [[...]], "theta": [...]}
/// with matrices as row-major nested arrays.  F/theta are omitted for plain
/// zonotopes.
std::string to_json(const ConstrainedZonotope& z);

/// Inverse of to_json.  Throws std::runtime_error with a descriptive message
/// on malformed documents (wrong types, ragged rows, size mismatches).
ConstrainedZonotope czonotope_from_json(const std::string& text);

}  // namespace zonotube
