#pragma once

// Internal nlohmann-json helpers shared by serialization and config parsing.
// Not installed; the public API stays string based.

#include <Eigen/Dense>
#include <string>

#include "json.hpp"
#include "zonotube/sets.hpp"

namespace zonotube::detail {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

/// Parses a nested array into a matrix; validates rectangular shape.
/// `where` names the field in error messages.
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& where);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json czonotope_to_json(const ConstrainedZonotope& z);
ConstrainedZonotope czonotope_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace zonotube::detail
