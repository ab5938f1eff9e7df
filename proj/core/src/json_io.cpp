#include "zonotube/json_io.hpp"

#include <stdexcept>

#include "json_detail.hpp"

namespace zonotube {
namespace detail {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw std::runtime_error(where + ": expected an array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  for (int i = 0; i < rows; ++i) {
    if (!j[static_cast<size_t>(i)].is_array()) {
      throw std::runtime_error(where + ": row " + std::to_string(i) + " is not an array");
    }
    const int c = static_cast<int>(j[static_cast<size_t>(i)].size());
    if (cols < 0) cols = c;
    if (c != cols) throw std::runtime_error(where + ": ragged rows");
  }
  Eigen::MatrixXd m(rows, std::max(cols, 0));
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) {
      const auto& cell = j[static_cast<size_t>(i)][static_cast<size_t>(c)];
      if (!cell.is_number()) {
        throw std::runtime_error(where + ": non-numeric entry at row " + std::to_string(i));
      }
      m(i, c) = cell.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw std::runtime_error(where + ": expected an array");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw std::runtime_error(where + ": non-numeric entry at index " + std::to_string(i));
    }
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

nlohmann::json czonotope_to_json(const ConstrainedZonotope& z) {
  nlohmann::json j;
  j["c"] = vector_to_json(z.c);
  j["G"] = matrix_to_json(z.G);
  if (z.num_constraints() > 0) {
    j["F"] = matrix_to_json(z.F);
    j["theta"] = vector_to_json(z.theta);
  }
  return j;
}

ConstrainedZonotope czonotope_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw std::runtime_error(where + ": expected an object");
  if (!j.contains("c") || !j.contains("G")) {
    throw std::runtime_error(where + ": missing required keys 'c' and 'G'");
  }
  ConstrainedZonotope z;
  z.c = vector_from_json(j.at("c"), where + ".c");
  z.G = matrix_from_json(j.at("G"), where + ".G");
  if (z.G.rows() != z.c.size()) {
    // A zero-generator matrix may arrive as [] with no row data.
    if (z.G.size() == 0) {
      z.G.resize(z.c.size(), 0);
    } else {
      throw std::runtime_error(where + ": G row count does not match c");
    }
  }
  if (j.contains("F") != j.contains("theta")) {
    throw std::runtime_error(where + ": F and theta must appear together");
  }
  if (j.contains("F")) {
    z.F = matrix_from_json(j.at("F"), where + ".F");
    z.theta = vector_from_json(j.at("theta"), where + ".theta");
    if (z.F.size() == 0 && z.theta.size() == 0) {
      z.F.resize(0, z.G.cols());
      z.theta.resize(0);
    }
    if (z.F.cols() != z.G.cols()) {
      throw std::runtime_error(where + ": F column count does not match G");
    }
    if (z.theta.size() != z.F.rows()) {
      throw std::runtime_error(where + ": theta size does not match F rows");
    }
  } else {
    z.F.resize(0, z.G.cols());
    z.theta.resize(0);
  }
  z.validate();
  return z;
}

}  // namespace detail

std::string to_json(const ConstrainedZonotope& z) {
  return detail::czonotope_to_json(z).dump();
}

ConstrainedZonotope czonotope_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("constrained zonotope JSON: ") + e.what());
  }
  return detail::czonotope_from_json(j, "constrained zonotope");
}

}  // namespace zonotube
