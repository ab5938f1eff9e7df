#include "zonotube/tolerances.hpp"

#include <cstdlib>
#include <string>

namespace zonotube {
namespace {

double env_or(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  try {
    size_t used = 0;
    const double value = std::stod(raw, &used);
    if (used != std::string(raw).size()) return fallback;
    if (!(value > 0.0)) return fallback;
    return value;
  } catch (const std::exception&) {
    return fallback;
  }
}

}  // namespace

Tolerances Tolerances::from_env() {
  Tolerances tol;
  tol.feasibility = env_or("ZONOTUBE_TOL_FEASIBILITY", tol.feasibility);
  tol.psd_margin = env_or("ZONOTUBE_TOL_PSD", tol.psd_margin);
  tol.probe_slack = env_or("ZONOTUBE_TOL_PROBE", tol.probe_slack);
  tol.optimality = env_or("ZONOTUBE_TOL_OPTIMALITY", tol.optimality);
  return tol;
}

}  // namespace zonotube
