#pragma once

#include <stdexcept>
#include <string>

namespace ym {

/// A group element or holonomy landed too close to the branch cut of the
/// principal logarithm. Callers treat this as "smallness hypothesis violated":
/// the offending cell is reported, never silently clamped.
struct BranchCutError : std::runtime_error {
  explicit BranchCutError(const std::string& what, int cell = -1, int degree = -1)
      : std::runtime_error(what), cell(cell), degree(degree) {}
  int cell;
  int degree;
};

/// An iterative linear solve failed to reach its requested residual.
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

}  // namespace ym
