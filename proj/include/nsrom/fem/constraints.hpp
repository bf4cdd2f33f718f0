#pragma once

#include <span>

#include "nsrom/fem/space.hpp"
#include "nsrom/numerics/sparse.hpp"

namespace nsrom {

enum class Elimination { rows_only, symmetric };

// Imposes essential velocity values on a velocity system (size = velocity
// DOFs) or a monolithic velocity+pressure system. Constrained rows become
// identity rows with the prescribed value on the right-hand side. With
// Elimination::symmetric the constrained columns are also moved to the
// right-hand side, which keeps a symmetric matrix symmetric. In a
// monolithic system the pinned pressure row is replaced by p = 0.
// Periodic identification needs no work here: slave DOFs do not exist in
// the merged numbering.
inline void apply_constraints(const TaylorHoodSpace& space, SparseMatrix& system, std::span<double> rhs,
                              std::span<const double> values, Elimination elimination = Elimination::rows_only) {
  const std::size_t nu = space.velocity_dofs();
  const std::size_t n = system.rows();
  NSROM_REQUIRE(n == system.cols() && rhs.size() == n, "apply_constraints: system size mismatch");
  NSROM_REQUIRE(n == nu || n == nu + space.pressure_dofs(), "apply_constraints: system does not match the space");
  NSROM_REQUIRE(values.size() == nu, "apply_constraints: boundary values must cover the velocity DOFs");
  const auto& mask = space.constrained();
  const auto offsets = system.row_offsets();
  const auto cols = system.col_indices();
  auto vals = system.values();

  const std::size_t pinned = n > nu && space.pressure_pinned() ? nu + space.pinned_pressure_dof() : n;
  if (elimination == Elimination::symmetric)
    for (std::size_t i = 0; i < n; ++i) {
      if ((i < nu && mask[i]) || i == pinned) continue;
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
        const std::size_t j = cols[k];
        if (j < nu && mask[j]) {
          rhs[i] -= vals[k] * values[j];
          vals[k] = 0.0;
        } else if (j == pinned) {
          vals[k] = 0.0;
        }
      }
    }

  const auto make_identity_row = [&](std::size_t i, double value) {
    bool has_diag = false;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      vals[k] = cols[k] == i ? 1.0 : 0.0;
      has_diag = has_diag || cols[k] == i;
    }
    if (!has_diag) throw PreconditionError("apply_constraints: diagonal missing from pattern");
    rhs[i] = value;
  };
  for (std::size_t i = 0; i < nu; ++i)
    if (mask[i]) make_identity_row(i, values[i]);
  if (pinned < n) make_identity_row(pinned, 0.0);
}

}  // namespace nsrom
