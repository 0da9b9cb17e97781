#pragma once

#include "gw/common.hpp"

namespace gw::linalg {

/// Singular values of `a` (descending) by one-sided Jacobi rotations.
/// Iterates sweeps until every column pair is orthogonal to `tol` relative to
/// the pair's norms.
Vector singular_values(const Matrix& a, double tol = 1e-10, int max_sweeps = 100);

/// Smallest of the min(rows, cols) singular values.
double smallest_singular_value(const Matrix& a, double tol = 1e-10);

} // namespace gw::linalg
