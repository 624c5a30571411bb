#pragma once

#include "dirms/sphere.hpp"

//! Small dense linear-algebra helpers that the estimators need and that no
//! external solver is pulled in for.
namespace dirms::linalg {

using sphere::Matrix;
using sphere::Vector;

//! Eigen-decomposition of a small symmetric matrix.
struct SymmetricEigen {
  Vector values;   //!< eigenvalues, sorted descending
  Matrix vectors;  //!< orthonormal eigenvectors as columns, same order
};

//! Cyclic Jacobi eigen-decomposition for symmetric matrices of modest size
//! (the library never exceeds ~13×13). Deterministic, dependency-free, and
//! accurate to the requested off-diagonal tolerance.
//!
//! \param a symmetric matrix (only ever called with m <= ~13).
//! \param tol stop once every off-diagonal entry is below tol·‖a‖_F.
//! \param max_sweeps upper bound on full cyclic sweeps.
SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 50);

}  // namespace dirms::linalg
