#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace soilest {

/// Dense matrix exponential by scaling and squaring with a diagonal Pade
/// approximant of degree 3, 5, 7, 9 or 13 picked from the 1-norm
/// (Higham, SIAM J. Matrix Anal. Appl. 26, 2005).
///
/// Throws DomainError for non-square or non-finite input.
[[nodiscard]] Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// exp(t A) B for sparse A without forming exp(t A): the interval is split so
/// that ||t A / s||_1 <= 1 and each piece is a Taylor series truncated once
/// the terms stop contributing at double precision.
[[nodiscard]] Eigen::MatrixXd expm_multiply(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& b,
                                            double t);

} // namespace soilest
