#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace aeknn {

// Samples are rows throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Eigenpairs of a real symmetric matrix, sorted by descending eigenvalue.
/// Column j of `vectors` is the unit eigenvector for `values[j]`.
struct SymmetricEigen {
  Vector values;
  Eigen::MatrixXd vectors;
};

/// Cyclic Jacobi rotation eigensolver. Deterministic for a given input; the
/// sign of each eigenvector is normalized so that its largest-magnitude entry
/// is positive (first such entry on exact ties).
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps = 100);

/// Flip column signs in place so that each column's largest-magnitude entry
/// is positive.
void normalize_column_signs(Eigen::MatrixXd& columns);

/// Exact equality that treats differently shaped operands as unequal.
template <typename A, typename B>
bool identical(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

/// Copy the rows listed in `rows` (in order) into a new matrix.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows);

}  // namespace aeknn
