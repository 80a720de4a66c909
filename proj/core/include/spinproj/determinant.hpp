#pragma once

#include <Eigen/Dense>

namespace spinproj {

/// Slater determinant given by per-spin-sector occupied coefficient matrices
/// over the common orthonormal basis (columns = occupied orbitals).
struct SlaterDeterminant {
    Eigen::MatrixXd c_up;    ///< L x n_alpha
    Eigen::MatrixXd c_down;  ///< L x n_beta

    int n_orbitals() const { return static_cast<int>(c_up.rows()); }
    int n_up() const { return static_cast<int>(c_up.cols()); }
    int n_down() const { return static_cast<int>(c_down.cols()); }
    int n_electrons() const { return n_up() + n_down(); }

    /// max |c_sigma^T c_sigma - I| over both sectors
    double orthonormality_error() const;
    bool is_orthonormal(double tol = 1e-10) const {
        return orthonormality_error() <= tol;
    }
};

/// Occupied cross-sector overlap c_up^T c_down (paper G, row i <-> orbital 2i,
/// column j <-> orbital 2j+1).
Eigen::MatrixXd occ_overlap(const SlaterDeterminant& det);

/// Closed-form <S^2> = Ms(Ms+1) + N_beta - sum_ij G_ij^2.
double s2_expectation(const SlaterDeterminant& det);

/// Fix column phases: largest-magnitude coefficient positive.
void fix_phases(Eigen::MatrixXd& coeffs);

/// Lowdin symmetric orthonormalization C (C^T C)^{-1/2} of the columns.
Eigen::MatrixXd lowdin_orthonormalize(const Eigen::MatrixXd& c);

} // namespace spinproj
