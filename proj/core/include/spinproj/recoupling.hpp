#pragma once

#include <array>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "spinproj/determinant.hpp"

namespace spinproj {

/// Cross-sector overlaps of the four-electron occupied orbitals
/// (paper labeling: up orbitals 0,2; down orbitals 1,3).
struct OverlapInputs4e {
    double g01 = 0.0, g23 = 0.0, g03 = 0.0, g21 = 0.0;
};

/// 2+3+1 blocks of the recoupled overlap matrix.
struct RecoupledBlocks {
    Eigen::Matrix2d m0;
    Eigen::Matrix3d m1;
    double m2 = 0.0;
    double offblock_norm = 0.0;
};

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1, j2 m2 | J M>.
/// Arguments are half-integer valued; selection-rule failures return 0.
double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double J, double M);

/// The 6x6 unitary bringing the uncoupled four-electron configurations to
/// the recoupled |(S01 S23) S> set.  Rows |(00)0>, |(11)0>, |(01)1>,
/// |(10)1>, |(11)1>, |(11)2>.
Eigen::Matrix<double, 6, 6> recoupling_matrix_4e();

/// Same matrix rebuilt from Clebsch-Gordan products (cross-check path).
Eigen::Matrix<double, 6, 6> recoupling_matrix_4e_from_cg();

/// Analytic NOCI(6) overlap matrix M(G) with f1..f4.
Eigen::Matrix<double, 6, 6> analytic_overlap_4e(const OverlapInputs4e& g);

/// Compute U_R M U_R^T, extract the 2+3+1 blocks and the off-block norm,
/// and check the blocks against their closed forms.
RecoupledBlocks verify_block_diagonal(const OverlapInputs4e& g);

/// Closed-form recoupled blocks.
Eigen::Matrix2d analytic_block_s0(const OverlapInputs4e& g);
Eigen::Matrix3d analytic_block_s1(const OverlapInputs4e& g);
double analytic_block_s2(const OverlapInputs4e& g);

/// Phase relating the sector-blocked determinant of one spin assignment to
/// the orbital-ordered uncoupled state of the appendix convention.
double appendix_phase(std::uint32_t mask, int n_electrons);

/// Build a 4-electron determinant whose occupied cross-sector overlaps
/// realize g with the appendix sparsity.  Throws DomainError when g is not
/// realizable with orthonormal sectors.
SlaterDeterminant synthetic_seed_4e(const OverlapInputs4e& g, int n_orbitals = 4);

bool realizable_4e(const OverlapInputs4e& g);

/// Rejection-sample a realizable g uniform in [-range, range]^4.
OverlapInputs4e sample_realizable_4e(std::mt19937& rng, double range = 0.9);

} // namespace spinproj
