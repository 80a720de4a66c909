#pragma once

#include <optional>
#include <vector>

#include "spinproj/determinant.hpp"
#include "spinproj/integrals.hpp"
#include "spinproj/projection.hpp"

namespace spinproj {

/// Biorthogonal pairing data for one (bra, ket) pair: per-sector SVD of the
/// occupied overlap, rotated orbital sets, zero-channel bookkeeping.
struct TransitionContext {
    Eigen::MatrixXd bra_up, ket_up, bra_down, ket_down; ///< rotated (paired)
    Eigen::VectorXd singular_values; ///< up sector then down sector
    int n_up = 0;                    ///< channels in the up sector
    int n_zeros = 0;                 ///< singular values below threshold
    double sign = 1.0;               ///< det(U V^T) over both sectors
    double reduced_overlap = 1.0;    ///< product of non-zero singular values
    double zero_threshold = 1e-10;

    double overlap() const { return n_zeros == 0 ? sign * reduced_overlap : 0.0; }
};

TransitionContext make_transition_context(const SlaterDeterminant& bra,
                                          const SlaterDeterminant& ket,
                                          double zero_threshold = 1e-10);

/// <bra|ket> = prod_sigma det(c_bra^T c_ket).
double overlap_element(const SlaterDeterminant& bra, const SlaterDeterminant& ket);

/// <bra|O|ket> by generalized Slater-Condon rules over the paired channels.
double transition_element(const TransitionContext& ctx, const SpinBlockedOperator& op);
double transition_element(const SlaterDeterminant& bra, const SlaterDeterminant& ket,
                          const SpinBlockedOperator& op);

/// Eigen-solution of the generalized NOCI problem.
struct NociSpectrum {
    std::vector<double> energies;        ///< ascending
    Eigen::MatrixXd coefficients;        ///< k x n_states, S-orthonormal
    std::vector<double> s2_values;
    int effective_rank = 0;
    int dropped_modes = 0;
    double max_residual = 0.0;           ///< max ||(H - E S) c|| / ||c||
    Eigen::MatrixXd overlap_matrix;      ///< assembled S (k x k)
    Eigen::MatrixXd hamiltonian_matrix;  ///< assembled H (k x k)
};

struct NociOptions {
    double rank_tol = 1e-8;        ///< relative S-eigenvalue cutoff
    double zero_threshold = 1e-10; ///< singular-value zero detector
    bool project_to_span = true;   ///< restrict operators to the basis span
};

/// Assemble H and S via transition elements, canonically orthogonalize,
/// solve, and classify <S^2> per state.
NociSpectrum solve_noci(const NociBasis& basis, const IntegralSet& ints,
                        const NociOptions& opts = {});

/// Matrix of an operator over a determinant list (both triangles computed).
Eigen::MatrixXd assemble_matrix(const std::vector<SlaterDeterminant>& dets,
                                const SpinBlockedOperator& op);

/// Lowest state per spin sector.
struct SpinClassified {
    int ell = 0;             ///< integer spin label
    double energy = 0.0;
    double s2 = 0.0;
    int state_index = 0;
    bool contaminated = false; ///< |s2 - ell(ell+1)| > 1e-3
};

std::vector<SpinClassified> classify_states(const NociSpectrum& spectrum);

} // namespace spinproj
