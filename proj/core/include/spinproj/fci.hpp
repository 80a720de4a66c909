#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spinproj/determinant.hpp"
#include "spinproj/integrals.hpp"

namespace spinproj {

/// Occupation bit patterns of one determinant (bit p = spatial orbital p).
struct DetString {
    std::uint64_t alpha = 0;
    std::uint64_t beta = 0;
    bool operator==(const DetString&) const = default;
};

struct FciResult {
    std::vector<double> energies;   ///< ascending, core included
    std::vector<double> s2_values;
    std::size_t n_determinants = 0;
    Eigen::MatrixXd eigenvectors;   ///< n_dets x n_states
};

struct FciOptions {
    std::size_t det_cap = 2'000'000;   ///< enumeration guard
    std::size_t dense_cap = 10'000;    ///< dense solver below, Davidson above
    double davidson_tol = 1e-8;
    int davidson_max_subspace_factor = 20;
    int davidson_max_iter = 200;
};

/// Full Ms-fixed determinant list, lexicographic (ascending mask pairs).
std::vector<DetString> enumerate_dets(const SystemSpec& spec,
                                      std::size_t cap = 2'000'000);

/// Lowest n_states eigenpairs of the full Hamiltonian with <S^2> labels.
FciResult solve_fci(const SystemSpec& spec, const IntegralSet& ints,
                    int n_states = 1, const FciOptions& opts = {});

/// Apply a generic spin-blocked operator to a vector over the determinant
/// list (term-by-term second quantization; oracle-grade).
Eigen::VectorXd apply_operator(const std::vector<DetString>& dets,
                               const SpinBlockedOperator& op,
                               const Eigen::VectorXd& vec);

/// Dense matrix of a generic operator over the determinant list.
Eigen::MatrixXd operator_matrix(const std::vector<DetString>& dets,
                                const SpinBlockedOperator& op);

/// Expansion of a nonorthogonal determinant in the DetString basis
/// (minors of the coefficient matrices).
Eigen::VectorXd expand_determinant(const SlaterDeterminant& det,
                                   const std::vector<DetString>& dets);

/// Reference value of <bra|O|ket> via explicit expansion; guarded to
/// L <= 6, N <= 4.
double brute_force_transition(const SlaterDeterminant& bra,
                              const SlaterDeterminant& ket,
                              const SpinBlockedOperator& op);

/// Block Davidson for the lowest eigenpairs of a symmetric operator given
/// by a matvec; diag is the diagonal for preconditioning.
std::pair<std::vector<double>, Eigen::MatrixXd>
davidson(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
         const Eigen::VectorXd& diag, int n_states, const FciOptions& opts = {});

} // namespace spinproj
