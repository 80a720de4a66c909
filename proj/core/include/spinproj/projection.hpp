#pragma once

#include <cstdint>
#include <vector>

#include "spinproj/determinant.hpp"
#include "spinproj/scf.hpp"

namespace spinproj {

/// One spin reassignment of N occupied spatial orbitals: bit i set means
/// occupied orbital i (paper interleaved labeling) goes to the up sector.
struct SpinAssignment {
    std::uint32_t mask = 0;
    int popcount() const { return __builtin_popcount(mask); }
};

/// Generated configuration set for the NOCI projection.
struct NociBasis {
    std::vector<SlaterDeterminant> dets;
    std::vector<SpinAssignment> assignments; ///< provenance, parallel to dets
    int k_requested = 0;   ///< binom(N, N/2)
    int k_eff = 0;         ///< surviving determinants
    std::vector<int> paired_indices; ///< occupied pair labels i <-> (2i, 2i+1)
    int m_unpaired = 0;
    int seed_index = -1;   ///< position of the seed's own assignment
};

/// All binom(N, N/2) equal-split masks, ascending mask value.
std::vector<SpinAssignment> enumerate_assignments(int n_electrons);

/// Pair detection from the occupied cross-sector overlap: pair (2i, 2i+1) is
/// paired iff |g[i,i]| >= 1 - epsilon_pair; asserts the row/column of a
/// paired orbital is consistent with a unit diagonal.
std::pair<std::vector<int>, int> detect_pairs(const Eigen::MatrixXd& g_occ,
                                              double epsilon_pair = 1e-6);

/// Algorithm: enumerate spin reassignments of the seed's occupied orbitals,
/// drop vanishing determinants (sector Gram singular below 1e-10), remove
/// duplicates (sector-span equality via mutual overlap magnitude), then
/// Lowdin-orthonormalize each surviving sector.
NociBasis build_noci_basis(const CUHFSolution& seed, double epsilon_pair = 1e-6);

/// Same construction from a bare determinant (synthetic seeds in tests).
NociBasis build_noci_basis(const SlaterDeterminant& seed, double epsilon_pair = 1e-6);

/// Restrict a basis to a subset of assignments (manual NOCI subsets).
NociBasis restrict_basis(const NociBasis& basis,
                         const std::vector<std::uint32_t>& masks);

std::int64_t binomial(int n, int k);

} // namespace spinproj
