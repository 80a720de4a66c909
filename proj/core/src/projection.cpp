#include "spinproj/projection.hpp"

#include <algorithm>
#include <cmath>

#include "spinproj/noci.hpp"
#include "spinproj/types.hpp"

namespace spinproj {

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    std::int64_t r = 1;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

std::vector<SpinAssignment> enumerate_assignments(int n_electrons) {
    if (n_electrons < 2 || n_electrons % 2 != 0)
        throw DomainError("enumerate_assignments: N must be even and >= 2");
    if (n_electrons > 24)
        throw SizeCapError("enumerate_assignments: N > 24 unsupported");
    std::vector<SpinAssignment> out;
    out.reserve(static_cast<std::size_t>(binomial(n_electrons, n_electrons / 2)));
    const std::uint32_t limit = 1u << n_electrons;
    for (std::uint32_t mask = 0; mask < limit; ++mask)
        if (__builtin_popcount(mask) == n_electrons / 2)
            out.push_back({mask});
    return out;
}

std::pair<std::vector<int>, int> detect_pairs(const Eigen::MatrixXd& g_occ,
                                              double epsilon_pair) {
    const int n_up = static_cast<int>(g_occ.rows());
    const int n_down = static_cast<int>(g_occ.cols());
    const int n_diag = std::min(n_up, n_down);
    std::vector<int> paired;
    const double off_tol = std::sqrt(2.0 * epsilon_pair);
    for (int i = 0; i < n_diag; ++i) {
        if (std::abs(g_occ(i, i)) < 1.0 - epsilon_pair)
            continue;
        for (int j = 0; j < n_down; ++j)
            if (j != i && std::abs(g_occ(i, j)) > off_tol)
                throw ConsistencyError("detect_pairs: unit diagonal at " + std::to_string(i)
                                       + " with large off-diagonal g(" + std::to_string(i)
                                       + "," + std::to_string(j) + ")");
        for (int j = 0; j < n_up; ++j)
            if (j != i && std::abs(g_occ(j, i)) > off_tol)
                throw ConsistencyError("detect_pairs: unit diagonal at " + std::to_string(i)
                                       + " with large off-diagonal g(" + std::to_string(j)
                                       + "," + std::to_string(i) + ")");
        paired.push_back(i);
    }
    const int m = n_up + n_down - 2 * static_cast<int>(paired.size());
    return {paired, m};
}

namespace {

NociBasis build_from_det(const SlaterDeterminant& seed, double epsilon_pair) {
    const int n_up = seed.n_up();
    const int n_down = seed.n_down();
    if (n_up != n_down)
        throw DomainError("build_noci_basis: equal spin split required");
    const int n = n_up + n_down;
    const int L = seed.n_orbitals();

    // paper interleaved labeling: occupied orbital 2i is up column i,
    // 2j+1 is down column j
    std::vector<Eigen::VectorXd> orbs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        orbs[i] = (i % 2 == 0) ? seed.c_up.col(i / 2) : seed.c_down.col(i / 2);

    NociBasis basis;
    basis.k_requested = static_cast<int>(binomial(n, n / 2));
    auto assignments = enumerate_assignments(n);

    std::uint32_t seed_mask = 0;
    for (int i = 0; i < n; i += 2)
        seed_mask |= 1u << i;

    for (const auto& a : assignments) {
        Eigen::MatrixXd up(L, n / 2), down(L, n / 2);
        int iu = 0, id = 0;
        for (int i = 0; i < n; ++i) {
            if (a.mask >> i & 1u)
                up.col(iu++) = orbs[i];
            else
                down.col(id++) = orbs[i];
        }
        // vanishing: a sector Gram singular below rank means two identical
        // spatial orbitals ended up in one sector
        bool vanishes = false;
        for (const auto* c : {&up, &down}) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c->transpose() * (*c));
            if (es.eigenvalues().minCoeff() < 1e-10)
                vanishes = true;
        }
        if (vanishes) {
            if (a.mask == seed_mask)
                throw ConsistencyError("build_noci_basis: the seed's own assignment vanished");
            continue;
        }
        SlaterDeterminant det{lowdin_orthonormalize(up), lowdin_orthonormalize(down)};
        bool duplicate = false;
        for (const auto& prev : basis.dets)
            if (std::abs(overlap_element(prev, det)) >= 1.0 - 1e-10) {
                duplicate = true;
                break;
            }
        if (duplicate) {
            if (a.mask == seed_mask)
                throw ConsistencyError("build_noci_basis: the seed's own assignment deduplicated");
            continue;
        }
        if (a.mask == seed_mask)
            basis.seed_index = static_cast<int>(basis.dets.size());
        basis.dets.push_back(std::move(det));
        basis.assignments.push_back(a);
    }
    if (basis.dets.empty())
        throw ConsistencyError("build_noci_basis: all determinants vanished");
    basis.k_eff = static_cast<int>(basis.dets.size());

    auto [paired, m] = detect_pairs(occ_overlap(seed), epsilon_pair);
    basis.paired_indices = std::move(paired);
    basis.m_unpaired = m;
    return basis;
}

} // namespace

NociBasis build_noci_basis(const SlaterDeterminant& seed, double epsilon_pair) {
    return build_from_det(seed, epsilon_pair);
}

NociBasis build_noci_basis(const CUHFSolution& seed, double epsilon_pair) {
    if (!seed.converged)
        throw DomainError("build_noci_basis: seed SCF not converged");
    return build_from_det(seed.determinant, epsilon_pair);
}

NociBasis restrict_basis(const NociBasis& basis,
                         const std::vector<std::uint32_t>& masks) {
    NociBasis out;
    out.k_requested = basis.k_requested;
    out.paired_indices = basis.paired_indices;
    out.m_unpaired = basis.m_unpaired;
    for (std::size_t i = 0; i < basis.dets.size(); ++i) {
        const std::uint32_t m = basis.assignments[i].mask;
        if (std::find(masks.begin(), masks.end(), m) == masks.end())
            continue;
        if (static_cast<int>(i) == basis.seed_index)
            out.seed_index = static_cast<int>(out.dets.size());
        out.dets.push_back(basis.dets[i]);
        out.assignments.push_back(basis.assignments[i]);
    }
    out.k_eff = static_cast<int>(out.dets.size());
    return out;
}

} // namespace spinproj
