#pragma once

#include <functional>
#include <optional>
#include <string>

#include "spinproj/determinant.hpp"
#include "spinproj/integrals.hpp"
#include "spinproj/types.hpp"

namespace spinproj {

struct ScfIterRecord {
    int iteration = 0;
    double energy = 0.0;
    double diis_error = 0.0;
    double lambda = 0.0;
};

struct ScfOptions {
    double energy_tol = 1e-8;
    double diis_tol = 1e-6;
    int max_iter = 256;
    int diis_depth = 8;
    double level_shift = 0.2;        ///< engaged on stagnation
    int stagnation_window = 40;
    double mix_angle = 0.1;          ///< symmetry-breaking seed rotation (rad)
    double s2_tol = 1e-6;            ///< constraint tolerance for cuhf_solve
    double lambda_max = 100.0;
    std::function<void(const ScfIterRecord&)> log; ///< optional diagnostics sink
};

/// Converged (or best-effort) constrained determinant.
struct CUHFSolution {
    SlaterDeterminant determinant;
    double lambda = 0.0;
    double energy = 0.0;       ///< <H> including core, no lambda penalty
    double s2_achieved = 0.0;
    double s2_target = 0.0;
    Eigen::MatrixXd g_occ;     ///< n_alpha x n_beta
    bool converged = false;    ///< inner SCF converged
    bool constraint_ok = false;///< |s2_achieved - s2_target| <= s2_tol
    int iterations = 0;        ///< total inner SCF iterations spent
    int scf_calls = 0;         ///< number of fixed-lambda SCF solves
};

/// Fixed-lambda unrestricted SCF with DIIS on the effective Fock operators
/// F_up - lambda P_down / F_down - lambda P_up. Energy field is <H> only.
CUHFSolution uhf_scf(const IntegralSet& ints, const SystemSpec& spec,
                     double lambda,
                     const std::optional<SlaterDeterminant>& guess = {},
                     const ScfOptions& opts = {});

/// Closed-shell restricted SCF (requires n_alpha == n_beta). Multi-seed:
/// aufbau plus rotated-degenerate-HOMO starts, lowest solution kept.
CUHFSolution rhf_scf(const IntegralSet& ints, const SystemSpec& spec,
                     const ScfOptions& opts = {});

/// Outer root-find on lambda enforcing <S^2> = s2_target, warm-started and
/// branch-tracked (nearest-lambda warm starts, escalating symmetry-breaking
/// seeds). Throws InfeasibleError when no bracket exists within lambda_max.
CUHFSolution cuhf_solve(const IntegralSet& ints, const SystemSpec& spec,
                        double s2_target,
                        const std::optional<CUHFSolution>& warm = {},
                        const ScfOptions& opts = {});

/// Unconstrained UHF ground state: lambda = 0 minimum over a ladder of
/// symmetry-broken seeds (HOMO-LUMO mixing angles, pair mixing).
CUHFSolution uhf_ground(const IntegralSet& ints, const SystemSpec& spec,
                        const ScfOptions& opts = {});

/// Orthonormal complement of the occupied columns (deterministic).
Eigen::MatrixXd complete_virtuals(const Eigen::MatrixXd& c_occ);

/// Rotate the up-sector HOMO into the lowest complement vector by angle.
SlaterDeterminant mix_homo_lumo(const SlaterDeterminant& det, double angle);

/// Rotate every up-sector occupied orbital with its own complement partner.
SlaterDeterminant mix_all_pairs(const SlaterDeterminant& det, double angle);

} // namespace spinproj
