#include "spinproj/scf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spinproj {

namespace {

Eigen::MatrixXd coulomb(const TwoElectronIntegrals& v, const Eigen::MatrixXd& p) {
    const int L = v.n_orbitals();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(L, L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b <= a; ++b) {
            double sum = 0.0;
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    sum += v.get(a, b, r, s) * p(r, s);
            j(a, b) = j(b, a) = sum;
        }
    return j;
}

Eigen::MatrixXd exchange(const TwoElectronIntegrals& v, const Eigen::MatrixXd& p) {
    const int L = v.n_orbitals();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(L, L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b <= a; ++b) {
            double sum = 0.0;
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    sum += v.get(a, r, b, s) * p(r, s);
            k(a, b) = k(b, a) = sum;
        }
    return k;
}

struct DiisState {
    std::vector<Eigen::VectorXd> errors;
    std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> focks;
    int depth = 8;

    void push(const Eigen::MatrixXd& fu, const Eigen::MatrixXd& fd,
              const Eigen::VectorXd& err) {
        focks.emplace_back(fu, fd);
        errors.push_back(err);
        if (static_cast<int>(focks.size()) > depth) {
            focks.erase(focks.begin());
            errors.erase(errors.begin());
        }
    }

    bool extrapolate(Eigen::MatrixXd& fu, Eigen::MatrixXd& fd) const {
        const int m = static_cast<int>(focks.size());
        if (m < 2)
            return false;
        Eigen::MatrixXd b = Eigen::MatrixXd::Constant(m + 1, m + 1, -1.0);
        b(m, m) = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                b(i, j) = errors[i].dot(errors[j]);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        rhs(m) = -1.0;
        Eigen::VectorXd c = b.fullPivLu().solve(rhs);
        if (!c.allFinite())
            return false;
        fu.setZero();
        fd.setZero();
        for (int i = 0; i < m; ++i) {
            fu += c(i) * focks[i].first;
            fd += c(i) * focks[i].second;
        }
        return true;
    }
};

} // namespace

Eigen::MatrixXd complete_virtuals(const Eigen::MatrixXd& c_occ) {
    const int L = static_cast<int>(c_occ.rows());
    const int n = static_cast<int>(c_occ.cols());
    Eigen::MatrixXd full = Eigen::MatrixXd::Identity(L, L);
    // project out the occupied space, then orthonormalize the remainder
    full -= c_occ * c_occ.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(full, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(L - n);
}

namespace {

Eigen::MatrixXd rotate_cols(Eigen::MatrixXd c, int i, int j, double angle) {
    const Eigen::VectorXd a = c.col(i), b = c.col(j);
    c.col(i) = std::cos(angle) * a + std::sin(angle) * b;
    c.col(j) = -std::sin(angle) * a + std::cos(angle) * b;
    return c;
}

} // namespace

SlaterDeterminant mix_homo_lumo(const SlaterDeterminant& det, double angle) {
    const int n = det.n_up();
    if (n == 0 || n == det.n_orbitals())
        return det;
    Eigen::MatrixXd vir = complete_virtuals(det.c_up);
    Eigen::MatrixXd cu(det.c_up.rows(), n + 1);
    cu << det.c_up, vir.col(0);
    cu = rotate_cols(cu, n - 1, n, angle);
    return {cu.leftCols(n), det.c_down};
}

SlaterDeterminant mix_all_pairs(const SlaterDeterminant& det, double angle) {
    const int n = det.n_up();
    const int L = det.n_orbitals();
    if (n == 0 || n == L)
        return det;
    Eigen::MatrixXd vir = complete_virtuals(det.c_up);
    Eigen::MatrixXd cu(L, n + vir.cols());
    cu << det.c_up, vir;
    for (int i = 0; i < n; ++i) {
        const int v = n + std::min<int>(n - 1 - i, static_cast<int>(vir.cols()) - 1);
        cu = rotate_cols(cu, i, v, angle);
    }
    return {cu.leftCols(n), det.c_down};
}

CUHFSolution uhf_scf(const IntegralSet& ints, const SystemSpec& spec,
                     double lambda, const std::optional<SlaterDeterminant>& guess,
                     const ScfOptions& opts) {
    spec.validate();
    const int L = ints.n_orbitals();
    const int na = spec.n_alpha, nb = spec.n_beta;

    Eigen::MatrixXd cu, cd;
    if (guess) {
        cu = guess->c_up;
        cd = guess->c_down;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ints.h);
        cu = es.eigenvectors().leftCols(na);
        cd = es.eigenvectors().leftCols(nb);
    }

    CUHFSolution out;
    out.lambda = lambda;
    DiisState diis;
    diis.depth = opts.diis_depth;
    double e_old = 0.0;
    double best_err = 1e300;
    int since_improvement = 0;
    bool shifted = false;

    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const Eigen::MatrixXd pu = cu * cu.transpose();
        const Eigen::MatrixXd pd = cd * cd.transpose();
        const Eigen::MatrixXd j = coulomb(ints.v, pu + pd);
        const Eigen::MatrixXd fu = ints.h + j - exchange(ints.v, pu);
        const Eigen::MatrixXd fd = ints.h + j - exchange(ints.v, pd);
        const double energy = 0.5 * ((ints.h + fu).cwiseProduct(pu).sum()
                                     + (ints.h + fd).cwiseProduct(pd).sum())
                              + ints.core_energy;
        if (!std::isfinite(energy))
            throw ConvergenceError("uhf_scf: non-finite energy at iteration "
                                   + std::to_string(it));
        Eigen::MatrixXd fu_eff = fu - lambda * pd;
        Eigen::MatrixXd fd_eff = fd - lambda * pu;
        Eigen::VectorXd err(2 * L * L);
        {
            const Eigen::MatrixXd eu = fu_eff * pu - pu * fu_eff;
            const Eigen::MatrixXd ed = fd_eff * pd - pd * fd_eff;
            err << Eigen::Map<const Eigen::VectorXd>(eu.data(), L * L),
                Eigen::Map<const Eigen::VectorXd>(ed.data(), L * L);
        }
        const double err_max = err.cwiseAbs().maxCoeff();
        if (opts.log)
            opts.log({it, energy, err_max, lambda});
        if (it > 0 && std::abs(energy - e_old) < opts.energy_tol
            && err_max < opts.diis_tol) {
            out.converged = true;
            out.energy = energy;
            break;
        }
        e_old = energy;
        if (err_max < best_err - 1e-12) {
            best_err = err_max;
            since_improvement = 0;
        } else if (++since_improvement > opts.stagnation_window) {
            shifted = true;
        }
        diis.push(fu_eff, fd_eff, err);
        diis.extrapolate(fu_eff, fd_eff);
        if (shifted && opts.level_shift > 0.0) {
            fu_eff += opts.level_shift * (Eigen::MatrixXd::Identity(L, L) - pu);
            fd_eff += opts.level_shift * (Eigen::MatrixXd::Identity(L, L) - pd);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eu(fu_eff), ed(fd_eff);
        cu = eu.eigenvectors().leftCols(na);
        cd = ed.eigenvectors().leftCols(nb);
        out.energy = energy;
    }
    out.iterations = it;
    out.scf_calls = 1;
    fix_phases(cu);
    fix_phases(cd);
    out.determinant = {cu, cd};
    out.g_occ = occ_overlap(out.determinant);
    out.s2_achieved = s2_expectation(out.determinant);
    return out;
}

namespace {

struct Candidate {
    CUHFSolution sol;
    bool valid = false;
};

// seeds derived from a base solution: identity, homo-lumo mixes, pair mixes
std::vector<SlaterDeterminant> seed_ladder(const SlaterDeterminant& base) {
    std::vector<SlaterDeterminant> out;
    out.push_back(base);
    for (double angle : {0.1, 0.3, 0.6, 0.9, 1.2, 1.45})
        out.push_back(mix_homo_lumo(base, angle));
    out.push_back(mix_all_pairs(mix_homo_lumo(base, 0.7), 0.4));
    return out;
}

SlaterDeterminant core_guess(const IntegralSet& ints, const SystemSpec& spec) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ints.h);
    return {es.eigenvectors().leftCols(spec.n_alpha),
            es.eigenvectors().leftCols(spec.n_beta)};
}

} // namespace

CUHFSolution uhf_ground(const IntegralSet& ints, const SystemSpec& spec,
                        const ScfOptions& opts) {
    const SlaterDeterminant base = core_guess(ints, spec);
    CUHFSolution best;
    bool have = false;
    int calls = 0, iters = 0;
    for (const auto& seed : seed_ladder(base)) {
        CUHFSolution sol = uhf_scf(ints, spec, 0.0, seed, opts);
        ++calls;
        iters += sol.iterations;
        if (!sol.converged)
            continue;
        if (!have || sol.energy < best.energy) {
            best = sol;
            have = true;
        }
    }
    if (!have)
        throw ConvergenceError("uhf_ground: no seed converged");
    best.scf_calls = calls;
    best.iterations = iters;
    best.s2_target = best.s2_achieved;
    best.constraint_ok = true;
    return best;
}

CUHFSolution rhf_scf(const IntegralSet& ints, const SystemSpec& spec,
                     const ScfOptions& opts) {
    if (spec.n_alpha != spec.n_beta)
        throw DomainError("rhf_scf: closed shell requires n_alpha == n_beta");
    spec.validate();
    const int L = ints.n_orbitals();
    const int n = spec.n_alpha;

    auto run = [&](Eigen::MatrixXd c) -> CUHFSolution {
        CUHFSolution out;
        DiisState diis;
        diis.depth = opts.diis_depth;
        std::vector<Eigen::VectorXd> errs;
        double e_old = 0.0;
        double best_err = 1e300;
        int since_improvement = 0;
        bool shifted = false;
        int it = 0;
        for (; it < opts.max_iter; ++it) {
            const Eigen::MatrixXd p = c.leftCols(n) * c.leftCols(n).transpose();
            Eigen::MatrixXd f = ints.h + 2.0 * coulomb(ints.v, p) - exchange(ints.v, p);
            const double energy = (p.cwiseProduct(ints.h + f)).sum() + ints.core_energy;
            if (!std::isfinite(energy))
                throw ConvergenceError("rhf_scf: non-finite energy");
            const Eigen::MatrixXd e = f * p - p * f;
            Eigen::VectorXd err = Eigen::Map<const Eigen::VectorXd>(e.data(), L * L);
            const double err_max = err.cwiseAbs().maxCoeff();
            if (opts.log)
                opts.log({it, energy, err_max, 0.0});
            if (it > 0 && std::abs(energy - e_old) < opts.energy_tol
                && err_max < opts.diis_tol) {
                out.converged = true;
                out.energy = energy;
                break;
            }
            e_old = energy;
            out.energy = energy;
            if (err_max < best_err - 1e-12) {
                best_err = err_max;
                since_improvement = 0;
            } else if (++since_improvement > opts.stagnation_window) {
                shifted = true;
            }
            diis.push(f, f, err);
            Eigen::MatrixXd f_unused = f;
            diis.extrapolate(f, f_unused);
            if (shifted && opts.level_shift > 0.0)
                f += opts.level_shift * (Eigen::MatrixXd::Identity(L, L) - p);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f);
            c = es.eigenvectors();
        }
        out.iterations = it;
        Eigen::MatrixXd occ = c.leftCols(n);
        fix_phases(occ);
        out.determinant = {occ, occ};
        out.g_occ = occ_overlap(out.determinant);
        out.s2_achieved = 0.0;
        out.constraint_ok = true;
        return out;
    };

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ints.h);
    const Eigen::MatrixXd c0 = es.eigenvectors();
    std::vector<Eigen::MatrixXd> seeds{c0};
    // rotated seeds reach the lower closed-shell solution when the aufbau
    // choice is degenerate (square H4, atomic p shells)
    for (int v = n; v < std::min(L, n + 3); ++v)
        for (double angle : {0.25 * M_PI, 0.15})
            seeds.push_back(rotate_cols(c0, n - 1, v, angle));
    if (n >= 2)
        seeds.push_back(rotate_cols(rotate_cols(c0, n - 1, n, 0.25 * M_PI),
                                    n - 2, std::min(n + 1, L - 1), 0.25 * M_PI));

    CUHFSolution best;
    bool have = false;
    int calls = 0;
    for (const auto& seed : seeds) {
        CUHFSolution sol = run(seed);
        ++calls;
        if (!sol.converged)
            continue;
        if (!have || sol.energy < best.energy) {
            best = sol;
            have = true;
        }
    }
    if (!have)
        throw ConvergenceError("rhf_scf: no seed converged");
    best.scf_calls = calls;
    return best;
}

namespace {

struct TrackEval {
    double lambda;
    CUHFSolution sol;
};

class CuhfTracker {
  public:
    CuhfTracker(const IntegralSet& ints, const SystemSpec& spec, double target,
                const ScfOptions& opts)
        : ints_(ints), spec_(spec), target_(target), opts_(opts) {}

    CUHFSolution solve_at(double lambda, const SlaterDeterminant& fallback) {
        const SlaterDeterminant* guess = &fallback;
        double best_dist = 1e300;
        for (const auto& e : evals_) {
            const double d = std::abs(e.lambda - lambda);
            if (d < best_dist) {
                best_dist = d;
                guess = &e.sol.determinant;
            }
        }
        CUHFSolution sol = uhf_scf(ints_, spec_, lambda, *guess, opts_);
        ++calls_;
        iters_ += sol.iterations;
        if (target_ > 1e-8 && sol.s2_achieved < 1e-8 && lambda < 0.0) {
            // stuck on the spin-pure fixed point
            CUHFSolution kicked = uhf_scf(ints_, spec_, lambda,
                                          mix_homo_lumo(sol.determinant, 0.5), opts_);
            ++calls_;
            iters_ += kicked.iterations;
            if (kicked.s2_achieved > sol.s2_achieved || kicked.energy < sol.energy)
                sol = kicked;
        }
        evals_.push_back({lambda, sol});
        return sol;
    }

    // bracketed bisection on f(lambda) = s2(lambda) - target (f decreasing)
    CUHFSolution track(const SlaterDeterminant& seed, double lambda0) {
        evals_.clear();
        CUHFSolution r = solve_at(lambda0, seed);
        double f0 = r.s2_achieved - target_;
        if (std::abs(f0) < opts_.s2_tol)
            return finish(r);
        double lo, hi;
        if (f0 > 0) {
            lo = lambda0;
            hi = lambda0;
            double step = 0.25;
            while (true) {
                hi += step;
                step *= 2.0;
                const CUHFSolution rh = solve_at(hi, seed);
                if (rh.s2_achieved - target_ <= 0)
                    break;
                if (hi > opts_.lambda_max)
                    return finish(best_eval());
            }
        } else {
            hi = lambda0;
            lo = lambda0;
            double step = 0.25;
            while (true) {
                lo -= step;
                step *= 2.0;
                const CUHFSolution rl = solve_at(lo, seed);
                if (rl.s2_achieved - target_ >= 0)
                    break;
                if (lo < -opts_.lambda_max)
                    return finish(best_eval());
            }
        }
        for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
            const double mid = 0.5 * (lo + hi);
            const CUHFSolution rm = solve_at(mid, seed);
            const double f = rm.s2_achieved - target_;
            if (std::abs(f) < opts_.s2_tol)
                break;
            if (f > 0)
                lo = mid;
            else
                hi = mid;
        }
        return finish(best_eval());
    }

    int calls() const { return calls_; }
    int iters() const { return iters_; }

  private:
    CUHFSolution best_eval() const {
        const TrackEval* best = &evals_.front();
        for (const auto& e : evals_) {
            const double d = std::abs(e.sol.s2_achieved - target_);
            const double bd = std::abs(best->sol.s2_achieved - target_);
            if (d < bd - 1e-12
                || (d < bd + 1e-12 && e.sol.energy < best->sol.energy))
                best = &e;
        }
        return best->sol;
    }

    CUHFSolution finish(CUHFSolution s) const {
        s.s2_target = target_;
        s.constraint_ok = s.converged
                          && std::abs(s.s2_achieved - target_) <= opts_.s2_tol;
        return s;
    }

    const IntegralSet& ints_;
    const SystemSpec& spec_;
    double target_;
    ScfOptions opts_;
    std::vector<TrackEval> evals_;
    int calls_ = 0;
    int iters_ = 0;
};

} // namespace

CUHFSolution cuhf_solve(const IntegralSet& ints, const SystemSpec& spec,
                        double s2_target,
                        const std::optional<CUHFSolution>& warm,
                        const ScfOptions& opts) {
    if (s2_target < -1e-12 || s2_target > 0.5 * spec.n_electrons() + 1e-12)
        throw DomainError("cuhf_solve: s2_target outside [0, N/2]");

    SlaterDeterminant base;
    double lambda0 = 0.0;
    if (warm) {
        base = warm->determinant;
        lambda0 = warm->lambda;
    } else {
        base = core_guess(ints, spec);
    }

    std::vector<SlaterDeterminant> seeds{base};
    if (s2_target > 1e-10) {
        seeds.push_back(mix_homo_lumo(base, opts.mix_angle));
        seeds.push_back(mix_all_pairs(mix_homo_lumo(base, 0.7), 0.4));
        std::mt19937 rng(12345);
        std::normal_distribution<double> dist(0.0, 0.15);
        Eigen::MatrixXd kick = Eigen::MatrixXd::Identity(base.n_orbitals(),
                                                         base.n_orbitals());
        for (int i = 0; i < kick.rows(); ++i)
            for (int j = 0; j < kick.cols(); ++j)
                kick(i, j) += dist(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(kick);
        Eigen::MatrixXd q = qr.householderQ();
        SlaterDeterminant kicked = mix_homo_lumo(base, 0.7);
        kicked.c_up = q * kicked.c_up;
        seeds.push_back(kicked);
    }

    CuhfTracker tracker(ints, spec, s2_target, opts);
    CUHFSolution best;
    bool have = false;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CUHFSolution sol = tracker.track(seeds[i], lambda0);
        if (!have) {
            best = sol;
            have = true;
        } else {
            const double d = std::abs(sol.s2_achieved - s2_target);
            const double bd = std::abs(best.s2_achieved - s2_target);
            if ((sol.constraint_ok && !best.constraint_ok)
                || (sol.constraint_ok == best.constraint_ok
                    && (d < bd - 1e-10
                        || (sol.constraint_ok && sol.energy < best.energy - 1e-10))))
                best = sol;
        }
        // the first two seed passes catch lower branches; more adds little
        if (best.constraint_ok && i >= 1)
            break;
    }
    best.scf_calls = tracker.calls();
    best.iterations = tracker.iters();
    if (!best.constraint_ok) {
        if (!best.converged)
            throw ConvergenceError("cuhf_solve: inner SCF failed at target "
                                   + std::to_string(s2_target));
        throw InfeasibleError("cuhf_solve: target " + std::to_string(s2_target)
                              + " not reachable within |lambda| <= "
                              + std::to_string(opts.lambda_max)
                              + "; closest achieved <S^2> = "
                              + std::to_string(best.s2_achieved));
    }
    return best;
}

} // namespace spinproj
