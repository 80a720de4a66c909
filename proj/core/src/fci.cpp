#include "spinproj/fci.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "spinproj/projection.hpp"

namespace spinproj {

namespace {

std::vector<std::uint64_t> combinations(int n, int k) {
    std::vector<std::uint64_t> out;
    if (k < 0 || k > n)
        return out;
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    std::uint64_t mask = (1ull << k) - 1;
    const std::uint64_t limit = 1ull << n;
    while (mask < limit) {
        out.push_back(mask);
        // Gosper's hack: next subset with the same popcount
        const std::uint64_t c = mask & -mask;
        const std::uint64_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
        if (c == 0)
            break;
    }
    return out;
}

inline int popcount_below(std::uint64_t mask, int pos) {
    return std::popcount(mask & ((1ull << pos) - 1));
}

// phase for i -> a within one spin string (endpoints excluded)
inline double excitation_phase(std::uint64_t mask, int i, int a) {
    const int lo = std::min(i, a), hi = std::max(i, a);
    const std::uint64_t between = ((1ull << hi) - 1) & ~((1ull << (lo + 1)) - 1);
    return std::popcount(mask & between) % 2 ? -1.0 : 1.0;
}

std::vector<int> occupied(std::uint64_t mask, int L) {
    std::vector<int> out;
    for (int p = 0; p < L; ++p)
        if (mask >> p & 1ull)
            out.push_back(p);
    return out;
}

} // namespace

std::vector<DetString> enumerate_dets(const SystemSpec& spec, std::size_t cap) {
    spec.validate();
    if (spec.n_orbitals > 62)
        throw SizeCapError("enumerate_dets: more than 62 orbitals unsupported");
    const auto na = binomial(spec.n_orbitals, spec.n_alpha);
    const auto nb = binomial(spec.n_orbitals, spec.n_beta);
    const auto total = static_cast<std::size_t>(na) * static_cast<std::size_t>(nb);
    if (total > cap)
        throw SizeCapError("enumerate_dets: " + std::to_string(total)
                           + " determinants exceed the cap of " + std::to_string(cap));
    const auto alphas = combinations(spec.n_orbitals, spec.n_alpha);
    const auto betas = combinations(spec.n_orbitals, spec.n_beta);
    std::vector<DetString> out;
    out.reserve(total);
    for (const auto a : alphas)
        for (const auto b : betas)
            out.push_back({a, b});
    return out;
}

namespace {

struct DetIndex {
    std::unordered_map<std::uint64_t, int> alpha, beta;
    int n_beta_strings = 0;

    explicit DetIndex(const std::vector<DetString>& dets) {
        std::vector<std::uint64_t> as, bs;
        for (const auto& d : dets) {
            if (alpha.emplace(d.alpha, 0).second)
                as.push_back(d.alpha);
            if (beta.emplace(d.beta, 0).second)
                bs.push_back(d.beta);
        }
        std::sort(as.begin(), as.end());
        std::sort(bs.begin(), bs.end());
        for (std::size_t i = 0; i < as.size(); ++i)
            alpha[as[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < bs.size(); ++i)
            beta[bs[i]] = static_cast<int>(i);
        n_beta_strings = static_cast<int>(bs.size());
    }

    int find(const DetString& d) const {
        auto ia = alpha.find(d.alpha);
        auto ib = beta.find(d.beta);
        if (ia == alpha.end() || ib == beta.end())
            return -1;
        return ia->second * n_beta_strings + ib->second;
    }
};

// combined-mask creation/annihilation with fermionic phase; alpha positions
// come first, beta positions are offset by L
struct OpString {
    std::uint64_t a, b;
    int L;
    double sign = 1.0;
    bool dead = false;

    int phase_count(int pos, bool is_beta) const {
        if (!is_beta)
            return popcount_below(a, pos);
        return std::popcount(a) + popcount_below(b, pos);
    }
    void annihilate(int p, Spin s) {
        if (dead)
            return;
        std::uint64_t& m = (s == Spin::Up) ? a : b;
        if (!(m >> p & 1ull)) {
            dead = true;
            return;
        }
        if (phase_count(p, s == Spin::Down) % 2)
            sign = -sign;
        m &= ~(1ull << p);
    }
    void create(int p, Spin s) {
        if (dead)
            return;
        std::uint64_t& m = (s == Spin::Up) ? a : b;
        if (m >> p & 1ull) {
            dead = true;
            return;
        }
        if (phase_count(p, s == Spin::Down) % 2)
            sign = -sign;
        m |= 1ull << p;
    }
};

} // namespace

Eigen::VectorXd apply_operator(const std::vector<DetString>& dets,
                               const SpinBlockedOperator& op,
                               const Eigen::VectorXd& vec) {
    const int L = op.n_orbitals;
    const DetIndex index(dets);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(vec.size());
    if (op.scalar != 0.0)
        out += op.scalar * vec;
    for (std::size_t idet = 0; idet < dets.size(); ++idet) {
        const double c = vec(static_cast<Eigen::Index>(idet));
        if (c == 0.0)
            continue;
        const DetString& d = dets[idet];
        const auto occ_a = occupied(d.alpha, L);
        const auto occ_b = occupied(d.beta, L);
        for (const auto& [key, h] : op.one_body) {
            const auto [s, t] = key;
            const auto& occ_t = (t == Spin::Up) ? occ_a : occ_b;
            for (int q : occ_t) {
                OpString base{d.alpha, d.beta, L};
                base.annihilate(q, t);
                for (int p = 0; p < L; ++p) {
                    if (h(p, q) == 0.0)
                        continue;
                    OpString w = base;
                    w.create(p, s);
                    if (w.dead)
                        continue;
                    const int j = index.find({w.a, w.b});
                    if (j >= 0)
                        out(j) += h(p, q) * w.sign * c;
                }
            }
        }
        for (const auto& [key, block] : op.two_body) {
            const auto [s, sp, t, tp] = key;
            const Tensor4& v = *block.tensor;
            const auto& occ_sp = (sp == Spin::Up) ? occ_a : occ_b;
            for (int q : occ_sp) {
                OpString w1{d.alpha, d.beta, L};
                w1.annihilate(q, sp);
                for (int sidx = 0; sidx < L; ++sidx) {
                    OpString w2 = w1;
                    w2.annihilate(sidx, tp);
                    if (w2.dead)
                        continue;
                    for (int r = 0; r < L; ++r) {
                        OpString w3 = w2;
                        w3.create(r, t);
                        if (w3.dead)
                            continue;
                        for (int p = 0; p < L; ++p) {
                            const double val = v(p, q, r, sidx);
                            if (val == 0.0)
                                continue;
                            OpString w4 = w3;
                            w4.create(p, s);
                            if (w4.dead)
                                continue;
                            const int j = index.find({w4.a, w4.b});
                            if (j >= 0)
                                out(j) += 0.5 * block.coef * val * w4.sign * c;
                        }
                    }
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXd operator_matrix(const std::vector<DetString>& dets,
                                const SpinBlockedOperator& op) {
    const auto n = static_cast<Eigen::Index>(dets.size());
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e(j) = 1.0;
        m.col(j) = apply_operator(dets, op, e);
        e(j) = 0.0;
    }
    return m;
}

Eigen::VectorXd expand_determinant(const SlaterDeterminant& det,
                                   const std::vector<DetString>& dets) {
    const int L = det.n_orbitals();
    Eigen::VectorXd out(static_cast<Eigen::Index>(dets.size()));
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto rows_a = occupied(dets[i].alpha, L);
        const auto rows_b = occupied(dets[i].beta, L);
        if (static_cast<int>(rows_a.size()) != det.n_up()
            || static_cast<int>(rows_b.size()) != det.n_down()) {
            out(static_cast<Eigen::Index>(i)) = 0.0;
            continue;
        }
        double value = 1.0;
        if (!rows_a.empty()) {
            Eigen::MatrixXd minor(rows_a.size(), rows_a.size());
            for (std::size_t r = 0; r < rows_a.size(); ++r)
                minor.row(static_cast<Eigen::Index>(r)) = det.c_up.row(rows_a[r]);
            value *= minor.determinant();
        }
        if (!rows_b.empty()) {
            Eigen::MatrixXd minor(rows_b.size(), rows_b.size());
            for (std::size_t r = 0; r < rows_b.size(); ++r)
                minor.row(static_cast<Eigen::Index>(r)) = det.c_down.row(rows_b[r]);
            value *= minor.determinant();
        }
        out(static_cast<Eigen::Index>(i)) = value;
    }
    return out;
}

double brute_force_transition(const SlaterDeterminant& bra,
                              const SlaterDeterminant& ket,
                              const SpinBlockedOperator& op) {
    const int L = bra.n_orbitals();
    if (L > 6 || bra.n_electrons() > 4)
        throw SizeCapError("brute_force_transition: guarded to L <= 6, N <= 4");
    if (bra.n_up() != ket.n_up() || bra.n_down() != ket.n_down())
        throw DomainError("brute_force_transition: sector-size mismatch");
    SystemSpec spec;
    spec.n_orbitals = L;
    spec.n_alpha = bra.n_up();
    spec.n_beta = bra.n_down();
    spec.ms2 = spec.n_alpha - spec.n_beta;
    const auto dets = enumerate_dets(spec);
    const Eigen::VectorXd vb = expand_determinant(bra, dets);
    const Eigen::VectorXd vk = expand_determinant(ket, dets);
    return vb.dot(apply_operator(dets, op, vk));
}

// ---------------------------------------------------------------------------
// Slater-Condon Hamiltonian
// ---------------------------------------------------------------------------

namespace {

class SlaterCondon {
  public:
    SlaterCondon(const SystemSpec& spec, const IntegralSet& ints)
        : L_(ints.n_orbitals()), h_(ints.h), v_(ints.v), core_(ints.core_energy) {
        (void)spec;
    }

    double diagonal(const DetString& d) const {
        const auto oa = occupied(d.alpha, L_);
        const auto ob = occupied(d.beta, L_);
        double e = core_;
        for (int p : oa)
            e += h_(p, p);
        for (int p : ob)
            e += h_(p, p);
        for (int p : oa)
            for (int q : oa)
                e += 0.5 * (v_.get(p, p, q, q) - v_.get(p, q, p, q));
        for (int p : ob)
            for (int q : ob)
                e += 0.5 * (v_.get(p, p, q, q) - v_.get(p, q, p, q));
        for (int p : oa)
            for (int q : ob)
                e += v_.get(p, p, q, q);
        return e;
    }

    // <D1|H|D2>; zero unless they differ by at most a double excitation
    double element(const DetString& d1, const DetString& d2) const {
        const int da = std::popcount(d1.alpha ^ d2.alpha) / 2;
        const int db = std::popcount(d1.beta ^ d2.beta) / 2;
        const int degree = da + db;
        if (degree > 2)
            return 0.0;
        if (degree == 0)
            return diagonal(d1);
        if (degree == 1) {
            const bool in_alpha = da == 1;
            const std::uint64_t m1 = in_alpha ? d1.alpha : d1.beta;
            const std::uint64_t m2 = in_alpha ? d2.alpha : d2.beta;
            const int i = std::countr_zero(m1 & ~m2);
            const int a = std::countr_zero(m2 & ~m1);
            double val = h_(i, a);
            const auto oa = occupied(d1.alpha, L_);
            const auto ob = occupied(d1.beta, L_);
            const auto& same = in_alpha ? oa : ob;
            const auto& other = in_alpha ? ob : oa;
            for (int k : same)
                val += v_.get(i, a, k, k) - v_.get(i, k, k, a);
            for (int k : other)
                val += v_.get(i, a, k, k);
            return excitation_phase(m1, i, a) * val;
        }
        if (da == 1 && db == 1) {
            const int i = std::countr_zero(d1.alpha & ~d2.alpha);
            const int a = std::countr_zero(d2.alpha & ~d1.alpha);
            const int j = std::countr_zero(d1.beta & ~d2.beta);
            const int b = std::countr_zero(d2.beta & ~d1.beta);
            return excitation_phase(d1.alpha, i, a) * excitation_phase(d1.beta, j, b)
                   * v_.get(i, a, j, b);
        }
        // same-spin double
        const bool in_alpha = da == 2;
        const std::uint64_t m1 = in_alpha ? d1.alpha : d1.beta;
        const std::uint64_t m2 = in_alpha ? d2.alpha : d2.beta;
        std::uint64_t holes = m1 & ~m2, parts = m2 & ~m1;
        const int i = std::countr_zero(holes);
        holes &= holes - 1;
        const int j = std::countr_zero(holes);
        const int a = std::countr_zero(parts);
        parts &= parts - 1;
        const int b = std::countr_zero(parts);
        double phase = excitation_phase(m1, i, a);
        const std::uint64_t mid = (m1 & ~(1ull << i)) | (1ull << a);
        phase *= excitation_phase(mid, j, b);
        return phase * (v_.get(i, a, j, b) - v_.get(i, b, j, a));
    }

    // all connected elements from row determinant d, including the diagonal
    template <typename F>
    void row(const DetString& d, const DetIndex& index, F&& emit) const {
        const auto oa = occupied(d.alpha, L_);
        const auto ob = occupied(d.beta, L_);
        emit(index.find(d), diagonal(d));
        auto singles = [&](std::uint64_t ma, bool is_alpha) {
            const auto& occ = is_alpha ? oa : ob;
            for (int i : occ)
                for (int a = 0; a < L_; ++a) {
                    if (ma >> a & 1ull)
                        continue;
                    DetString d2 = d;
                    (is_alpha ? d2.alpha : d2.beta) ^= (1ull << i) | (1ull << a);
                    const int idx = index.find(d2);
                    if (idx >= 0)
                        emit(idx, element(d, d2));
                }
        };
        singles(d.alpha, true);
        singles(d.beta, false);
        // same-spin doubles
        auto doubles_same = [&](std::uint64_t ma, bool is_alpha) {
            const auto& occ = is_alpha ? oa : ob;
            for (std::size_t x = 0; x < occ.size(); ++x)
                for (std::size_t y = x + 1; y < occ.size(); ++y)
                    for (int a = 0; a < L_; ++a) {
                        if (ma >> a & 1ull)
                            continue;
                        for (int b = a + 1; b < L_; ++b) {
                            if (ma >> b & 1ull)
                                continue;
                            DetString d2 = d;
                            (is_alpha ? d2.alpha : d2.beta) ^=
                                (1ull << occ[x]) | (1ull << occ[y])
                                | (1ull << a) | (1ull << b);
                            const int idx = index.find(d2);
                            if (idx >= 0)
                                emit(idx, element(d, d2));
                        }
                    }
        };
        doubles_same(d.alpha, true);
        doubles_same(d.beta, false);
        // alpha-beta doubles
        for (int i : oa)
            for (int a = 0; a < L_; ++a) {
                if (d.alpha >> a & 1ull)
                    continue;
                for (int j : ob)
                    for (int b = 0; b < L_; ++b) {
                        if (d.beta >> b & 1ull)
                            continue;
                        DetString d2{d.alpha ^ ((1ull << i) | (1ull << a)),
                                     d.beta ^ ((1ull << j) | (1ull << b))};
                        const int idx = index.find(d2);
                        if (idx >= 0)
                            emit(idx, element(d, d2));
                    }
            }
    }

  private:
    int L_;
    Eigen::MatrixXd h_;
    TwoElectronIntegrals v_;
    double core_;
};

} // namespace

std::pair<std::vector<double>, Eigen::MatrixXd>
davidson(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
         const Eigen::VectorXd& diag, int n_states, const FciOptions& opts) {
    const Eigen::Index n = diag.size();
    n_states = std::min<int>(n_states, static_cast<int>(n));
    const int max_subspace = std::max(2 * n_states + 2,
                                      opts.davidson_max_subspace_factor * n_states);

    // start from the lowest-diagonal unit vectors
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return diag(a) < diag(b); });
    Eigen::MatrixXd basis(n, n_states);
    basis.setZero();
    for (int i = 0; i < n_states; ++i)
        basis(order[i], i) = 1.0;

    std::vector<Eigen::VectorXd> vs, hvs;
    for (int i = 0; i < n_states; ++i) {
        vs.push_back(basis.col(i));
        hvs.push_back(matvec(vs.back()));
    }

    Eigen::MatrixXd ritz;
    std::vector<double> theta(n_states, 0.0);
    for (int iter = 0; iter < opts.davidson_max_iter; ++iter) {
        const int m = static_cast<int>(vs.size());
        Eigen::MatrixXd hsub(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                hsub(i, j) = vs[i].dot(hvs[j]);
        hsub = 0.5 * (hsub + hsub.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hsub);

        ritz.resize(n, n_states);
        Eigen::MatrixXd hritz(n, n_states);
        for (int k = 0; k < n_states; ++k) {
            ritz.col(k).setZero();
            hritz.col(k).setZero();
            for (int i = 0; i < m; ++i) {
                ritz.col(k) += es.eigenvectors()(i, k) * vs[i];
                hritz.col(k) += es.eigenvectors()(i, k) * hvs[i];
            }
            theta[k] = es.eigenvalues()(k);
        }
        bool all_converged = true;
        std::vector<Eigen::VectorXd> new_dirs;
        for (int k = 0; k < n_states; ++k) {
            Eigen::VectorXd r = hritz.col(k) - theta[k] * ritz.col(k);
            if (r.norm() > opts.davidson_tol) {
                all_converged = false;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double denom = diag(i) - theta[k];
                    r(i) /= (std::abs(denom) > 1e-8) ? denom : 1e-8;
                }
                new_dirs.push_back(r);
            }
        }
        if (all_converged) {
            std::vector<double> ev(theta.begin(), theta.begin() + n_states);
            return {ev, ritz};
        }
        if (m + static_cast<int>(new_dirs.size()) > max_subspace) {
            // restart from the current Ritz vectors
            vs.clear();
            hvs.clear();
            for (int k = 0; k < n_states; ++k) {
                vs.push_back(ritz.col(k));
                hvs.push_back(matvec(vs.back()));
            }
        }
        for (auto& d : new_dirs) {
            for (const auto& v : vs)
                d -= v.dot(d) * v;
            for (const auto& v : vs)
                d -= v.dot(d) * v;
            const double nrm = d.norm();
            if (nrm < 1e-8)
                continue;
            d /= nrm;
            vs.push_back(d);
            hvs.push_back(matvec(d));
        }
    }
    throw ConvergenceError("davidson: not converged within "
                           + std::to_string(opts.davidson_max_iter)
                           + " iterations (residual tolerance "
                           + std::to_string(opts.davidson_tol) + ")");
}

FciResult solve_fci(const SystemSpec& spec, const IntegralSet& ints,
                    int n_states, const FciOptions& opts) {
    const auto dets = enumerate_dets(spec, opts.det_cap);
    const auto n = static_cast<Eigen::Index>(dets.size());
    const DetIndex index(dets);
    const SlaterCondon sc(spec, ints);
    n_states = std::min<int>(n_states, static_cast<int>(n));

    FciResult out;
    out.n_determinants = dets.size();

    if (dets.size() <= opts.dense_cap) {
        Eigen::MatrixXd h(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double e = sc.element(dets[i], dets[j]);
                h(i, j) = e;
                h(j, i) = e;
            }
        if (n <= 3000 || n_states >= n) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            out.energies.assign(es.eigenvalues().data(),
                                es.eigenvalues().data() + n_states);
            out.eigenvectors = es.eigenvectors().leftCols(n_states);
        } else {
            auto [ev, vec] = davidson(
                [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return h * x; },
                h.diagonal(), n_states, opts);
            out.energies = ev;
            out.eigenvectors = vec;
        }
    } else {
        Eigen::VectorXd diag(n);
        for (Eigen::Index i = 0; i < n; ++i)
            diag(i) = sc.diagonal(dets[i]);
        auto matvec = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i)
                sc.row(dets[i], index, [&](int j, double e) { y(i) += e * x(j); });
            return y;
        };
        auto [ev, vec] = davidson(matvec, diag, n_states, opts);
        out.energies = ev;
        out.eigenvectors = vec;
    }

    const SpinBlockedOperator s2 = s2_operator(ints.n_orbitals());
    out.s2_values.resize(out.energies.size());
    for (std::size_t k = 0; k < out.energies.size(); ++k) {
        const Eigen::VectorXd v = out.eigenvectors.col(static_cast<Eigen::Index>(k));
        out.s2_values[k] = v.dot(apply_operator(dets, s2, v));
    }
    return out;
}

} // namespace spinproj
