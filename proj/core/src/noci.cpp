#include "spinproj/noci.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/SVD>

namespace spinproj {

namespace {

double orthogonal_det_sign(const Eigen::MatrixXd& m) {
    if (m.rows() == 0)
        return 1.0;
    return m.determinant() < 0.0 ? -1.0 : 1.0;
}

} // namespace

TransitionContext make_transition_context(const SlaterDeterminant& bra,
                                          const SlaterDeterminant& ket,
                                          double zero_threshold) {
    if (bra.n_up() != ket.n_up() || bra.n_down() != ket.n_down())
        throw DomainError("transition context: sector-size mismatch");
    TransitionContext ctx;
    ctx.zero_threshold = zero_threshold;
    ctx.n_up = bra.n_up();
    const int n = bra.n_electrons();
    ctx.singular_values.resize(n);
    ctx.sign = 1.0;
    auto pair_sector = [&](const Eigen::MatrixXd& b, const Eigen::MatrixXd& k,
                           Eigen::MatrixXd& b_rot, Eigen::MatrixXd& k_rot,
                           int offset) {
        const int m = static_cast<int>(b.cols());
        if (m == 0) {
            b_rot = b;
            k_rot = k;
            return;
        }
        Eigen::MatrixXd s = b.transpose() * k;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
        b_rot = b * svd.matrixU();
        k_rot = k * svd.matrixV();
        ctx.singular_values.segment(offset, m) = svd.singularValues();
        ctx.sign *= orthogonal_det_sign(svd.matrixU()) * orthogonal_det_sign(svd.matrixV());
    };
    pair_sector(bra.c_up, ket.c_up, ctx.bra_up, ctx.ket_up, 0);
    pair_sector(bra.c_down, ket.c_down, ctx.bra_down, ctx.ket_down, ctx.n_up);
    ctx.n_zeros = 0;
    ctx.reduced_overlap = 1.0;
    for (int i = 0; i < n; ++i) {
        if (ctx.singular_values(i) < zero_threshold)
            ++ctx.n_zeros;
        else
            ctx.reduced_overlap *= ctx.singular_values(i);
    }
    return ctx;
}

double overlap_element(const SlaterDeterminant& bra, const SlaterDeterminant& ket) {
    if (bra.n_up() != ket.n_up() || bra.n_down() != ket.n_down())
        throw DomainError("overlap_element: sector-size mismatch");
    double value = 1.0;
    if (bra.n_up() > 0)
        value *= (bra.c_up.transpose() * ket.c_up).determinant();
    if (bra.n_down() > 0)
        value *= (bra.c_down.transpose() * ket.c_down).determinant();
    return value;
}

namespace {

// W(c,e,d,f) = sum_pqrs V_pqrs B(p,c) K(q,e) B(r,d) K(s,f); B/K columns are
// the rotated bra/ket channel vectors (up sector first).
std::vector<double> channel_transform(const Tensor4& t, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& K) {
    const int L = t.L;
    const int n = static_cast<int>(B.cols());
    std::vector<double> t1(static_cast<std::size_t>(n) * L * L * L, 0.0);
    for (int p = 0; p < L; ++p)
        for (int c = 0; c < n; ++c) {
            const double w = B(p, c);
            if (w == 0.0)
                continue;
            const double* src = &t.data[static_cast<std::size_t>(p) * L * L * L];
            double* dst = &t1[static_cast<std::size_t>(c) * L * L * L];
            for (std::size_t x = 0; x < static_cast<std::size_t>(L) * L * L; ++x)
                dst[x] += w * src[x];
        }
    std::vector<double> t2(static_cast<std::size_t>(n) * n * L * L, 0.0);
    for (int c = 0; c < n; ++c)
        for (int q = 0; q < L; ++q)
            for (int e = 0; e < n; ++e) {
                const double w = K(q, e);
                if (w == 0.0)
                    continue;
                const double* src = &t1[(static_cast<std::size_t>(c) * L + q) * L * L];
                double* dst = &t2[(static_cast<std::size_t>(c) * n + e) * L * L];
                for (std::size_t x = 0; x < static_cast<std::size_t>(L) * L; ++x)
                    dst[x] += w * src[x];
            }
    std::vector<double> t3(static_cast<std::size_t>(n) * n * n * L, 0.0);
    for (std::size_t ce = 0; ce < static_cast<std::size_t>(n) * n; ++ce)
        for (int r = 0; r < L; ++r)
            for (int d = 0; d < n; ++d) {
                const double w = B(r, d);
                if (w == 0.0)
                    continue;
                const double* src = &t2[(ce * L + r) * L];
                double* dst = &t3[(ce * n + d) * L];
                for (int x = 0; x < L; ++x)
                    dst[x] += w * src[x];
            }
    std::vector<double> out(static_cast<std::size_t>(n) * n * n * n, 0.0);
    for (std::size_t ced = 0; ced < static_cast<std::size_t>(n) * n * n; ++ced)
        for (int s = 0; s < L; ++s) {
            const double w0 = t3[ced * L + s];
            if (w0 == 0.0)
                continue;
            for (int f = 0; f < n; ++f)
                out[ced * n + f] += w0 * K(s, f);
        }
    return out;
}

} // namespace

double transition_element(const TransitionContext& ctx, const SpinBlockedOperator& op) {
    const int n = static_cast<int>(ctx.singular_values.size());
    if (ctx.n_zeros >= 3)
        return 0.0;

    const auto& s = ctx.singular_values;
    const double thresh = ctx.zero_threshold;
    auto weight1 = [&](int c) {
        double w = 1.0;
        for (int l = 0; l < n; ++l) {
            if (l == c)
                continue;
            if (s(l) < thresh)
                return 0.0;
            w *= s(l);
        }
        return w;
    };
    auto weight2 = [&](int c, int d) {
        double w = 1.0;
        for (int l = 0; l < n; ++l) {
            if (l == c || l == d)
                continue;
            if (s(l) < thresh)
                return 0.0;
            w *= s(l);
        }
        return w;
    };

    const double overlap = ctx.overlap();
    double value = op.scalar * overlap;

    // concatenated channel vectors, up sector first
    const int L = static_cast<int>(ctx.bra_up.rows());
    Eigen::MatrixXd B(L, n), K(L, n);
    if (ctx.n_up > 0) {
        B.leftCols(ctx.n_up) = ctx.bra_up;
        K.leftCols(ctx.n_up) = ctx.ket_up;
    }
    if (n - ctx.n_up > 0) {
        B.rightCols(n - ctx.n_up) = ctx.bra_down;
        K.rightCols(n - ctx.n_up) = ctx.ket_down;
    }
    auto sector = [&](int c) { return c < ctx.n_up ? Spin::Up : Spin::Down; };

    if (ctx.n_zeros <= 1) {
        for (const auto& [key, h] : op.one_body) {
            if (key.first != key.second)
                continue; // Ms-changing blocks vanish for equal sector sizes
            for (int c = 0; c < n; ++c) {
                if (sector(c) != key.first)
                    continue;
                const double w = weight1(c);
                if (w == 0.0)
                    continue;
                value += ctx.sign * w * B.col(c).dot(h * K.col(c));
            }
        }
    }

    if (!op.two_body.empty()) {
        std::map<const Tensor4*, std::vector<double>> cache;
        for (const auto& [key, block] : op.two_body) {
            auto& w4 = cache[block.tensor.get()];
            if (w4.empty())
                w4 = channel_transform(*block.tensor, B, K);
        }
        auto W = [&](const Tensor4* t, int c, int e, int d, int f) {
            const auto& w4 = cache[t];
            return w4[((static_cast<std::size_t>(c) * n + e) * n + d) * n + f];
        };
        double two = 0.0;
        for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
                if (c == d)
                    continue;
                const double w = weight2(c, d);
                if (w == 0.0)
                    continue;
                double term = 0.0;
                for (const auto& [key, block] : op.two_body) {
                    const auto [sg, sgp, tu, tup] = key;
                    if (sg == sgp && tu == tup && sg == sector(c) && tu == sector(d))
                        term += block.coef * W(block.tensor.get(), c, c, d, d);
                    if (sg == sector(c) && tup == sector(c)
                        && tu == sector(d) && sgp == sector(d))
                        term -= block.coef * W(block.tensor.get(), c, d, d, c);
                }
                two += w * term;
            }
        value += 0.5 * ctx.sign * two;
    }
    return value;
}

double transition_element(const SlaterDeterminant& bra, const SlaterDeterminant& ket,
                          const SpinBlockedOperator& op) {
    return transition_element(make_transition_context(bra, ket), op);
}

Eigen::MatrixXd assemble_matrix(const std::vector<SlaterDeterminant>& dets,
                                const SpinBlockedOperator& op) {
    const int k = static_cast<int>(dets.size());
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            m(i, j) = transition_element(dets[i], dets[j], op);
    return m;
}

namespace {

Eigen::MatrixXd overlap_matrix(const std::vector<SlaterDeterminant>& dets) {
    const int k = static_cast<int>(dets.size());
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            m(i, j) = overlap_element(dets[i], dets[j]);
    return m;
}

void check_symmetric(const Eigen::MatrixXd& m, const char* name) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw ConsistencyError(std::string("solve_noci: ") + name
                               + " asymmetry " + std::to_string(asym));
}

// orthonormal basis of the span of every occupied column
Eigen::MatrixXd span_basis(const std::vector<SlaterDeterminant>& dets) {
    const int L = dets.front().n_orbitals();
    int total = 0;
    for (const auto& d : dets)
        total += d.n_electrons();
    Eigen::MatrixXd all(L, total);
    int col = 0;
    for (const auto& d : dets) {
        if (d.n_up() > 0)
            all.middleCols(col, d.n_up()) = d.c_up;
        col += d.n_up();
        if (d.n_down() > 0)
            all.middleCols(col, d.n_down()) = d.c_down;
        col += d.n_down();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(all, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-12 * sv(0))
            ++rank;
    return svd.matrixU().leftCols(rank);
}

} // namespace

NociSpectrum solve_noci(const NociBasis& basis, const IntegralSet& ints,
                        const NociOptions& opts) {
    if (basis.dets.empty())
        throw DomainError("solve_noci: empty basis");
    const int k = static_cast<int>(basis.dets.size());

    SpinBlockedOperator ham = hamiltonian_operator(ints);
    SpinBlockedOperator s2 = s2_operator(ints.n_orbitals());
    std::vector<SlaterDeterminant> dets = basis.dets;

    if (opts.project_to_span) {
        const Eigen::MatrixXd q = span_basis(dets);
        if (q.cols() < q.rows()) {
            ham = project_operator(ham, q);
            s2 = project_operator(s2, q);
            for (auto& d : dets) {
                d.c_up = q.transpose() * d.c_up;
                d.c_down = q.transpose() * d.c_down;
            }
        }
    }

    Eigen::MatrixXd s_mat = overlap_matrix(dets);
    Eigen::MatrixXd h_mat(k, k), s2_mat(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const auto ctx = make_transition_context(dets[i], dets[j],
                                                     opts.zero_threshold);
            h_mat(i, j) = transition_element(ctx, ham);
            s2_mat(i, j) = transition_element(ctx, s2);
        }
    check_symmetric(s_mat, "S");
    check_symmetric(h_mat, "H");
    s_mat = 0.5 * (s_mat + s_mat.transpose()).eval();
    h_mat = 0.5 * (h_mat + h_mat.transpose()).eval();
    s2_mat = 0.5 * (s2_mat + s2_mat.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_mat);
    const Eigen::VectorXd w = es.eigenvalues();
    const double w_max = w.maxCoeff();
    if (w_max <= 0.0)
        throw ConsistencyError("solve_noci: overlap matrix not positive");
    std::vector<int> keep;
    for (int i = 0; i < k; ++i)
        if (w(i) > opts.rank_tol * w_max)
            keep.push_back(i);
    if (keep.empty())
        throw ConsistencyError("solve_noci: degenerate basis, all overlap modes dropped");

    Eigen::MatrixXd x(k, static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        x.col(static_cast<int>(j)) =
            es.eigenvectors().col(keep[j]) / std::sqrt(w(keep[j]));

    Eigen::MatrixXd h_red = x.transpose() * h_mat * x;
    h_red = 0.5 * (h_red + h_red.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hes(h_red);

    NociSpectrum out;
    out.effective_rank = static_cast<int>(keep.size());
    out.dropped_modes = k - out.effective_rank;
    out.coefficients = x * hes.eigenvectors();
    fix_phases(out.coefficients);
    out.energies.assign(hes.eigenvalues().data(),
                        hes.eigenvalues().data() + hes.eigenvalues().size());
    out.s2_values.resize(out.energies.size());
    for (std::size_t i = 0; i < out.energies.size(); ++i) {
        const auto c = out.coefficients.col(static_cast<int>(i));
        out.s2_values[i] = c.dot(s2_mat * c);
        const double res = (h_mat * c - out.energies[i] * (s_mat * c)).norm() / c.norm();
        out.max_residual = std::max(out.max_residual, res);
    }
    out.overlap_matrix = s_mat;
    out.hamiltonian_matrix = h_mat;

    if (basis.seed_index >= 0 && basis.seed_index < k) {
        const double diag = h_mat(basis.seed_index, basis.seed_index)
                            / s_mat(basis.seed_index, basis.seed_index);
        if (out.energies.front() > diag + 1e-10)
            throw ConsistencyError("solve_noci: ground energy above the seed diagonal");
    }
    return out;
}

std::vector<SpinClassified> classify_states(const NociSpectrum& spectrum) {
    std::map<int, SpinClassified> lowest;
    for (std::size_t i = 0; i < spectrum.energies.size(); ++i) {
        const double s2 = spectrum.s2_values[i];
        int ell = static_cast<int>(std::lround(0.5 * (-1.0 + std::sqrt(std::max(0.0, 1.0 + 4.0 * s2)))));
        ell = std::max(ell, 0);
        // round may land one off for contaminated values; pick the minimizer
        auto dist = [&](int l) { return std::abs(s2 - l * (l + 1.0)); };
        for (int l : {ell - 1, ell + 1})
            if (l >= 0 && dist(l) < dist(ell))
                ell = l;
        SpinClassified c;
        c.ell = ell;
        c.energy = spectrum.energies[i];
        c.s2 = s2;
        c.state_index = static_cast<int>(i);
        c.contaminated = dist(ell) > 1e-3;
        auto it = lowest.find(ell);
        if (it == lowest.end() || c.energy < it->second.energy)
            lowest[ell] = c;
    }
    std::vector<SpinClassified> out;
    for (const auto& [ell, c] : lowest)
        out.push_back(c);
    return out;
}

} // namespace spinproj
