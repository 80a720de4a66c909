#include "spinproj/recoupling.hpp"

#include <cmath>

#include "spinproj/types.hpp"

namespace spinproj {

namespace {

bool half_integral(double x) {
    return std::abs(2.0 * x - std::lround(2.0 * x)) < 1e-9;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

} // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double J, double M) {
    for (double x : {j1, m1, j2, m2, J, M})
        if (!half_integral(x))
            throw DomainError("clebsch_gordan: arguments must be half-integer valued");
    // doubled-integer representation
    const int tj1 = static_cast<int>(std::lround(2 * j1));
    const int tm1 = static_cast<int>(std::lround(2 * m1));
    const int tj2 = static_cast<int>(std::lround(2 * j2));
    const int tm2 = static_cast<int>(std::lround(2 * m2));
    const int tJ = static_cast<int>(std::lround(2 * J));
    const int tM = static_cast<int>(std::lround(2 * M));
    if (tj1 < 0 || tj2 < 0 || tJ < 0)
        throw DomainError("clebsch_gordan: negative angular momentum");
    if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tJ + tM) % 2)
        return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ)
        return 0.0;
    if (tm1 + tm2 != tM)
        return 0.0;
    if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2)
        return 0.0;
    if ((tj1 + tj2 + tJ) % 2)
        return 0.0;

    // Racah's formula, all arguments guaranteed integral here
    auto f = [](int doubled) { return factorial(doubled / 2); };
    const double prefactor =
        std::sqrt((tJ + 1.0)
                  * f(tj1 + tj2 - tJ) * f(tj1 - tj2 + tJ) * f(-tj1 + tj2 + tJ)
                  / f(tj1 + tj2 + tJ + 2))
        * std::sqrt(f(tj1 + tm1) * f(tj1 - tm1) * f(tj2 + tm2) * f(tj2 - tm2)
                    * f(tJ + tM) * f(tJ - tM));
    const int k_lo = std::max({0, (tj2 - tJ - tm1) / 2, (tj1 - tJ + tm2) / 2});
    const int k_hi = std::min({(tj1 + tj2 - tJ) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
    double sum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double denom = factorial(k)
            * f(tj1 + tj2 - tJ - 2 * k) * f(tj1 - tm1 - 2 * k)
            * f(tj2 + tm2 - 2 * k) * f(tJ - tj2 + tm1 + 2 * k)
            * f(tJ - tj1 - tm2 + 2 * k);
        sum += (k % 2 ? -1.0 : 1.0) / denom;
    }
    return prefactor * sum;
}

Eigen::Matrix<double, 6, 6> recoupling_matrix_4e() {
    const double s3 = std::sqrt(3.0), s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
    Eigen::Matrix<double, 6, 6> u;
    u << 0.0, 0.5, -0.5, -0.5, 0.5, 0.0,
        s3 / 3, -s3 / 6, -s3 / 6, -s3 / 6, -s3 / 6, s3 / 3,
        0.0, 0.5, -0.5, 0.5, -0.5, 0.0,
        0.0, 0.5, 0.5, -0.5, -0.5, 0.0,
        s2 / 2, 0.0, 0.0, 0.0, 0.0, -s2 / 2,
        s6 / 6, s6 / 6, s6 / 6, s6 / 6, s6 / 6, s6 / 6;
    return u;
}

Eigen::Matrix<double, 6, 6> recoupling_matrix_4e_from_cg() {
    // recoupled rows |(S01 S23) S, M=0>; uncoupled columns are the six
    // M_s = 0 spin patterns of four electrons in orbital-ascending order
    const std::array<std::array<double, 3>, 6> rows = {{
        {0, 0, 0}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}, {1, 1, 2}}};
    const std::array<std::array<int, 4>, 6> cols = {{
        {1, 1, -1, -1}, {1, -1, 1, -1}, {-1, 1, 1, -1},
        {1, -1, -1, 1}, {-1, 1, -1, 1}, {-1, -1, 1, 1}}};
    Eigen::Matrix<double, 6, 6> u;
    for (int r = 0; r < 6; ++r) {
        const double s01 = rows[r][0], s23 = rows[r][1], s = rows[r][2];
        for (int c = 0; c < 6; ++c) {
            const double m0 = cols[c][0] * 0.5, m1 = cols[c][1] * 0.5;
            const double m2 = cols[c][2] * 0.5, m3 = cols[c][3] * 0.5;
            u(r, c) = clebsch_gordan(0.5, m0, 0.5, m1, s01, m0 + m1)
                      * clebsch_gordan(0.5, m2, 0.5, m3, s23, m2 + m3)
                      * clebsch_gordan(s01, m0 + m1, s23, m2 + m3, s, 0.0);
        }
    }
    return u;
}

Eigen::Matrix<double, 6, 6> analytic_overlap_4e(const OverlapInputs4e& g) {
    const double f1 = (1 - g.g01 * g.g01) * (1 - g.g23 * g.g23);
    const double f2 = (1 - g.g03 * g.g03) * (1 - g.g21 * g.g21);
    const double f3 = g.g01 * g.g23;
    const double f4 = g.g03 * g.g21;
    const double a01 = g.g01 * g.g01, a23 = g.g23 * g.g23;
    const double a03 = g.g03 * g.g03, a21 = g.g21 * g.g21;
    Eigen::Matrix<double, 6, 6> m;
    m << f1, -a21, -f3 * f4, -f3 * f4, -a03, f4 * f4,
        -a21, 1.0, -a01, -a23, (f3 - f4) * (f3 - f4), -a03,
        -f3 * f4, -a01, f2, f3 * f3, -a23, -f3 * f4,
        -f3 * f4, -a23, f3 * f3, f2, -a01, -f3 * f4,
        -a03, (f3 - f4) * (f3 - f4), -a23, -a01, 1.0, -a21,
        f4 * f4, -a03, -f3 * f4, -f3 * f4, -a21, f1;
    return m;
}

Eigen::Matrix2d analytic_block_s0(const OverlapInputs4e& g) {
    const double f3 = g.g01 * g.g23, f4 = g.g03 * g.g21;
    const double a01 = g.g01 * g.g01, a23 = g.g23 * g.g23;
    const double a03 = g.g03 * g.g03, a21 = g.g21 * g.g21;
    Eigen::Matrix2d m;
    m(0, 0) = 1 + a01 + a23 - 0.5 * a03 - 0.5 * a21 + f3 * f3 - f3 * f4 + f4 * f4;
    m(0, 1) = m(1, 0) = -0.5 * std::sqrt(3.0) * (a03 + a21 - 2 * f3 * f4);
    m(1, 1) = 1 - a01 - a23 + 0.5 * a03 + 0.5 * a21 + f3 * f3 + f3 * f4 + f4 * f4;
    return m;
}

Eigen::Matrix3d analytic_block_s1(const OverlapInputs4e& g) {
    const double f3 = g.g01 * g.g23, f4 = g.g03 * g.g21;
    const double a01 = g.g01 * g.g01, a23 = g.g23 * g.g23;
    const double a03 = g.g03 * g.g03, a21 = g.g21 * g.g21;
    Eigen::Matrix3d m;
    m(0, 0) = 1 + a01 - a23 - 0.5 * a03 - 0.5 * a21 - f3 * f3 + f3 * f4;
    m(0, 1) = m(1, 0) = 0.5 * a03 + 0.5 * a21 + f3 * f4 - f4 * f4;
    // the printed 22 entry drops a square on G21; the squared form is the
    // one reproduced by U_R M U_R^T
    m(1, 1) = 1 - a01 + a23 - 0.5 * a03 - 0.5 * a21 - f3 * f3 + f3 * f4;
    m(0, 2) = m(2, 0) = m(1, 2) = m(2, 1) = 0.5 * std::sqrt(2.0) * (a03 - a21);
    m(2, 2) = 1 - a01 - a23 + f3 * f3 - f4 * f4;
    return m;
}

double analytic_block_s2(const OverlapInputs4e& g) {
    const double f3 = g.g01 * g.g23, f4 = g.g03 * g.g21;
    return 1 - g.g01 * g.g01 - g.g23 * g.g23 - g.g03 * g.g03 - g.g21 * g.g21
           + (f3 - f4) * (f3 - f4);
}

RecoupledBlocks verify_block_diagonal(const OverlapInputs4e& g) {
    const auto u = recoupling_matrix_4e();
    const Eigen::Matrix<double, 6, 6> b = u * analytic_overlap_4e(g) * u.transpose();
    RecoupledBlocks out;
    out.m0 = b.block<2, 2>(0, 0);
    out.m1 = b.block<3, 3>(2, 2);
    out.m2 = b(5, 5);
    double off2 = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const bool in_block = (i < 2 && j < 2) || (i >= 2 && i < 5 && j >= 2 && j < 5)
                                  || (i == 5 && j == 5);
            if (!in_block)
                off2 += b(i, j) * b(i, j);
        }
    out.offblock_norm = std::sqrt(off2);
    const double err = std::max(
        {(out.m0 - analytic_block_s0(g)).cwiseAbs().maxCoeff(),
         (out.m1 - analytic_block_s1(g)).cwiseAbs().maxCoeff(),
         std::abs(out.m2 - analytic_block_s2(g))});
    if (err > 1e-12)
        throw ConsistencyError("verify_block_diagonal: closed-form block mismatch "
                               + std::to_string(err));
    return out;
}

double appendix_phase(std::uint32_t mask, int n_electrons) {
    // inversions between down-assigned and later up-assigned orbitals when
    // rearranging the orbital-ordered operator string into sector-blocked form
    int inversions = 0;
    for (int i = 0; i < n_electrons; ++i)
        for (int j = i + 1; j < n_electrons; ++j)
            if (!(mask >> i & 1u) && (mask >> j & 1u))
                ++inversions;
    return inversions % 2 ? -1.0 : 1.0;
}

bool realizable_4e(const OverlapInputs4e& g) {
    const double r1 = 1.0 - g.g01 * g.g01 - g.g21 * g.g21;
    const double r3 = 1.0 - g.g03 * g.g03 - g.g23 * g.g23;
    if (r1 < 0.0 || r3 < 0.0)
        return false;
    const double cross = g.g01 * g.g03 + g.g21 * g.g23;
    return cross * cross <= r1 * r3;
}

SlaterDeterminant synthetic_seed_4e(const OverlapInputs4e& g, int n_orbitals) {
    if (n_orbitals < 4)
        throw DomainError("synthetic_seed_4e: need at least 4 orbitals");
    if (!realizable_4e(g))
        throw DomainError("synthetic_seed_4e: overlaps not realizable with orthonormal sectors");
    const int L = n_orbitals;
    Eigen::MatrixXd up = Eigen::MatrixXd::Zero(L, 2);
    up(0, 0) = 1.0; // orbital 0
    up(1, 1) = 1.0; // orbital 2
    Eigen::MatrixXd down = Eigen::MatrixXd::Zero(L, 2);
    // orbital 1
    down(0, 0) = g.g01;
    down(1, 0) = g.g21;
    const double n1 = std::sqrt(std::max(0.0, 1.0 - g.g01 * g.g01 - g.g21 * g.g21));
    down(2, 0) = n1;
    // orbital 3: fix <1|3> = 0
    down(0, 1) = g.g03;
    down(1, 1) = g.g23;
    const double cross = g.g01 * g.g03 + g.g21 * g.g23;
    double t2 = 1.0 - g.g03 * g.g03 - g.g23 * g.g23;
    if (n1 > 1e-14) {
        down(2, 1) = -cross / n1;
        t2 -= down(2, 1) * down(2, 1);
    } else if (std::abs(cross) > 1e-12) {
        throw DomainError("synthetic_seed_4e: degenerate residual with nonzero cross overlap");
    }
    down(3, 1) = std::sqrt(std::max(0.0, t2));
    return {up, down};
}

OverlapInputs4e sample_realizable_4e(std::mt19937& rng, double range) {
    std::uniform_real_distribution<double> dist(-range, range);
    for (int tries = 0; tries < 100000; ++tries) {
        OverlapInputs4e g{dist(rng), dist(rng), dist(rng), dist(rng)};
        if (realizable_4e(g))
            return g;
    }
    throw ConsistencyError("sample_realizable_4e: rejection sampling failed");
}

} // namespace spinproj
