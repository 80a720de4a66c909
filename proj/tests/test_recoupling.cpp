#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "spinproj/noci.hpp"
#include "spinproj/projection.hpp"
#include "spinproj/recoupling.hpp"

using namespace spinproj;

TEST_CASE("clebsch-gordan reference values") {
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0)
          == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0)
          == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0)
          == doctest::Approx(-1.0 / std::sqrt(2.0)));
    // <1 0, 1 0 | 2 0> derived by ladder construction: sqrt(2/3)
    CHECK(clebsch_gordan(1, 0, 1, 0, 2, 0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(clebsch_gordan(1, 0, 1, 0, 1, 0) == doctest::Approx(0.0));
    // selection rules
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 0) == 0.0);
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 2, 1) == 0.0);
    CHECK_THROWS_AS(clebsch_gordan(0.3, 0.1, 0.5, 0.5, 1, 0), DomainError);
}

TEST_CASE("clebsch-gordan orthogonality over a j1 x j2 block") {
    // sum_{m1 m2} <j1 m1 j2 m2|J M><j1 m1 j2 m2|J' M'> = delta_JJ' delta_MM'
    const double j1 = 1.0, j2 = 0.5;
    for (double J = 0.5; J <= 1.5; J += 1.0)
        for (double Jp = 0.5; Jp <= 1.5; Jp += 1.0)
            for (double M = -J; M <= J; M += 1.0)
                for (double Mp = -Jp; Mp <= Jp; Mp += 1.0) {
                    double sum = 0.0;
                    for (double m1 = -j1; m1 <= j1; m1 += 1.0)
                        for (double m2 = -j2; m2 <= j2; m2 += 1.0)
                            sum += clebsch_gordan(j1, m1, j2, m2, J, M)
                                   * clebsch_gordan(j1, m1, j2, m2, Jp, Mp);
                    const double expect = (J == Jp && M == Mp) ? 1.0 : 0.0;
                    CHECK(sum == doctest::Approx(expect).epsilon(1e-12));
                }
}

TEST_CASE("recoupling matrix rows match the printed entries") {
    const auto u = recoupling_matrix_4e();
    const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
    CHECK(u(4, 0) == doctest::Approx(s2 / 2));
    CHECK(u(4, 5) == doctest::Approx(-s2 / 2));
    for (int c = 1; c < 5; ++c)
        CHECK(u(4, c) == 0.0);
    for (int c = 0; c < 6; ++c)
        CHECK(u(5, c) == doctest::Approx(s6 / 6));
    // orthogonality
    CHECK((u * u.transpose() - Eigen::Matrix<double, 6, 6>::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
}

TEST_CASE("recoupling matrix is reproduced by CG products") {
    const auto u = recoupling_matrix_4e();
    const auto ucg = recoupling_matrix_4e_from_cg();
    CHECK((u - ucg).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic overlap limits") {
    SUBCASE("all overlaps zero gives the unit matrix") {
        const auto m = analytic_overlap_4e({0, 0, 0, 0});
        CHECK((m - Eigen::Matrix<double, 6, 6>::Identity()).cwiseAbs().maxCoeff()
              == 0.0);
    }
    SUBCASE("one pair degenerate leaves two surviving blocks") {
        OverlapInputs4e g{1.0, 0.55, 0.0, 0.0};
        const auto b = verify_block_diagonal(g);
        CHECK(b.m0(0, 0) == doctest::Approx(2 + 2 * 0.55 * 0.55).epsilon(1e-14));
        CHECK(b.m1(0, 0) == doctest::Approx(2 - 2 * 0.55 * 0.55).epsilon(1e-14));
        CHECK(std::abs(b.m2) < 1e-14);
        CHECK(std::abs(b.m0(0, 1)) < 1e-14);
        CHECK(std::abs(b.m1(0, 1)) < 1e-14);
    }
    SUBCASE("both pairs degenerate leaves a single survivor") {
        OverlapInputs4e g{1.0, 1.0, 0.0, 0.0};
        const auto b = verify_block_diagonal(g);
        CHECK(b.m0(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(b.m1.cwiseAbs().maxCoeff() < 1e-14);
        CHECK(std::abs(b.m2) < 1e-14);
    }
}

TEST_CASE("block diagonalization for random overlaps") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-0.9, 0.9);
    for (int trial = 0; trial < 200; ++trial) {
        OverlapInputs4e g{dist(rng), dist(rng), dist(rng), dist(rng)};
        const auto b = verify_block_diagonal(g);
        CHECK(b.offblock_norm < 1e-12);
    }
}

TEST_CASE("synthetic seeds realize the requested overlaps") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = sample_realizable_4e(rng);
        const auto det = synthetic_seed_4e(g);
        CHECK(det.is_orthonormal(1e-12));
        const Eigen::MatrixXd gm = occ_overlap(det);
        CHECK(gm(0, 0) == doctest::Approx(g.g01).epsilon(1e-12));
        CHECK(gm(1, 0) == doctest::Approx(g.g21).epsilon(1e-12));
        CHECK(gm(0, 1) == doctest::Approx(g.g03).epsilon(1e-12));
        CHECK(gm(1, 1) == doctest::Approx(g.g23).epsilon(1e-12));
    }
    CHECK_THROWS_AS(synthetic_seed_4e({0.9, 0.9, 0.9, 0.9}), DomainError);
}

TEST_CASE("noci overlap matrix reproduces the analytic appendix matrix") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = sample_realizable_4e(rng);
        const auto seed = synthetic_seed_4e(g);
        const auto assignments = enumerate_assignments(4);
        REQUIRE(assignments.size() == 6);
        // raw reassigned determinants in the appendix order with phases
        std::vector<SlaterDeterminant> dets;
        std::vector<double> phases;
        std::vector<Eigen::VectorXd> orbs;
        for (int i = 0; i < 4; ++i)
            orbs.push_back(i % 2 == 0 ? seed.c_up.col(i / 2) : seed.c_down.col(i / 2));
        for (const auto& a : assignments) {
            Eigen::MatrixXd up(4, 2), down(4, 2);
            int iu = 0, id = 0;
            for (int i = 0; i < 4; ++i) {
                if (a.mask >> i & 1u)
                    up.col(iu++) = orbs[i];
                else
                    down.col(id++) = orbs[i];
            }
            dets.push_back({up, down});
            phases.push_back(appendix_phase(a.mask, 4));
        }
        Eigen::Matrix<double, 6, 6> s;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                s(i, j) = phases[i] * phases[j] * overlap_element(dets[i], dets[j]);
        const auto m = analytic_overlap_4e(g);
        CHECK((s - m).cwiseAbs().maxCoeff() < 1e-12);
    }
}
