#include <doctest.h>

#include "helpers.hpp"
#include "spinproj/determinant.hpp"

using namespace spinproj;

TEST_CASE("s2 closed forms") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(4, 2);
    SUBCASE("closed shell is a pure singlet") {
        SlaterDeterminant det{c, c};
        CHECK(s2_expectation(det) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK((occ_overlap(det) - Eigen::MatrixXd::Identity(2, 2))
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
    SUBCASE("two up electrons give Ms(Ms+1) = 2") {
        SlaterDeterminant det{c, Eigen::MatrixXd(4, 0)};
        CHECK(s2_expectation(det) == doctest::Approx(2.0));
    }
    SUBCASE("open-shell orthogonal orbitals give 1") {
        Eigen::MatrixXd cu = Eigen::MatrixXd::Zero(4, 1), cd = cu;
        cu(0, 0) = 1.0;
        cd(1, 0) = 1.0;
        SlaterDeterminant det{cu, cd};
        CHECK(s2_expectation(det) == doctest::Approx(1.0));
    }
}

TEST_CASE("lowdin orthonormalization spans the same space") {
    std::mt19937 rng(3);
    Eigen::MatrixXd c = spinproj::testing::random_orthonormal(5, 2, rng);
    c.col(0) += 0.3 * c.col(1);  // break orthonormality
    Eigen::MatrixXd o = lowdin_orthonormalize(c);
    CHECK((o.transpose() * o - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff()
          < 1e-12);
    // same span: projector difference vanishes
    Eigen::MatrixXd pc = c * (c.transpose() * c).inverse() * c.transpose();
    CHECK((o * o.transpose() - pc).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("phase fixing makes the largest coefficient positive") {
    Eigen::MatrixXd c(3, 2);
    c << 0.1, -0.9, -0.8, 0.2, 0.3, 0.1;
    fix_phases(c);
    CHECK(c(1, 0) > 0.0);
    CHECK(c(0, 1) > 0.0);
}
