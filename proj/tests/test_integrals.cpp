#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "spinproj/integrals.hpp"

using namespace spinproj;

TEST_CASE("fcidump parse of a hand-built input") {
    std::istringstream in(
        "&FCI NORB=2,NELEC=2,MS2=0,\n"
        " ORBSYM=1,1,\n"
        " ISYM=1,\n"
        "&END\n"
        "1.0 1 1 1 1\n"
        "0.5 1 1 2 2\n"
        "-1.2 1 1 0 0\n"
        "0.7 0 0 0 0\n");
    auto [spec, ints] = parse_fcidump(in);
    CHECK(spec.n_orbitals == 2);
    CHECK(spec.n_alpha == 1);
    CHECK(spec.n_beta == 1);
    CHECK(ints.v.get(0, 0, 0, 0) == 1.0);
    CHECK(ints.v.get(0, 0, 1, 1) == 0.5);
    CHECK(ints.h(0, 0) == -1.2);
    CHECK(ints.core_energy == 0.7);
    // 8-fold symmetry readback
    CHECK(ints.v.get(1, 1, 0, 0) == 0.5);
}

TEST_CASE("fcidump empty body means zero tensors") {
    std::istringstream in("&FCI NORB=3,NELEC=2,MS2=0,\n&END\n");
    auto [spec, ints] = parse_fcidump(in);
    CHECK(spec.n_orbitals == 3);
    CHECK(ints.core_energy == 0.0);
    CHECK(ints.h.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ints.v.get(2, 1, 0, 2) == 0.0);
}

TEST_CASE("fcidump error paths") {
    SUBCASE("malformed header token") {
        std::istringstream in("&FCI NORB=2,NELEC=2,JUNK\n&END\n");
        CHECK_THROWS_AS(parse_fcidump(in), ParseError);
    }
    SUBCASE("bad integer") {
        std::istringstream in("&FCI NORB=x2,NELEC=2,\n&END\n");
        CHECK_THROWS_WITH_AS(parse_fcidump(in),
                             doctest::Contains("NORB"), ParseError);
    }
    SUBCASE("missing terminator") {
        std::istringstream in("&FCI NORB=2,NELEC=2,\n");
        CHECK_THROWS_AS(parse_fcidump(in), ParseError);
    }
    SUBCASE("index out of range") {
        std::istringstream in("&FCI NORB=2,NELEC=2,\n&END\n1.0 1 1 3 1\n");
        CHECK_THROWS_WITH_AS(parse_fcidump(in),
                             doctest::Contains("line 5"), ParseError);
    }
    SUBCASE("conflicting duplicates") {
        std::istringstream in("&FCI NORB=2,NELEC=2,\n&END\n"
                              "1.0 1 1 2 2\n0.5 2 2 1 1\n");
        CHECK_THROWS_AS(parse_fcidump(in), ParseError);
    }
    SUBCASE("consistent duplicates pass") {
        std::istringstream in("&FCI NORB=2,NELEC=2,\n&END\n"
                              "1.0 1 1 2 2\n1.0 2 2 1 1\n");
        CHECK_NOTHROW(parse_fcidump(in));
    }
}

TEST_CASE("fcidump round-trip is bit-identical") {
    std::mt19937 rng(11);
    SystemSpec spec;
    spec.n_orbitals = 4;
    spec.n_alpha = spec.n_beta = 2;
    IntegralSet ints = spinproj::testing::random_integrals(4, rng);
    std::ostringstream first;
    write_fcidump(spec, ints, first);
    std::istringstream back(first.str());
    auto [spec2, ints2] = parse_fcidump(back);
    CHECK(ints2.h == ints.h);
    CHECK(ints2.v == ints.v);
    CHECK(ints2.core_energy == ints.core_energy);
    std::ostringstream second;
    write_fcidump(spec2, ints2, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("s2 operator blocks are hermitian and pattern-correct") {
    const auto op = s2_operator(3);
    for (const auto& [key, h] : op.one_body)
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(op.one_body.at({Spin::Up, Spin::Up})(0, 0) == 0.75);
    // flip blocks present
    CHECK(op.two_body.count({Spin::Up, Spin::Down, Spin::Down, Spin::Up}) == 1);
    CHECK(op.two_body.count({Spin::Down, Spin::Up, Spin::Up, Spin::Down}) == 1);
    CHECK_THROWS_AS(s2_operator(0), DomainError);
}

TEST_CASE("basis rotation preserves integral symmetry") {
    std::mt19937 rng(5);
    IntegralSet ints = spinproj::testing::random_integrals(3, rng);
    Eigen::MatrixXd q = spinproj::testing::random_orthonormal(3, 3, rng);
    IntegralSet rot = transform_integrals(ints, q);
    CHECK((rot.h - rot.h.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    // rotating back restores the original tensors
    IntegralSet back = transform_integrals(rot, q.transpose());
    CHECK((back.h - ints.h).cwiseAbs().maxCoeff() < 1e-12);
    double dv = 0.0;
    for (int p = 0; p < 3; ++p)
        for (int qq = 0; qq < 3; ++qq)
            for (int r = 0; r < 3; ++r)
                for (int s = 0; s < 3; ++s)
                    dv = std::max(dv, std::abs(back.v.get(p, qq, r, s)
                                               - ints.v.get(p, qq, r, s)));
    CHECK(dv < 1e-12);
}
