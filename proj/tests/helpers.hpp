#pragma once

#include <random>
#include <string>

#include "spinproj/determinant.hpp"
#include "spinproj/integrals.hpp"

namespace spinproj::testing {

inline std::string data_path(const std::string& name) {
    return std::string(SPINPROJ_DATA_DIR) + "/" + name;
}

// H2-like two-orbital MO integrals (symmetric diatomic at moderate R):
// only totally symmetric two-electron elements survive.
inline std::pair<SystemSpec, IntegralSet> h2_model() {
    SystemSpec spec;
    spec.n_orbitals = 2;
    spec.n_alpha = spec.n_beta = 1;
    spec.ms2 = 0;
    IntegralSet ints;
    ints.h = Eigen::MatrixXd::Zero(2, 2);
    ints.h(0, 0) = -1.2528;
    ints.h(1, 1) = -0.4756;
    ints.v = TwoElectronIntegrals(2);
    ints.v.set(0, 0, 0, 0, 0.6746);
    ints.v.set(1, 1, 1, 1, 0.6975);
    ints.v.set(0, 0, 1, 1, 0.6636);
    ints.v.set(0, 1, 0, 1, 0.1813);
    ints.core_energy = 0.7143;
    spec.core_energy = ints.core_energy;
    return {spec, ints};
}

inline Eigen::MatrixXd random_orthonormal(int rows, int cols, std::mt19937& rng) {
    std::normal_distribution<double> dist;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = dist(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    return q.leftCols(cols);
}

inline SlaterDeterminant random_determinant(int L, int na, int nb, std::mt19937& rng) {
    return {random_orthonormal(L, na, rng), random_orthonormal(L, nb, rng)};
}

inline IntegralSet random_integrals(int L, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    IntegralSet ints;
    ints.h = Eigen::MatrixXd::Zero(L, L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            ints.h(p, q) = ints.h(q, p) = dist(rng);
    ints.v = TwoElectronIntegrals(L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= r; ++s)
                    ints.v.set(p, q, r, s, 0.3 * dist(rng));
    ints.core_energy = dist(rng);
    return ints;
}

} // namespace spinproj::testing
