#include "spinproj/determinant.hpp"

#include <cmath>

namespace spinproj {

double SlaterDeterminant::orthonormality_error() const {
    double err = 0.0;
    for (const auto* c : {&c_up, &c_down}) {
        if (c->cols() == 0)
            continue;
        Eigen::MatrixXd g = c->transpose() * (*c);
        g.diagonal().array() -= 1.0;
        err = std::max(err, g.cwiseAbs().maxCoeff());
    }
    return err;
}

Eigen::MatrixXd occ_overlap(const SlaterDeterminant& det) {
    return det.c_up.transpose() * det.c_down;
}

double s2_expectation(const SlaterDeterminant& det) {
    const double ms = 0.5 * (det.n_up() - det.n_down());
    const Eigen::MatrixXd g = occ_overlap(det);
    return ms * (ms + 1.0) + det.n_down() - g.squaredNorm();
}

void fix_phases(Eigen::MatrixXd& coeffs) {
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
        Eigen::Index imax = 0;
        coeffs.col(j).cwiseAbs().maxCoeff(&imax);
        if (coeffs(imax, j) < 0.0)
            coeffs.col(j) = -coeffs.col(j);
    }
}

Eigen::MatrixXd lowdin_orthonormalize(const Eigen::MatrixXd& c) {
    if (c.cols() == 0)
        return c;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
    const Eigen::VectorXd w = es.eigenvalues();
    Eigen::VectorXd inv_sqrt(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
        inv_sqrt(i) = 1.0 / std::sqrt(w(i));
    return c * es.eigenvectors() * inv_sqrt.asDiagonal()
             * es.eigenvectors().transpose();
}

} // namespace spinproj
