#include "sbr/types.hpp"

#include <Eigen/SVD>

namespace sbr {

double op_norm(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    // power iteration on A^*A; deterministic start
    Vec v = Vec::Ones(a.cols());
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < 500; ++it) {
        Vec w = a.adjoint() * (a * v);
        double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        v = w / nrm;
        double est = std::sqrt(nrm);
        if (it > 4 && std::abs(est - prev) <= 1e-13 * std::max(1.0, est)) return est;
        prev = est;
    }
    return prev;
}

double smallest_singular_value(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(a.adjoint() * a);
    double lo = es.eigenvalues().minCoeff();
    return lo <= 0 ? 0.0 : std::sqrt(lo);
}

double frobenius_rel_error(const Mat& a, const Mat& b) {
    double den = b.norm();
    if (den == 0.0) return a.norm();
    return (a - b).norm() / den;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace sbr
