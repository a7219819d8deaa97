#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sbr {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Error classes map onto the CLI exit codes (2/3/4/5).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense operator together with the tag of the product basis it acts on.
// Composing operators with different tags is a bug in the calling code.
struct OperatorMatrix {
    Mat mat;
    std::string basis_tag;

    OperatorMatrix() = default;
    OperatorMatrix(Mat m, std::string tag) : mat(std::move(m)), basis_tag(std::move(tag)) {}

    Eigen::Index rows() const { return mat.rows(); }
    Eigen::Index cols() const { return mat.cols(); }

    OperatorMatrix operator*(const OperatorMatrix& o) const {
        require_same_basis(o);
        return {mat * o.mat, basis_tag};
    }
    OperatorMatrix operator+(const OperatorMatrix& o) const {
        require_same_basis(o);
        return {mat + o.mat, basis_tag};
    }
    OperatorMatrix operator-(const OperatorMatrix& o) const {
        require_same_basis(o);
        return {mat - o.mat, basis_tag};
    }
    OperatorMatrix adjoint() const { return {mat.adjoint(), basis_tag}; }

    void require_same_basis(const OperatorMatrix& o) const {
        if (basis_tag != o.basis_tag)
            throw std::invalid_argument("basis tag mismatch: '" + basis_tag + "' vs '" +
                                        o.basis_tag + "'");
    }
};

// Operator 2-norm by power iteration on A^*A with a deterministic start.
double op_norm(const Mat& a);

// Smallest singular value.
double smallest_singular_value(const Mat& a);

double frobenius_rel_error(const Mat& a, const Mat& b);

Mat kron(const Mat& a, const Mat& b);

}  // namespace sbr
