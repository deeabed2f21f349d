#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace pisac {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// (A + A^H) / 2
inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

/// Real trace of A*B for Hermitian A, B without forming the product.
inline double trace_product(const CMat& a, const CMat& b) {
    return (a.transpose().cwiseProduct(b)).sum().real();
}

/// Eigenvalues of a Hermitian matrix in decreasing order.
RVec eigenvalues_descending(const CMat& hermitian);

/// Eigen-decomposition of a Hermitian matrix, values and vectors sorted in
/// decreasing eigenvalue order.
struct HermitianEigen {
    RVec values;
    CMat vectors;
};
HermitianEigen eigen_descending(const CMat& hermitian);

}  // namespace pisac
