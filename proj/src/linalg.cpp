#include "pisac/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "pisac/errors.hpp"

namespace pisac {

HermitianEigen eigen_descending(const CMat& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian);
    if (solver.info() != Eigen::Success) throw NumericalFailure("Hermitian eigensolver did not converge");
    const Eigen::Index n = hermitian.rows();
    HermitianEigen out{RVec(n), CMat(n, n)};
    // Eigen returns ascending order.
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

RVec eigenvalues_descending(const CMat& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalFailure("Hermitian eigensolver did not converge");
    return solver.eigenvalues().reverse();
}

}  // namespace pisac
