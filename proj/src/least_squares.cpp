#include "least_squares.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

namespace hypermerw::detail {

double max_fit_residual(const SparseDesign& d) {
  if (d.rows == 0) return 0.0;
  Eigen::Map<const Vector> y(d.y.data(), d.rows);
  Vector r;
  if (d.rows * d.cols <= 4'000'000) {
    Matrix x = Matrix::Zero(d.rows, d.cols);
    for (const auto& t : d.terms) x(t.row(), t.col()) += t.value();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
    r = y - x * cod.solve(y);
  } else {
    Eigen::SparseMatrix<double> x(d.rows, d.cols);
    x.setFromTriplets(d.terms.begin(), d.terms.end());
    Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
    solver.setTolerance(1e-15);
    solver.setMaxIterations(std::max<Eigen::Index>(1000, 20 * d.cols));
    solver.compute(x);
    r = y - x * solver.solve(y);
  }
  return r.cwiseAbs().maxCoeff();
}

}  // namespace hypermerw::detail
