#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "hypermerw/tensor.hpp"

namespace hypermerw::detail {

/// Linear model y ~ X beta with a sparse design.
struct SparseDesign {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Eigen::Triplet<double>> terms;
  std::vector<double> y;
};

/// Max absolute residual of the least-squares fit. Rank deficiency is fine.
double max_fit_residual(const SparseDesign& design);

}  // namespace hypermerw::detail
