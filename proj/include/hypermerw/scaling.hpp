#pragma once

#include <map>
#include <vector>

#include "hypermerw/tensor.hpp"

namespace hypermerw {

/// Layer weight lambda_k keyed by edge size k.
using LayerWeights = std::map<int, double>;
/// One tensor per edge size k.
using LayerTensors = std::map<int, SymSparseTensor>;

/// Stopping rules shared by both scaling loops.
struct ScalingOptions {
  double tolerance = 1e-10;
  long max_iter = 100000;
  /// Max/min potential ratio above which a run that hit max_iter is
  /// declared infeasible.
  double divergence_ratio = 1e12;
  /// Ratio treated as certain divergence at any iteration (prevents overflow).
  double hard_divergence_ratio = 1e150;
  bool record_history = true;
};

/// Per-sweep diagnostics.
struct ScalingTrace {
  long iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // joint residual after each sweep, index 0 = start
  std::vector<double> dual;       // dual objective after each sweep
};

/// Throws InvalidInput unless p has length n, is strictly positive and sums
/// to 1 within 1e-9.
void require_distribution(const Vector& p, std::size_t n, const char* what);

/// Throws InvalidInput unless weights are nonnegative, sum to 1 within 1e-9
/// and only name layers present in `layers`.
void require_weights(const LayerWeights& weights, const LayerTensors& layers);

}  // namespace hypermerw
