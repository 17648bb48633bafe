#pragma once

#include <cstdint>
#include <vector>

#include "hypermerw/broadcast.hpp"
#include "hypermerw/dense.hpp"
#include "hypermerw/merge.hpp"

namespace hypermerw {

/// Linear equality over all blocks: sum_b <coefficients[b], x_b> = target.
struct DenseConstraint {
  std::vector<DenseTensor> coefficients;
  double target = 0.0;
};

/// Generalized-KL projection of a list of dense blocks (one per layer) onto
/// an affine set. Entries where the reference is zero stay zero. Each
/// coefficient tensor is averaged over the symmetric modes of its block
/// before solving.
struct DenseProjectionProblem {
  std::vector<DenseTensor> references;
  std::vector<Symmetry> symmetry;
  std::vector<DenseConstraint> constraints;
};

struct OracleOptions {
  double tolerance = 1e-10;
  long max_iter = 2'000'000;
  std::uint64_t seed = 0;  // dual points used by the gradient check
  double dual_bound = 1e3;  // |mu| beyond this is treated as divergence
};

struct DenseProjection {
  std::vector<DenseTensor> solution;
  double max_residual = 0.0;
  double divergence = 0.0;  // generalized KL to the reference
  long iterations = 0;
  double gradient_check_error = 0.0;
};

/// Dual gradient ascent with Barzilai-Borwein steps and Armijo backtracking.
/// Before solving, compares the analytic dual gradient with central finite
/// differences at 10 random dual points and throws Error if the relative
/// error exceeds 1e-6. Throws InfeasibleConstraints on divergence and Error
/// on non-convergence.
DenseProjection kl_project_dense(const DenseProjectionProblem& problem, const OracleOptions& options = {});

/// sum x log(x/r) - x + r over all blocks.
double generalized_kl(const std::vector<DenseTensor>& x, const std::vector<DenseTensor>& r);

/// Dense version of the broadcasting projection: joint blocks
/// lambda_k q_{j1} A^(k), pivot mass q_j, receiver mass p_m.
DenseProjectionProblem broadcast_projection_problem(const AdjacencyLayers& a, const Vector& p,
                                                    const LayerWeights& weights);

/// Dense version of the merging projection: joint blocks
/// lambda_k prod p_S A^(k), one context-mass constraint per ordered tail
/// tuple and receiver mass coverage * p_j.
DenseProjectionProblem merge_projection_problem(const AdjacencyLayers& a, const Vector& p,
                                                const LayerWeights& weights);

}  // namespace hypermerw
