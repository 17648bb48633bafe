#pragma once

#include <optional>

#include "hypermerw/hypergraph.hpp"
#include "hypermerw/scaling.hpp"

namespace hypermerw {

struct MergeOptions : ScalingOptions {
  std::optional<Vector> initial_v;
};

/// Scaling state of one layer: context potential per tail set and the
/// receiver potential (shared by all layers).
struct LayerPotentials {
  ContextMap u;
  Vector v;
};

/// Conditional merging tensors M^(k): each supported tail set carries a
/// receiver distribution.
struct MergeKernel {
  LayerTensors layers;  // only layers with lambda_k > 0
  LayerWeights weights;
  Vector stationary;
  std::map<int, LayerPotentials> potentials;
  /// Probability that a context drawn from the stationary vector is
  /// supported: sum_k lambda_k sum_S orderings(S) prod p_S. Equals 1 when
  /// every ordered tail tuple is covered; stationarity targets coverage * p.
  double coverage = 1.0;
  double context_residual = 0.0;       // max |zeta - 1|
  double stationarity_residual = 0.0;  // max |xi - coverage * p|
  ScalingTrace trace;

  double residual() const { return std::max(context_residual, stationarity_residual); }
};

/// K^(k) = lambda_k * prod_{u in S} p_u * A^(k). A zero weight gives an empty layer.
LayerTensors merge_reference(const AdjacencyLayers& a, const Vector& p, const LayerWeights& weights);

struct MergeMarginals {
  std::map<int, ContextMap> zeta;  // conditional context mass per layer
  Vector xi;                       // receiver mass of the scaled mixture
};

/// Marginals of the scaled references. zeta is normalized by each context's
/// reference weight lambda_k prod p_S, so a feasible point has zeta == 1.
MergeMarginals merge_marginals(const LayerTensors& k, const Vector& p, const LayerWeights& weights,
                               const std::map<int, LayerPotentials>& potentials);

/// Entropic projection onto output-stochastic, stationary merging tensors.
/// Throws InfeasibleConstraints or InvalidInput.
MergeKernel infer_merge(const AdjacencyLayers& a, const Vector& p, const LayerWeights& weights,
                        const MergeOptions& options = {});

struct MergeStep {
  Vector next;
  /// 1 - mass of the raw step: probability of drawing an unsupported context.
  double leaked_mass = 0.0;
};

/// One step of the polynomial dynamics sum_k lambda_k M^(k) x_{1..k-1} p_t.
/// With `renormalize` the result is divided by its mass. An input whose
/// mass is within 1e-9 of 1 is first rescaled onto the simplex, so rounding
/// drift is not amplified by repeated steps.
MergeStep merge_step(const MergeKernel& kernel, const Vector& p_t, bool renormalize = false);

/// Generalized KL divergence between joint tensors lambda_k prod p_S M^(k)
/// and lambda_k prod p_S A^(k), summed over ordered tuples.
double merge_divergence(const MergeKernel& kernel, const AdjacencyLayers& a);

/// Worst-case total variation between receiver laws of two supported tail
/// sets. Exact over all pairs up to `exact_limit` contexts; above that the
/// upper bound 1 - sum_j min_S M[S, j].
double dobrushin_delta(const SymSparseTensor& m, std::size_t exact_limit = 2000);
double dobrushin_delta_exact(const SymSparseTensor& m);
double dobrushin_delta_bound(const SymSparseTensor& m);

/// sum_k lambda_k (k-1) delta(M^(k)); below 1 certifies strong ergodicity.
double contraction_constant(const MergeKernel& kernel);

/// Per layer, max residual of fitting log(M/K) by c_S + b_j; max over layers.
double verify_back_factorization(const LayerTensors& m, const LayerTensors& k);

}  // namespace hypermerw
