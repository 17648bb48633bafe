#pragma once

#include <optional>

#include "hypermerw/hypergraph.hpp"
#include "hypermerw/scaling.hpp"

namespace hypermerw {

struct BroadcastOptions : ScalingOptions {
  /// Pivot distribution q pushed onto p in one step. Defaults to p.
  std::optional<Vector> source;
  std::optional<Vector> initial_u;
  std::optional<Vector> initial_v;
};

/// Conditional broadcasting tensors B^(k) with their scaling state.
///
/// Layer k scales receivers by v^(1/(k-1)), so for uniform k the tensors are
/// exactly A (.) (u o v' o ... o v') with v' = v^(1/(k-1)); for mixtures one
/// shared receiver potential couples all layers.
struct BroadcastKernel {
  LayerTensors layers;  // only layers with lambda_k > 0
  LayerWeights weights;
  Vector stationary;
  Vector source;
  Vector u;
  Vector v;
  double row_residual = 0.0;           // max |phi - 1| over pivots
  double stationarity_residual = 0.0;  // max |eta - p|
  ScalingTrace trace;

  double residual() const { return std::max(row_residual, stationarity_residual); }
};

/// K^(k) = lambda_k * w_{j1} * A^(k). A zero weight gives an empty layer.
LayerTensors pivot_weighted_reference(const AdjacencyLayers& a, const Vector& pivot_weights,
                                      const LayerWeights& weights);

struct BroadcastMarginals {
  Vector phi;  // row mass of the scaled mixture divided by the pivot weight
  Vector eta;  // receiver mass of the scaled mixture
};

/// Marginals of the u, v scaled references. `pivot_weights` is the vector
/// absorbed into K (p, or q when given); pivots with zero weight get phi = 0.
BroadcastMarginals mixture_marginals(const LayerTensors& k, const Vector& pivot_weights,
                                     const Vector& u, const Vector& v);

/// Entropic projection of the reference onto the broadcasting constraints by
/// alternating scaling. Throws InfeasibleConstraints or InvalidInput.
BroadcastKernel infer_broadcast(const AdjacencyLayers& a, const Vector& p,
                                const LayerWeights& weights, const BroadcastOptions& options = {});

/// Generalized KL divergence between the joint tensors lambda_k q_{j1} B^(k)
/// and the reference lambda_k q_{j1} A^(k), summed over ordered tuples.
double broadcast_divergence(const BroadcastKernel& kernel, const AdjacencyLayers& a);

/// Max residual of the least-squares fit of log(B/K) by
/// a_{j1} + c_k + (1/(k-1)) sum_{r in S} b_r. The per-layer constant c_k
/// absorbs lambda_k. Throws SupportMismatch.
double verify_front_factorization(const LayerTensors& b, const LayerTensors& k);

}  // namespace hypermerw
