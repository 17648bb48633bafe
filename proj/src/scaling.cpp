#include "hypermerw/scaling.hpp"

#include <cmath>
#include <string>

#include "hypermerw/error.hpp"

namespace hypermerw {

void require_distribution(const Vector& p, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(p.size()) != n)
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                       std::to_string(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p[i] > 0.0) || !std::isfinite(p[i]))
      throw InvalidInput(std::string(what) + ": entry " + std::to_string(i + 1) +
                         " must be strictly positive");
  if (std::abs(p.sum() - 1.0) > 1e-9)
    throw InvalidInput(std::string(what) + ": entries must sum to 1");
}

void require_weights(const LayerWeights& weights, const LayerTensors& layers) {
  double total = 0.0;
  for (const auto& [k, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidInput("layer weight for k=" + std::to_string(k) + " must be nonnegative");
    if (w > 0.0 && !layers.contains(k))
      throw InvalidInput("layer weight given for k=" + std::to_string(k) +
                         " but the hypergraph has no edges of that size");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("layer weights must sum to 1");
}

}  // namespace hypermerw
