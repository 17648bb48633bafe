#include "hypermerw/broadcast.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypermerw/error.hpp"
#include "least_squares.hpp"

namespace hypermerw {

namespace {

double ratio(const Vector& x) { return x.maxCoeff() / x.minCoeff(); }

// Receiver potential seen by a layer of order k.
Vector layer_potential(const Vector& v, int k) {
  if (k == 2) return v;
  return v.array().pow(1.0 / (k - 1)).matrix();
}

// Row mass (without division by pivot weight) and receiver mass of the
// scaled layers, without materializing the scaled tensors.
void scaled_marginals(const LayerTensors& layers, const Vector& u, const Vector& v, Vector& row,
                      Vector& recv) {
  row.setZero(v.size());
  recv.setZero(v.size());
  for (const auto& [k, t] : layers) {
    if (t.empty()) continue;
    const Vector vk = layer_potential(v, k);
    const double slots = static_cast<double>(k - 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto g = t.group(i);
      double x = t.value(i) * u[t.distinguished(i)];
      for (NodeId r : g) x *= vk[r];
      x *= t.multiplicity(i);
      row[t.distinguished(i)] += x;
      std::size_t a = 0;
      while (a < g.size()) {
        std::size_t b = a;
        while (b < g.size() && g[b] == g[a]) ++b;
        recv[g[a]] += x * static_cast<double>(b - a) / slots;
        a = b;
      }
    }
  }
}

// Nodes whose receiver mass misses p, absolutely or relatively.
std::vector<NodeId> worst_nodes(const Vector& recv, const Vector& p, double tol) {
  std::vector<NodeId> out;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(std::abs(recv[i] - p[i]) <= tol) || !(std::abs(recv[i] / p[i] - 1.0) <= 1e-6))
      out.push_back(static_cast<NodeId>(i));
  return out;
}

std::string node_list(const std::vector<NodeId>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size() && i < 10; ++i) {
    if (i) s += ", ";
    s += std::to_string(nodes[i] + 1);
  }
  if (nodes.size() > 10) s += ", ...";
  return s;
}

}  // namespace

LayerTensors pivot_weighted_reference(const AdjacencyLayers& a, const Vector& pivot_weights,
                                      const LayerWeights& weights) {
  if (a.orientation != Orientation::OneTail)
    throw InvalidInput("broadcasting needs one-tail adjacency layers");
  if (static_cast<std::size_t>(pivot_weights.size()) != a.dim)
    throw InvalidInput("pivot weights have the wrong length");
  for (Eigen::Index i = 0; i < pivot_weights.size(); ++i)
    if (!(pivot_weights[i] > 0.0))
      throw InvalidInput("p has a zero entry at node " + std::to_string(i + 1));
  LayerTensors out;
  for (const auto& [k, t] : a.layers) {
    auto it = weights.find(k);
    const double lambda = it == weights.end() ? 0.0 : it->second;
    if (lambda == 0.0) {
      out.emplace(k, SymSparseTensor(k, a.dim, Symmetry::Front, {}, t.loops()));
      continue;
    }
    std::vector<double> values(t.values());
    for (std::size_t i = 0; i < t.size(); ++i) values[i] *= lambda * pivot_weights[t.distinguished(i)];
    out.emplace(k, t.with_values(std::move(values)));
  }
  return out;
}

BroadcastMarginals mixture_marginals(const LayerTensors& k, const Vector& pivot_weights,
                                     const Vector& u, const Vector& v) {
  const Eigen::Index n = pivot_weights.size();
  if (u.size() != n || v.size() != n) throw InvalidInput("scaling vectors have the wrong length");
  if (!(u.array() > 0.0).all() || !(v.array() > 0.0).all())
    throw InvalidInput("scaling vectors must be strictly positive");
  BroadcastMarginals m;
  scaled_marginals(k, u, v, m.phi, m.eta);
  for (Eigen::Index j = 0; j < n; ++j) m.phi[j] = pivot_weights[j] > 0.0 ? m.phi[j] / pivot_weights[j] : 0.0;
  return m;
}

BroadcastKernel infer_broadcast(const AdjacencyLayers& a, const Vector& p,
                                const LayerWeights& weights, const BroadcastOptions& options) {
  if (a.orientation != Orientation::OneTail)
    throw InvalidInput("broadcasting needs one-tail adjacency layers");
  const std::size_t n = a.dim;
  require_distribution(p, n, "p");
  const Vector q = options.source.value_or(p);
  require_distribution(q, n, "source distribution");
  require_weights(weights, a.layers);

  const LayerTensors kref = pivot_weighted_reference(a, q, weights);

  std::vector<bool> has_out(n, false), has_in(n, false);
  for (const auto& [k, t] : kref)
    for (std::size_t i = 0; i < t.size(); ++i) {
      has_out[t.distinguished(i)] = true;
      for (NodeId r : t.group(i)) has_in[r] = true;
    }
  std::vector<NodeId> no_out, no_in;
  for (NodeId j = 0; j < n; ++j) {
    if (!has_out[j]) no_out.push_back(j);
    if (!has_in[j]) no_in.push_back(j);
  }
  if (!no_out.empty())
    throw InfeasibleConstraints("nodes without outgoing support in any weighted layer: " +
                                    node_list(no_out) + " (row constraint with positive mass)",
                                no_out);
  if (!no_in.empty())
    throw InfeasibleConstraints("nodes absent from every weighted head set: " + node_list(no_in) +
                                    " (stationary constraint with positive mass)",
                                no_in);

  Vector u = options.initial_u.value_or(Vector::Ones(n));
  Vector v = options.initial_v.value_or(Vector::Ones(n));
  if (static_cast<std::size_t>(u.size()) != n || static_cast<std::size_t>(v.size()) != n ||
      !(u.array() > 0.0).all() || !(v.array() > 0.0).all())
    throw InvalidInput("initial potentials must be strictly positive with one entry per node");

  double reference_mass = 0.0;
  for (const auto& [k, t] : kref) reference_mass += row_mass(t).sum();

  BroadcastKernel out;
  ScalingTrace& trace = out.trace;
  Vector row(n), recv(n), phi(n);

  auto evaluate = [&]() {
    scaled_marginals(kref, u, v, row, recv);
    phi = row.cwiseQuotient(q);
    out.row_residual = (phi.array() - 1.0).abs().maxCoeff();
    out.stationarity_residual = (recv - p).cwiseAbs().maxCoeff();
  };
  auto dual = [&]() {
    return q.dot(u.array().log().matrix()) + p.dot(v.array().log().matrix()) - row.sum() +
           reference_mass;
  };

  evaluate();
  for (long it = 0;; ++it) {
    if (options.record_history) {
      trace.residuals.push_back(out.residual());
      trace.dual.push_back(dual());
    }
    trace.iterations = it;
    if (out.residual() <= options.tolerance) {
      trace.converged = true;
      break;
    }
    if (!u.allFinite() || !v.allFinite() || ratio(u) > options.hard_divergence_ratio ||
        ratio(v) > options.hard_divergence_ratio) {
      auto bad = worst_nodes(recv, p, options.tolerance);
      throw InfeasibleConstraints("broadcast scaling diverged after " + std::to_string(it) +
                                      " sweeps; violated stationarity at nodes " + node_list(bad),
                                  bad);
    }
    if (it == options.max_iter) break;

    u = u.cwiseQuotient(phi);
    scaled_marginals(kref, u, v, row, recv);
    v = v.cwiseProduct(p.cwiseQuotient(recv));
    evaluate();
  }

  if (!trace.converged && (ratio(u) > options.divergence_ratio || ratio(v) > options.divergence_ratio)) {
    auto bad = worst_nodes(recv, p, options.tolerance);
    throw InfeasibleConstraints("broadcast scaling did not converge in " +
                                    std::to_string(options.max_iter) +
                                    " sweeps and its potentials diverged; violated nodes " +
                                    node_list(bad),
                                bad);
  }

  out.weights = weights;
  out.stationary = p;
  out.source = q;
  out.u = u;
  out.v = v;
  for (const auto& [k, t] : a.layers) {
    auto w = weights.find(k);
    if (w == weights.end() || w->second == 0.0) continue;
    out.layers.emplace(k, scale_front(t, u, layer_potential(v, k)));
  }
  return out;
}

double broadcast_divergence(const BroadcastKernel& kernel, const AdjacencyLayers& a) {
  double total = 0.0;
  for (const auto& [k, b] : kernel.layers) {
    const double lambda = kernel.weights.at(k);
    const auto& ref = a.layers.at(k);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double w = lambda * kernel.source[ref.distinguished(i)] * ref.multiplicity(i);
      const double r = ref.value(i);
      const double x = b.at(ref.key(i));
      total += w * ((x > 0.0 ? x * std::log(x / r) : 0.0) - x + r);
    }
  }
  return total;
}

double verify_front_factorization(const LayerTensors& b, const LayerTensors& k) {
  for (const auto& [order, t] : k)
    if (!t.empty() && !b.contains(order))
      throw SupportMismatch("reference layer k=" + std::to_string(order) + " missing from kernel");
  detail::SparseDesign d;
  Eigen::Index n = 0;
  for (const auto& [order, t] : b) n = std::max<Eigen::Index>(n, static_cast<Eigen::Index>(t.dim()));
  Eigen::Index layer = 0;
  const Eigen::Index layer_col0 = 2 * n;
  for (const auto& [order, t] : b) {
    auto it = k.find(order);
    if (it == k.end() || !t.same_support(it->second))
      throw SupportMismatch("kernel and reference supports differ at k=" + std::to_string(order));
    const auto& ref = it->second;
    const double share = 1.0 / (order - 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Eigen::Index row = d.rows++;
      d.y.push_back(std::log(t.value(i) / ref.value(i)));
      d.terms.emplace_back(row, t.distinguished(i), 1.0);
      d.terms.emplace_back(row, layer_col0 + layer, 1.0);
      for (NodeId r : t.group(i)) d.terms.emplace_back(row, n + r, share);
    }
    ++layer;
  }
  d.cols = layer_col0 + layer;
  return detail::max_fit_residual(d);
}

}  // namespace hypermerw
