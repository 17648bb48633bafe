#include "hypermerw/merge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypermerw/error.hpp"
#include "least_squares.hpp"

namespace hypermerw {

namespace {

double ratio(const Vector& x) { return x.maxCoeff() / x.minCoeff(); }

double lambda_of(const LayerWeights& w, int k) {
  auto it = w.find(k);
  return it == w.end() ? 0.0 : it->second;
}

// lambda_k * orderings(S) * prod p_S for every block: the stationary
// probability of drawing context S in that layer.
Vector context_weights(const SymSparseTensor& t, const Vector& p, double lambda) {
  Vector w(static_cast<Eigen::Index>(t.block_count()));
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    const std::size_t first = t.block_begin(b);
    double x = lambda * t.multiplicity(first);
    for (NodeId u : t.group(first)) x *= p[u];
    w[static_cast<Eigen::Index>(b)] = x;
  }
  return w;
}

ContextMap to_context_map(const SymSparseTensor& t, const Vector& by_block) {
  ContextMap out;
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    auto g = t.group(t.block_begin(b));
    out.emplace_hint(out.end(), NodeSet(g.begin(), g.end()), by_block[static_cast<Eigen::Index>(b)]);
  }
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

struct ScaledLayer {
  int k;
  const SymSparseTensor* a;
  Vector weight;  // per block, see context_weights
  Vector u;       // per block
  Vector zeta;    // per block
};

}  // namespace

LayerTensors merge_reference(const AdjacencyLayers& a, const Vector& p, const LayerWeights& weights) {
  if (a.orientation != Orientation::OneHead)
    throw InvalidInput("merging needs one-head adjacency layers");
  if (static_cast<std::size_t>(p.size()) != a.dim) throw InvalidInput("p has the wrong length");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p[i] > 0.0)) throw InvalidInput("p has a zero entry at node " + std::to_string(i + 1));
  LayerTensors out;
  for (const auto& [k, t] : a.layers) {
    const double lambda = lambda_of(weights, k);
    if (lambda == 0.0) {
      out.emplace(k, SymSparseTensor(k, a.dim, Symmetry::Back, {}, t.loops()));
      continue;
    }
    std::vector<double> values(t.values());
    for (std::size_t i = 0; i < t.size(); ++i) {
      double f = lambda;
      for (NodeId u : t.group(i)) f *= p[u];
      values[i] *= f;
    }
    out.emplace(k, t.with_values(std::move(values)));
  }
  return out;
}

MergeMarginals merge_marginals(const LayerTensors& k, const Vector& p, const LayerWeights& weights,
                               const std::map<int, LayerPotentials>& potentials) {
  MergeMarginals m;
  m.xi = Vector::Zero(p.size());
  for (const auto& [order, t] : k) {
    if (t.empty()) {
      m.zeta.emplace(order, ContextMap{});
      continue;
    }
    auto pot = potentials.find(order);
    if (pot == potentials.end()) throw InvalidInput("missing potentials for layer k=" + std::to_string(order));
    const auto& [u, v] = pot->second;
    for (const auto& [s, x] : u)
      if (!(x > 0.0)) throw InvalidInput("context potentials must be strictly positive");
    SymSparseTensor y = scale_back(t, u, v);
    m.xi += polynomial_apply(y, Vector::Ones(p.size()));
    Vector mass = context_mass_by_block(y, Vector::Ones(p.size()));
    Vector w = context_weights(t, p, lambda_of(weights, order));
    for (std::size_t b = 0; b < t.block_count(); ++b) {
      const auto i = static_cast<Eigen::Index>(b);
      mass[i] *= t.multiplicity(t.block_begin(b)) / w[i];
    }
    m.zeta.emplace(order, to_context_map(t, mass));
  }
  return m;
}

MergeKernel infer_merge(const AdjacencyLayers& a, const Vector& p, const LayerWeights& weights,
                        const MergeOptions& options) {
  if (a.orientation != Orientation::OneHead)
    throw InvalidInput("merging needs one-head adjacency layers");
  const std::size_t n = a.dim;
  require_distribution(p, n, "p");
  require_weights(weights, a.layers);

  std::vector<ScaledLayer> layers;
  double coverage = 0.0;
  std::vector<bool> has_in(n, false);
  for (const auto& [k, t] : a.layers) {
    const double lambda = lambda_of(weights, k);
    if (lambda == 0.0 || t.empty()) continue;
    ScaledLayer s{k, &t, context_weights(t, p, lambda), Vector::Ones(t.block_count()),
                  Vector::Zero(t.block_count())};
    coverage += s.weight.sum();
    for (std::size_t i = 0; i < t.size(); ++i) has_in[t.distinguished(i)] = true;
    layers.push_back(std::move(s));
  }
  std::vector<NodeId> no_in;
  for (NodeId j = 0; j < n; ++j)
    if (!has_in[j]) no_in.push_back(j);
  if (!no_in.empty())
    throw InfeasibleConstraints("nodes absent from every weighted head set: " + node_list(no_in) +
                                    " (stationary constraint with positive mass)",
                                no_in);

  Vector v = options.initial_v.value_or(Vector::Ones(n));
  if (static_cast<std::size_t>(v.size()) != n || !(v.array() > 0.0).all())
    throw InvalidInput("initial potentials must be strictly positive with one entry per node");

  const Vector target = coverage * p;
  MergeKernel out;
  out.coverage = coverage;
  ScalingTrace& trace = out.trace;
  Vector xi(n);

  // zeta per block and xi at the current (U, v).
  auto marginals = [&]() {
    xi.setZero();
    for (auto& s : layers) {
      const auto& t = *s.a;
      for (std::size_t b = 0; b < t.block_count(); ++b) {
        const auto bi = static_cast<Eigen::Index>(b);
        double mass = 0.0;
        for (std::size_t i = t.block_begin(b); i < t.block_end(b); ++i) {
          const double x = t.value(i) * v[t.distinguished(i)];
          mass += x;
          xi[t.distinguished(i)] += s.weight[bi] * s.u[bi] * x;
        }
        s.zeta[bi] = s.u[bi] * mass;
      }
    }
  };
  auto evaluate = [&]() {
    marginals();
    out.context_residual = 0.0;
    for (const auto& s : layers)
      out.context_residual = std::max(out.context_residual, (s.zeta.array() - 1.0).abs().maxCoeff());
    out.stationarity_residual = (xi - target).cwiseAbs().maxCoeff();
  };
  auto dual = [&]() {
    double d = target.dot(v.array().log().matrix());
    for (const auto& s : layers)
      d += s.weight.dot(s.u.array().log().matrix()) - s.weight.dot(s.zeta) + s.weight.sum();
    return d;
  };
  auto max_ratio = [&]() {
    double r = ratio(v);
    for (const auto& s : layers) r = std::max(r, ratio(s.u));
    return r;
  };
  auto finite = [&]() {
    bool ok = v.allFinite();
    for (const auto& s : layers) ok = ok && s.u.allFinite();
    return ok;
  };
  auto violated = [&]() {
    std::vector<NodeId> bad;
    for (NodeId j = 0; j < n; ++j)
      if (!(std::abs(xi[j] - target[j]) <= options.tolerance) || !(std::abs(xi[j] / target[j] - 1.0) <= 1e-6))
        bad.push_back(j);
    return bad;
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
    if (!finite() || max_ratio() > options.hard_divergence_ratio) {
      auto bad = violated();
      throw InfeasibleConstraints("merge scaling diverged after " + std::to_string(it) +
                                      " sweeps; violated stationarity at nodes " + node_list(bad),
                                  bad);
    }
    if (it == options.max_iter) break;

    for (auto& s : layers) s.u = s.u.cwiseQuotient(s.zeta);
    marginals();
    v = v.cwiseProduct(target.cwiseQuotient(xi));
    evaluate();
  }

  if (!trace.converged && max_ratio() > options.divergence_ratio) {
    auto bad = violated();
    throw InfeasibleConstraints("merge scaling did not converge in " +
                                    std::to_string(options.max_iter) +
                                    " sweeps and its potentials diverged; violated nodes " +
                                    node_list(bad),
                                bad);
  }

  out.weights = weights;
  out.stationary = p;
  for (const auto& s : layers) {
    out.layers.emplace(s.k, scale_back(*s.a, s.u, v));
    out.potentials.emplace(s.k, LayerPotentials{to_context_map(*s.a, s.u), v});
  }
  return out;
}

MergeStep merge_step(const MergeKernel& kernel, const Vector& p_t, bool renormalize) {
  MergeStep step;
  // Off the simplex the map scales like sum_k lambda_k s^(k-1), so rounding
  // drift in the total mass grows geometrically. Inputs within rounding
  // distance of the simplex are put back on it.
  const double in_mass = p_t.sum();
  const bool on_simplex = std::abs(in_mass - 1.0) <= 1e-9;
  const Vector x = on_simplex ? Vector(p_t / in_mass) : p_t;
  step.next = Vector::Zero(p_t.size());
  for (const auto& [k, m] : kernel.layers) step.next += lambda_of(kernel.weights, k) * polynomial_apply(m, x);
  const double mass = step.next.sum();
  step.leaked_mass = std::max(0.0, (on_simplex ? 1.0 : in_mass) - mass);
  if (renormalize && mass > 0.0) step.next /= mass;
  return step;
}

double merge_divergence(const MergeKernel& kernel, const AdjacencyLayers& a) {
  double total = 0.0;
  for (const auto& [k, m] : kernel.layers) {
    const auto& ref = a.layers.at(k);
    const double lambda = lambda_of(kernel.weights, k);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double w = lambda * ref.multiplicity(i);
      for (NodeId u : ref.group(i)) w *= kernel.stationary[u];
      const double r = ref.value(i);
      const double x = m.at(ref.key(i));
      total += w * ((x > 0.0 ? x * std::log(x / r) : 0.0) - x + r);
    }
  }
  return total;
}

double dobrushin_delta_exact(const SymSparseTensor& m) {
  if (m.symmetry() != Symmetry::Back) throw InvalidInput("dobrushin_delta needs a back-symmetric tensor");
  const std::size_t c = m.block_count();
  double delta = 0.0;
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t b = a + 1; b < c; ++b) {
      // Receivers are sorted within a block: merge the two sparse rows.
      std::size_t i = m.block_begin(a), j = m.block_begin(b);
      const std::size_t ie = m.block_end(a), je = m.block_end(b);
      double l1 = 0.0;
      while (i < ie || j < je) {
        if (j == je || (i < ie && m.distinguished(i) < m.distinguished(j))) {
          l1 += m.value(i++);
        } else if (i == ie || m.distinguished(j) < m.distinguished(i)) {
          l1 += m.value(j++);
        } else {
          l1 += std::abs(m.value(i++) - m.value(j++));
        }
      }
      delta = std::max(delta, 0.5 * l1);
    }
  return std::min(delta, 1.0);
}

double dobrushin_delta_bound(const SymSparseTensor& m) {
  if (m.symmetry() != Symmetry::Back) throw InvalidInput("dobrushin_delta needs a back-symmetric tensor");
  const std::size_t c = m.block_count();
  if (c < 2) return 0.0;
  std::vector<std::size_t> count(m.dim(), 0);
  std::vector<double> low(m.dim(), 1.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    ++count[m.distinguished(i)];
    low[m.distinguished(i)] = std::min(low[m.distinguished(i)], m.value(i));
  }
  double common = 0.0;
  for (std::size_t j = 0; j < m.dim(); ++j)
    if (count[j] == c) common += low[j];
  return std::clamp(1.0 - common, 0.0, 1.0);
}

double dobrushin_delta(const SymSparseTensor& m, std::size_t exact_limit) {
  return m.block_count() <= exact_limit ? dobrushin_delta_exact(m) : dobrushin_delta_bound(m);
}

double contraction_constant(const MergeKernel& kernel) {
  double c = 0.0;
  for (const auto& [k, m] : kernel.layers) c += lambda_of(kernel.weights, k) * (k - 1) * dobrushin_delta(m);
  return c;
}

double verify_back_factorization(const LayerTensors& m, const LayerTensors& k) {
  for (const auto& [order, t] : k)
    if (!t.empty() && !m.contains(order))
      throw SupportMismatch("reference layer k=" + std::to_string(order) + " missing from kernel");
  double worst = 0.0;
  for (const auto& [order, t] : m) {
    auto it = k.find(order);
    if (it == k.end() || !t.same_support(it->second))
      throw SupportMismatch("kernel and reference supports differ at k=" + std::to_string(order));
    const auto& ref = it->second;
    detail::SparseDesign d;
    const auto contexts = static_cast<Eigen::Index>(t.block_count());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Eigen::Index row = d.rows++;
      d.y.push_back(std::log(t.value(i) / ref.value(i)));
      d.terms.emplace_back(row, static_cast<Eigen::Index>(t.block_of(i)), 1.0);
      d.terms.emplace_back(row, contexts + t.distinguished(i), 1.0);
    }
    d.cols = contexts + static_cast<Eigen::Index>(t.dim());
    worst = std::max(worst, detail::max_fit_residual(d));
  }
  return worst;
}

}  // namespace hypermerw
