#include "hypermerw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include "hypermerw/error.hpp"

namespace hypermerw {

namespace {

// Mean of c over all permutations of the symmetric modes.
DenseTensor symmetrize(const DenseTensor& c, Symmetry symmetry) {
  const int k = c.order();
  const int first = symmetry == Symmetry::Front ? 1 : 0;
  const int last = symmetry == Symmetry::Front ? k : k - 1;  // exclusive
  std::vector<int> perm(last - first);
  std::iota(perm.begin(), perm.end(), first);
  DenseTensor out(k, c.dim());
  double count = 0.0;
  do {
    count += 1.0;
    for (std::size_t f = 0; f < c.size(); ++f) {
      auto idx = c.multi_index(f);
      auto moved = idx;
      for (std::size_t s = 0; s < perm.size(); ++s) moved[first + s] = idx[perm[s]];
      out[f] += c.at(moved);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& x : out.data()) x /= count;
  return out;
}

struct Flat {
  std::vector<std::pair<std::size_t, std::size_t>> cells;  // (block, flat)
  Vector reference;
  Matrix c;  // constraints x cells
  Vector target;
};

Flat flatten(const DenseProjectionProblem& problem) {
  const std::size_t blocks = problem.references.size();
  if (problem.symmetry.size() != blocks) throw InvalidInput("one symmetry tag per block required");
  Flat f;
  std::vector<double> ref;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto& r = problem.references[b];
    if (r.dim() > 5 || r.order() > 4) throw InvalidInput("oracle limited to n <= 5, k <= 4");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] < 0.0) throw InvalidInput("oracle reference must be nonnegative");
      if (r[i] > 0.0) {
        f.cells.push_back({b, i});
        ref.push_back(r[i]);
      }
    }
  }
  f.reference = Eigen::Map<Vector>(ref.data(), static_cast<Eigen::Index>(ref.size()));
  const auto m = static_cast<Eigen::Index>(problem.constraints.size());
  f.c = Matrix::Zero(m, static_cast<Eigen::Index>(f.cells.size()));
  f.target.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& con = problem.constraints[i];
    if (con.coefficients.size() != blocks) throw InvalidInput("one coefficient tensor per block required");
    if (!std::isfinite(con.target)) throw InvalidInput("constraint targets must be finite");
    std::vector<DenseTensor> sym;
    for (std::size_t b = 0; b < blocks; ++b) sym.push_back(symmetrize(con.coefficients[b], problem.symmetry[b]));
    for (std::size_t v = 0; v < f.cells.size(); ++v)
      f.c(i, static_cast<Eigen::Index>(v)) = sym[f.cells[v].first][f.cells[v].second];
    f.target[i] = con.target;
  }
  return f;
}

struct Dual {
  const Flat& f;
  Vector primal(const Vector& mu) const {
    return f.reference.cwiseProduct((f.c.transpose() * mu).array().exp().matrix());
  }
  double value(const Vector& mu) const { return f.target.dot(mu) - primal(mu).sum() + f.reference.sum(); }
  Vector gradient(const Vector& mu) const { return f.target - f.c * primal(mu); }
};

}  // namespace

double generalized_kl(const std::vector<DenseTensor>& x, const std::vector<DenseTensor>& r) {
  if (x.size() != r.size()) throw InvalidInput("generalized_kl: block count mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b)
    for (std::size_t i = 0; i < x[b].size(); ++i) {
      const double xi = x[b][i], ri = r[b][i];
      if (xi > 0.0 && ri == 0.0) return INFINITY;
      total += (xi > 0.0 ? xi * std::log(xi / ri) : 0.0) - xi + ri;
    }
  return total;
}

DenseProjection kl_project_dense(const DenseProjectionProblem& problem, const OracleOptions& options) {
  const Flat f = flatten(problem);
  const Dual dual{f};
  const Eigen::Index m = f.c.rows();
  DenseProjection out;

  // Finite-difference check of the dual gradient.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    Vector mu(m);
    for (Eigen::Index i = 0; i < m; ++i) mu[i] = normal(rng);
    const Vector g = dual.gradient(mu);
    Vector fd(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double h = 1e-5;
      Vector a = mu, b = mu;
      a[i] += h;
      b[i] -= h;
      fd[i] = (dual.value(a) - dual.value(b)) / (2.0 * h);
    }
    const double err = (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());
    out.gradient_check_error = std::max(out.gradient_check_error, err);
  }
  if (out.gradient_check_error > 1e-6)
    throw Error("oracle dual gradient disagrees with finite differences (relative error " +
                std::to_string(out.gradient_check_error) + ")");

  // Nonmonotone Armijo test against the lowest of the last few accepted
  // values, so that BB steps survive; near the optimum value differences
  // drop below rounding and a small slack keeps the iteration moving.
  Vector mu = Vector::Zero(m);
  Vector grad = dual.gradient(mu);
  double value = dual.value(mu);
  std::vector<double> recent{value};
  double step = 1.0;
  Vector prev_mu, prev_grad;
  bool converged = false;
  for (long it = 0; it < options.max_iter; ++it) {
    out.iterations = it;
    if (grad.cwiseAbs().maxCoeff() <= options.tolerance) {
      converged = true;
      break;
    }
    if (it > 0) {
      const Vector dmu = mu - prev_mu, dg = grad - prev_grad;
      const double curvature = dmu.dot(dg);
      step = curvature < 0.0 ? std::clamp(dmu.squaredNorm() / -curvature, 1e-12, 1e12) : 1.0;
    }
    const double slope = grad.squaredNorm();
    const double floor = *std::min_element(recent.begin(), recent.end());
    const double slack = 1e-14 * (1.0 + std::abs(value));
    Vector trial;
    double trial_value = value;
    bool accepted = false;
    for (int back = 0; back < 80 && !accepted; ++back) {
      trial = mu + step * grad;
      trial_value = dual.value(trial);
      accepted = std::isfinite(trial_value) && trial_value >= floor + 1e-4 * step * slope - slack;
      if (!accepted) step *= 0.5;
    }
    if (!accepted) break;
    prev_mu = mu;
    prev_grad = grad;
    mu = trial;
    value = trial_value;
    recent.push_back(value);
    if (recent.size() > 10) recent.erase(recent.begin());
    grad = dual.gradient(mu);
    if (!mu.allFinite() || mu.cwiseAbs().maxCoeff() > options.dual_bound)
      throw InfeasibleConstraints("oracle dual diverged: constraints look infeasible");
  }

  const Vector x = dual.primal(mu);
  out.max_residual = (f.c * x - f.target).cwiseAbs().maxCoeff();
  if (!converged && out.max_residual > options.tolerance)
    {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", out.max_residual);
    throw Error(std::string("oracle did not converge (residual ") + buf + ")");
  }

  for (const auto& r : problem.references) out.solution.emplace_back(r.order(), r.dim());
  for (std::size_t v = 0; v < f.cells.size(); ++v)
    out.solution[f.cells[v].first][f.cells[v].second] = x[static_cast<Eigen::Index>(v)];
  out.divergence = generalized_kl(out.solution, problem.references);
  return out;
}

DenseProjectionProblem broadcast_projection_problem(const AdjacencyLayers& a, const Vector& p,
                                                    const LayerWeights& weights) {
  if (a.orientation != Orientation::OneTail) throw InvalidInput("broadcasting needs one-tail layers");
  const std::size_t n = a.dim;
  DenseProjectionProblem prob;
  for (const auto& [k, t] : a.layers) {
    auto w = weights.find(k);
    if (w == weights.end() || w->second == 0.0) continue;
    DenseTensor r = t.to_dense();
    for (std::size_t f = 0; f < r.size(); ++f) r[f] *= w->second * p[r.multi_index(f)[0]];
    prob.references.push_back(std::move(r));
    prob.symmetry.push_back(Symmetry::Front);
  }
  auto indicator = [&](int mode, NodeId node, double target) {
    DenseConstraint c;
    for (const auto& r : prob.references) {
      DenseTensor t(r.order(), n);
      for (std::size_t f = 0; f < t.size(); ++f) t[f] = r.multi_index(f)[mode] == node ? 1.0 : 0.0;
      c.coefficients.push_back(std::move(t));
    }
    c.target = target;
    return c;
  };
  for (NodeId j = 0; j < n; ++j) prob.constraints.push_back(indicator(0, j, p[j]));
  for (NodeId j = 0; j < n; ++j) prob.constraints.push_back(indicator(1, j, p[j]));
  return prob;
}

DenseProjectionProblem merge_projection_problem(const AdjacencyLayers& a, const Vector& p,
                                                const LayerWeights& weights) {
  if (a.orientation != Orientation::OneHead) throw InvalidInput("merging needs one-head layers");
  const std::size_t n = a.dim;
  DenseProjectionProblem prob;
  std::vector<double> lambdas;
  for (const auto& [k, t] : a.layers) {
    auto w = weights.find(k);
    if (w == weights.end() || w->second == 0.0) continue;
    DenseTensor r = t.to_dense();
    for (std::size_t f = 0; f < r.size(); ++f) {
      auto idx = r.multi_index(f);
      double x = w->second;
      for (int m = 0; m + 1 < r.order(); ++m) x *= p[idx[m]];
      r[f] *= x;
    }
    prob.references.push_back(std::move(r));
    prob.symmetry.push_back(Symmetry::Back);
    lambdas.push_back(w->second);
  }

  // One constraint per supported ordered tail tuple; coverage summed alongside.
  double coverage = 0.0;
  for (std::size_t b = 0; b < prob.references.size(); ++b) {
    const auto& r = prob.references[b];
    const int k = r.order();
    std::size_t tuples = 1;
    for (int m = 0; m + 1 < k; ++m) tuples *= n;
    for (std::size_t tail = 0; tail < tuples; ++tail) {
      DenseConstraint c;
      for (const auto& other : prob.references) c.coefficients.emplace_back(other.order(), n);
      bool supported = false;
      for (NodeId j = 0; j < n; ++j) {
        const std::size_t f = tail * n + j;
        c.coefficients[b][f] = 1.0;
        supported = supported || r[f] > 0.0;
      }
      if (!supported) continue;
      auto idx = r.multi_index(tail * n);
      double mass = lambdas[b];
      for (int m = 0; m + 1 < k; ++m) mass *= p[idx[m]];
      c.target = mass;
      coverage += mass;
      prob.constraints.push_back(std::move(c));
    }
  }
  for (NodeId j = 0; j < n; ++j) {
    DenseConstraint c;
    for (const auto& r : prob.references) {
      DenseTensor t(r.order(), n);
      for (std::size_t f = 0; f < t.size(); ++f) t[f] = r.multi_index(f)[r.order() - 1] == j ? 1.0 : 0.0;
      c.coefficients.push_back(std::move(t));
    }
    c.target = coverage * p[j];
    prob.constraints.push_back(std::move(c));
  }
  return prob;
}

}  // namespace hypermerw
