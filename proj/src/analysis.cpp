#include "hypermerw/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "hypermerw/error.hpp"

namespace hypermerw {

ProjectedKernel projected_kernel(const BroadcastKernel& kernel) {
  const auto n = kernel.stationary.size();
  ProjectedKernel out{Matrix::Zero(n, n), kernel.stationary};
  for (const auto& [k, b] : kernel.layers) out.P += kernel.weights.at(k) * receiver_marginal_matrix(b);
  return out;
}

bool is_primitive(const Matrix& p) {
  const Eigen::Index n = p.rows();
  if (n == 0 || p.cols() != n) throw InvalidInput("is_primitive needs a square matrix");
  Matrix s = (p.array() > 0.0).cast<double>().matrix();
  const long bound = n * n - 2 * n + 2;
  long power = 1;
  while (power < bound) {
    s = ((s * s).array() > 0.0).cast<double>().matrix();
    power *= 2;
  }
  return (s.array() > 0.0).all();
}

double stationarity_residual(const Matrix& p_matrix, const Vector& p) {
  if (p_matrix.rows() != p.size() || p_matrix.cols() != p.size())
    throw InvalidInput("stationarity_residual: dimension mismatch");
  return (p_matrix.transpose() * p - p).cwiseAbs().maxCoeff();
}

Vector stationary_distribution(const Matrix& p_matrix) {
  const Eigen::Index n = p_matrix.rows();
  Matrix a(n + 1, n);
  a.topRows(n) = p_matrix.transpose() - Matrix::Identity(n, n);
  a.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs[n] = 1.0;
  Vector x = a.colPivHouseholderQr().solve(rhs);
  return x / x.sum();
}

SpectralGap spectral_gap(const Matrix& p_matrix, double tolerance, long max_iter) {
  const Eigen::Index n = p_matrix.rows();
  SpectralGap out;
  if (n < 2) {
    out.gap = 1.0;
    out.converged = true;
    return out;
  }
  const Matrix pt = p_matrix.transpose();
  auto apply = [&](const Vector& x) {
    Vector y = pt * x;
    y.array() -= y.mean();  // stay on zero-sum vectors
    return y;
  };

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  x.array() -= x.mean();
  x.normalize();

  double previous = -1.0;
  for (long it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    Vector z1 = apply(x);
    const double n1 = z1.norm();
    if (n1 <= 1e-300) {
      out.modulus = 0.0;
      out.gap = 1.0;
      out.converged = true;
      return out;
    }
    Vector z2 = apply(z1);

    // One-term fit z1 ~ c z0 (real dominant eigenvalue).
    const double c = z1.dot(x);
    const double one_term = (z1 - c * x).norm();
    double estimate;
    if (one_term <= 1e-9 * n1) {
      estimate = std::abs(c);
    } else {
      // Two-term fit z2 ~ a z1 + b z0; eigenvalues are roots of t^2 - a t - b.
      Eigen::Matrix2d g;
      g << z1.dot(z1), z1.dot(x), x.dot(z1), x.dot(x);
      Eigen::Vector2d h(z2.dot(z1), z2.dot(x));
      Eigen::Vector2d ab = g.fullPivLu().solve(h);
      const double a = ab[0], b = ab[1];
      const double disc = a * a + 4.0 * b;
      if (disc < 0.0) estimate = std::sqrt(std::abs(b));
      else estimate = std::max(std::abs(0.5 * (a + std::sqrt(disc))), std::abs(0.5 * (a - std::sqrt(disc))));
    }
    out.modulus = estimate;
    out.gap = 1.0 - estimate;
    if (std::abs(estimate - previous) <= tolerance) {
      out.converged = true;
      return out;
    }
    previous = estimate;
    x = z1 / n1;
  }
  return out;
}

Stepper projected_stepper(Matrix p_matrix) {
  return [pt = Matrix(p_matrix.transpose())](const Vector& x) { return StepResult{pt * x, 0.0}; };
}

Stepper merge_stepper(MergeKernel kernel, bool renormalize) {
  return [k = std::move(kernel), renormalize](const Vector& x) {
    auto s = merge_step(k, x, renormalize);
    return StepResult{std::move(s.next), s.leaked_mass};
  };
}

MixingCurve mixing_curve(const Stepper& step, const Vector& p0, const Vector& p, long steps) {
  if (steps < 1) throw InvalidInput("mixing_curve needs at least one step");
  if (p0.size() != p.size()) throw InvalidInput("mixing_curve: dimension mismatch");
  MixingCurve curve;
  Vector x = p0;
  curve.samples.push_back({0, (x - p).lpNorm<1>(), 0.0});
  long next_log = 10'000;
  for (long t = 1; t <= steps; ++t) {
    StepResult r = step(x);
    x = std::move(r.next);
    curve.max_leak = std::max(curve.max_leak, r.leaked_mass);
    bool keep = t <= 10'000 || t == steps;
    if (t > 10'000 && t >= next_log) {
      keep = true;
      next_log = std::max(t + 1, static_cast<long>(std::ceil(static_cast<double>(t) * std::pow(10.0, 0.01))));
    }
    if (keep) curve.samples.push_back({t, (x - p).lpNorm<1>(), r.leaked_mass});
  }
  return curve;
}

void write_curve_csv(std::ostream& os, const MixingCurve& curve, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "t,l1_error\n";
  char buf[64];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.error);
    os << s.t << ',' << buf << '\n';
  }
}

}  // namespace hypermerw
