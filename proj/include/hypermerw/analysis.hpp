#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hypermerw/broadcast.hpp"
#include "hypermerw/merge.hpp"

namespace hypermerw {

/// Node-level transition matrix of a broadcasting kernel.
struct ProjectedKernel {
  Matrix P;
  Vector stationary;
};

/// P = sum_k lambda_k * receiver_marginal_matrix(B^(k)).
ProjectedKernel projected_kernel(const BroadcastKernel& kernel);

/// True iff some power of the support of P (at most the Wielandt bound
/// n^2 - 2n + 2) is entrywise positive.
bool is_primitive(const Matrix& p);

/// max |P^T p - p|.
double stationarity_residual(const Matrix& p_matrix, const Vector& p);

/// Solves P^T p = p, sum p = 1 (least squares; meaningful for irreducible P).
Vector stationary_distribution(const Matrix& p_matrix);

struct SpectralGap {
  double gap = 0.0;      // 1 - |lambda_2|
  double modulus = 0.0;  // |lambda_2|
  long iterations = 0;
  bool converged = false;
};

/// Power iteration on P^T restricted to zero-sum vectors (the operator with
/// the stationary pair deflated). A two-term recurrence fit resolves complex
/// or sign-alternating dominant pairs.
SpectralGap spectral_gap(const Matrix& p_matrix, double tolerance = 1e-10, long max_iter = 10000);

struct StepResult {
  Vector next;
  double leaked_mass = 0.0;
};
using Stepper = std::function<StepResult(const Vector&)>;

/// p -> P^T p.
Stepper projected_stepper(Matrix p_matrix);
/// p -> merge_step(kernel, p).
Stepper merge_stepper(MergeKernel kernel, bool renormalize = false);

struct MixingSample {
  long t = 0;
  double error = 0.0;        // || p_t - p ||_1
  double leaked_mass = 0.0;  // leak of the step that produced p_t
};

struct MixingCurve {
  std::vector<MixingSample> samples;
  double max_leak = 0.0;  // over every step, sampled or not
};

/// Samples every step up to t = 10^4, then about 100 log-spaced steps per
/// decade, always including T.
MixingCurve mixing_curve(const Stepper& step, const Vector& p0, const Vector& p, long steps);

/// CSV with header `t,l1_error` and 17 significant digits. `comments` are
/// written first as `# ` lines.
void write_curve_csv(std::ostream& os, const MixingCurve& curve,
                     const std::vector<std::string>& comments = {});

}  // namespace hypermerw
