// Acceptance suite: one PASS/FAIL line per criterion, artifacts under --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypermerw/analysis.hpp"
#include "hypermerw/error.hpp"
#include "hypermerw/movielens.hpp"
#include "hypermerw/oracle.hpp"
#include "hypermerw/serialize.hpp"
#include "support/instances.hpp"

using namespace hypermerw;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Artifacts = std::map<std::string, std::string>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string g3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string summary;
};

// ---------------------------------------------------------------------------
// Random constraint-satisfaction batches (criteria 1, 2, 4, 7)

constexpr double kEps = 1e-10;
constexpr long kMaxIter = 10000;

struct BatchRecord {
  std::string label;
  bool ok = false;
  std::string error;
  long iterations = 0;
  double residual = INFINITY;
  double certificate = INFINITY;
  double worst_decay = 0.0;  // max r_{t+10}/r_t over r_t <= 1e-2
  double seconds = 0.0;
};

std::vector<int> layer_sizes(int i) {
  switch (i % 3) {
    case 0: return {2};
    case 1: return {3};
    default: return {2, 3};
  }
}

double worst_decay(const std::vector<double>& r) {
  double worst = 0.0;
  for (std::size_t t = 0; t + 10 < r.size(); ++t)
    if (r[t] <= 1e-2 && r[t] > 0.0) worst = std::max(worst, r[t + 10] / r[t]);
  return worst;
}

std::vector<BatchRecord> broadcast_batch() {
  std::mt19937_64 rng(1001);
  std::vector<BatchRecord> out;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 4);
    auto inst = hm_test::random_broadcast_instance(rng, n, layer_sizes(i / 4), i % 2 == 1);
    BatchRecord rec;
    rec.label = inst.label;
    BroadcastOptions opt;
    opt.tolerance = kEps;
    opt.max_iter = kMaxIter;
    const auto start = Clock::now();
    try {
      auto b = infer_broadcast(inst.a, inst.p, inst.weights, opt);
      rec.seconds = seconds_since(start);
      rec.iterations = b.trace.iterations;
      rec.residual = b.residual();
      rec.ok = b.trace.converged;
      rec.certificate = verify_front_factorization(b.layers, pivot_weighted_reference(inst.a, b.source, b.weights));
      rec.worst_decay = worst_decay(b.trace.residuals);
    } catch (const Error& e) {
      rec.seconds = seconds_since(start);
      rec.error = e.what();
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<BatchRecord> merge_batch() {
  std::mt19937_64 rng(2002);
  std::vector<BatchRecord> out;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 4);
    auto inst = hm_test::random_merge_instance(rng, n, layer_sizes(i / 4), i % 2 == 1);
    BatchRecord rec;
    rec.label = inst.label;
    MergeOptions opt;
    opt.tolerance = kEps;
    opt.max_iter = kMaxIter;
    const auto start = Clock::now();
    try {
      auto m = infer_merge(inst.a, inst.p, inst.weights, opt);
      rec.seconds = seconds_since(start);
      rec.iterations = m.trace.iterations;
      // Full coverage: the stationarity target is p itself.
      rec.residual = std::max(m.residual(), std::abs(m.coverage - 1.0));
      rec.ok = m.trace.converged;
      rec.certificate = verify_back_factorization(m.layers, merge_reference(inst.a, inst.p, inst.weights));
      rec.worst_decay = worst_decay(m.trace.residuals);
    } catch (const Error& e) {
      rec.seconds = seconds_since(start);
      rec.error = e.what();
    }
    out.push_back(rec);
  }
  return out;
}

std::string batch_csv(const std::vector<BatchRecord>& batch) {
  std::ostringstream os;
  os << "instance,label,converged,iterations,residual,certificate,worst_decay_ratio,error\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& r = batch[i];
    os << i << ',' << r.label << ',' << (r.ok ? "true" : "false") << ',' << r.iterations << ','
       << g17(r.residual) << ',' << g17(r.certificate) << ',' << g17(r.worst_decay) << ",\"" << r.error
       << "\"\n";
  }
  return os.str();
}

Verdict constraint_verdict(const std::vector<BatchRecord>& batch) {
  Verdict v;
  double worst = 0.0, slowest = 0.0;
  long most = 0;
  int failed = 0;
  for (const auto& r : batch) {
    const bool ok = r.ok && r.residual <= kEps && r.iterations <= kMaxIter && r.seconds < 1.0;
    failed += !ok;
    worst = std::max(worst, r.residual);
    slowest = std::max(slowest, r.seconds);
    most = std::max(most, r.iterations);
  }
  v.pass = failed == 0;
  v.summary = std::to_string(batch.size() - failed) + "/" + std::to_string(batch.size()) +
              " instances within 1e-10; max residual " + g3(worst) + ", max iterations " + std::to_string(most) +
              ", max runtime " + g3(slowest) + " s";
  return v;
}

// ---------------------------------------------------------------------------
// Oracle equivalence (criterion 3)

std::vector<DenseTensor> joint_broadcast(const BroadcastKernel& b) {
  std::vector<DenseTensor> out;
  for (const auto& [k, t] : b.layers) {
    DenseTensor d = t.to_dense();
    for (std::size_t f = 0; f < d.size(); ++f) d[f] *= b.weights.at(k) * b.source[d.multi_index(f)[0]];
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DenseTensor> joint_merge(const MergeKernel& m) {
  std::vector<DenseTensor> out;
  for (const auto& [k, t] : m.layers) {
    DenseTensor d = t.to_dense();
    for (std::size_t f = 0; f < d.size(); ++f) {
      auto idx = d.multi_index(f);
      double w = m.weights.at(k);
      for (int s = 0; s + 1 < k; ++s) w *= m.stationary[idx[s]];
      d[f] *= w;
    }
    out.push_back(std::move(d));
  }
  return out;
}

double entrywise_gap(const std::vector<DenseTensor>& x, const std::vector<DenseTensor>& y) {
  if (x.size() != y.size()) return INFINITY;
  double g = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (x[b].size() != y[b].size()) return INFINITY;
    for (std::size_t i = 0; i < x[b].size(); ++i) g = std::max(g, std::abs(x[b][i] - y[b][i]));
  }
  return g;
}

Verdict criterion3(Artifacts& art) {
  std::mt19937_64 rng(3003);
  std::ostringstream os;
  os << "instance,kind,label,kl_scaling,kl_oracle,kl_gap,entrywise_gap\n";
  double worst_kl = 0.0, worst_entry = 0.0;
  int failed = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 2);
    const bool ref = i % 3 == 1;
    auto record = [&](const char* kind, const std::string& label, double kl, double kl_oracle, double gap) {
      os << i << ',' << kind << ',' << label << ',' << g17(kl) << ',' << g17(kl_oracle) << ','
         << g17(std::abs(kl - kl_oracle)) << ',' << g17(gap) << '\n';
      worst_kl = std::max(worst_kl, std::abs(kl - kl_oracle));
      worst_entry = std::max(worst_entry, gap);
      failed += !(std::abs(kl - kl_oracle) <= 1e-6 && gap <= 1e-6);
    };
    try {
      auto inst = i < 10 ? hm_test::random_broadcast_instance(rng, n, {3}, ref)
                         : hm_test::random_broadcast_instance(rng, n, {3}, ref, false, 0.8);
      auto b = infer_broadcast(inst.a, inst.p, inst.weights);
      auto o = kl_project_dense(broadcast_projection_problem(inst.a, inst.p, inst.weights));
      record("broadcast", inst.label, broadcast_divergence(b, inst.a), o.divergence,
             entrywise_gap(joint_broadcast(b), o.solution));
    } catch (const Error& e) {
      ++failed;
      os << i << ",broadcast,error,,,,\"" << e.what() << "\"\n";
    }
    try {
      auto inst = i < 10 ? hm_test::random_merge_instance(rng, n, {3}, ref)
                         : hm_test::random_merge_instance(rng, n, {3}, ref, 0.6, false);
      auto m = infer_merge(inst.a, inst.p, inst.weights);
      auto o = kl_project_dense(merge_projection_problem(inst.a, inst.p, inst.weights));
      record("merge", inst.label, merge_divergence(m, inst.a), o.divergence,
             entrywise_gap(joint_merge(m), o.solution));
    } catch (const Error& e) {
      ++failed;
      os << i << ",merge,error,,,,\"" << e.what() << "\"\n";
    }
  }
  art["c03_oracle.csv"] = os.str();
  return {failed == 0, std::to_string(40 - failed) + "/40 broadcast+merge instances agree; max KL gap " +
                           g3(worst_kl) + ", max entrywise gap " + g3(worst_entry) + " (tol 1e-6)"};
}

// ---------------------------------------------------------------------------
// Printed 8-node experiments (criteria 5, 6)

std::string matrix_csv(const Matrix& m) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << g17(m(i, j));
    os << '\n';
  }
  return os.str();
}

Matrix block_projected(const LayerWeights& w) {
  AdjacencyLayers a;
  a.orientation = Orientation::OneTail;
  a.dim = 8;
  for (const auto& [k, x] : w) {
    auto layer = adjacency_layers(hm_test::block_broadcast_graph(k), Orientation::OneTail);
    a.layers.emplace(k, layer.layers.at(k));
  }
  return projected_kernel(infer_broadcast(a, hm_test::block_broadcast_p(), w)).P;
}

Verdict criterion5(Artifacts& art) {
  const Matrix printed = hm_test::printed_projected_kernel();
  const Vector p = hm_test::block_broadcast_p();
  const double printed_res = stationarity_residual(printed, p);
  bool pass = printed_res <= 5e-3;
  std::string detail = "printed P stationarity residual " + g3(printed_res) + " (tol 5e-3)";
  const std::vector<std::pair<std::string, LayerWeights>> variants{
      {"k2", {{2, 1.0}}}, {"k3", {{3, 1.0}}}, {"mix", {{2, 0.5}, {3, 0.5}}}};
  double worst_row = 0.0, worst_stat = 0.0;
  bool pattern = true;
  for (const auto& [name, w] : variants) {
    try {
      const Matrix P = block_projected(w);
      worst_row = std::max(worst_row, (P.rowwise().sum().array() - 1.0).abs().maxCoeff());
      worst_stat = std::max(worst_stat, stationarity_residual(P, p));
      pattern = pattern && ((P.array() > 0.0) == (printed.array() > 0.0)).all();
      art["c05_projected_" + name + ".csv"] = matrix_csv(P);
    } catch (const Error& e) {
      pass = false;
      detail += "; " + name + " failed: " + e.what();
    }
  }
  pass = pass && worst_row <= 1e-8 && worst_stat <= 1e-8 && pattern;
  detail += "; inferred k=2, k=3, mixture: |P1-1| " + g3(worst_row) + ", |P^T p-p| " + g3(worst_stat) +
            " (tol 1e-8), zero pattern " + (pattern ? "matches" : "differs");
  return {pass, detail};
}

Verdict criterion6(Artifacts& art) {
  const auto slices = hm_test::printed_merge_slices();
  bool symmetric = true;
  for (const auto& s : slices) symmetric = symmetric && s == s.transpose();
  std::string detail = std::string("printed slices ") + (symmetric ? "symmetric" : "NOT symmetric");
  bool pass = symmetric;

  Vector p = hm_test::printed_merge_p();
  p /= p.sum();
  const std::vector<std::pair<std::string, LayerWeights>> variants{
      {"k2", {{2, 1.0}}}, {"k3", {{3, 1.0}}}, {"mix", {{2, 0.5}, {3, 0.5}}}};
  double worst_stochastic = 0.0, worst_asym = 0.0, worst_stat = 0.0;
  bool pattern = true;
  for (const auto& [name, w] : variants) {
    try {
      AdjacencyLayers a;
      a.orientation = Orientation::OneHead;
      a.dim = 8;
      for (const auto& [k, x] : w)
        a.layers.emplace(k, adjacency_layers(hm_test::printed_merge_graph(k), Orientation::OneHead).layers.at(k));
      auto m = infer_merge(a, p, w);
      worst_stat = std::max(worst_stat, m.stationarity_residual + std::abs(m.coverage - 1.0));
      std::ostringstream os;
      os << "k,tail,receiver,value\n";
      for (const auto& [k, t] : m.layers) {
        const DenseTensor d = t.to_dense();
        const std::size_t tuples = d.size() / 8;
        for (std::size_t tail = 0; tail < tuples; ++tail) {
          double mass = 0.0;
          for (std::size_t j = 0; j < 8; ++j) mass += d[tail * 8 + j];
          worst_stochastic = std::max(worst_stochastic, std::abs(mass - 1.0));
        }
        for (std::size_t f = 0; f < d.size(); ++f) {
          auto idx = d.multi_index(f);
          auto swapped = idx;
          if (k == 3) std::swap(swapped[0], swapped[1]);
          worst_asym = std::max(worst_asym, std::abs(d[f] - d.at(swapped)));
          if (k == 3 && idx[2] < 3)
            pattern = pattern && ((d[f] > 0.0) == (slices[idx[2]](idx[0], idx[1]) > 0.0));
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
          os << k << ",\"";
          auto g = t.group(i);
          for (std::size_t s = 0; s < g.size(); ++s) os << (s ? " " : "") << g[s] + 1;
          os << "\"," << t.distinguished(i) + 1 << ',' << g17(t.value(i)) << '\n';
        }
      }
      art["c06_merge_" + name + ".csv"] = os.str();
    } catch (const Error& e) {
      pass = false;
      detail += "; " + name + " failed: " + e.what();
    }
  }
  pass = pass && worst_stochastic <= 1e-8 && worst_asym == 0.0 && pattern;
  detail += "; inferred k=2, k=3, mixture: output-stochastic within " + g3(worst_stochastic) +
            " (tol 1e-8), max back-asymmetry " + g3(worst_asym) + ", stationarity " + g3(worst_stat) +
            ", printed zero pattern " + (pattern ? "kept" : "lost");
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// Merge contraction (criterion 8)

Verdict criterion8(Artifacts& art) {
  std::mt19937_64 rng(8008);
  std::exponential_distribution<double> expo(1.0);
  std::ostringstream os;
  os << "kernel,label,contraction_constant,kernel_residual,start,steps,final_error,worst_step_excess\n";
  int kernels = 0, attempts = 0, failed = 0;
  double worst_final = 0.0, worst_excess = -INFINITY;
  while (kernels < 20 && attempts < 2000) {
    ++attempts;
    const std::size_t n = 3 + static_cast<std::size_t>(attempts % 2);
    auto inst = hm_test::random_merge_instance(rng, n, attempts % 3 == 0 ? std::vector<int>{3} : std::vector<int>{2, 3},
                                               attempts % 2 == 1);
    MergeOptions opt;
    opt.tolerance = 1e-14;
    opt.record_history = false;
    MergeKernel m;
    try {
      m = infer_merge(inst.a, inst.p, inst.weights, opt);
    } catch (const Error&) {
      continue;
    }
    const double c = contraction_constant(m);
    if (!(c < 1.0)) continue;
    for (int s = 0; s < 10; ++s) {
      Vector x(static_cast<Eigen::Index>(n));
      for (auto& z : x) z = expo(rng);
      x /= x.sum();
      double err = (x - m.stationary).lpNorm<1>();
      double excess = -INFINITY;
      long steps = 0;
      while (err > 1e-10 && steps < 100000) {
        const Vector next = merge_step(m, x).next;
        const double e = (next - m.stationary).lpNorm<1>();
        excess = std::max(excess, e - (c * err + 1e-12));
        x = next;
        err = e;
        ++steps;
      }
      const bool ok = err <= 1e-10 && excess <= 0.0;
      failed += !ok;
      worst_final = std::max(worst_final, err);
      worst_excess = std::max(worst_excess, excess);
      os << kernels << ',' << inst.label << ',' << g17(c) << ',' << g17(m.residual()) << ',' << s << ','
         << steps << ',' << g17(err) << ',' << g17(excess) << '\n';
    }
    ++kernels;
  }
  art["c08_contraction.csv"] = os.str();
  const bool pass = kernels == 20 && failed == 0;
  return {pass, std::to_string(kernels) + " certified kernels (" + std::to_string(attempts) + " drawn), " +
                    std::to_string(kernels * 10 - failed) + "/" + std::to_string(kernels * 10) +
                    " runs reach 1e-10 with err_{t+1} <= c err_t + 1e-12; max final error " + g3(worst_final) +
                    ", max step excess " + g3(worst_excess)};
}

// ---------------------------------------------------------------------------
// Broadcast mixing envelope (criterion 9)

struct EnvelopeResult {
  bool monotone = true;
  bool within_bound = true;
  long bound = 0;
  long hit = -1;  // first t with error < 1e-8, -1 if not reached by the horizon
};

EnvelopeResult envelope(const Matrix& P, const Vector& p, const Vector& p0, double gap) {
  EnvelopeResult r;
  r.bound = static_cast<long>(std::ceil(10.0 / gap));
  const long horizon = std::max<long>(20 * r.bound, 2000);
  Vector x = p0;
  double err = (x - p).lpNorm<1>();
  for (long t = 0; t <= horizon; ++t) {
    if (err < 1e-8) {
      r.hit = t;
      break;
    }
    const Vector next = P.transpose() * x;
    const double e = (next - p).lpNorm<1>();
    if (e > err * (1.0 + 1e-12) + 1e-16) r.monotone = false;
    x = next;
    err = e;
  }
  r.within_bound = r.hit >= 0 && r.hit <= r.bound;
  return r;
}

Verdict criterion9(Artifacts& art) {
  const Vector p = hm_test::block_broadcast_p();
  const Matrix p2 = block_projected({{2, 1.0}}), p3 = block_projected({{3, 1.0}});
  std::ostringstream curves, gaps, runs;
  curves << "# block 8-node instance, P(lambda) = (1 - lambda) P_k2 + lambda P_k3, p0 = delta at node 1\n";
  curves << "lambda,t,l1_error\n";
  gaps << "lambda,spectral_gap,modulus,bound_10_over_gap,steps_to_1e-8_from_node1\n";
  runs << "instance,start,spectral_gap,bound,steps_to_1e-8,monotone\n";
  int total = 0, monotone = 0, within = 0;

  auto check = [&](const std::string& name, const Matrix& P, const Vector& stat, double gap) {
    long node1 = -1;
    for (Eigen::Index s = 0; s < P.rows(); ++s) {
      Vector p0 = Vector::Zero(P.rows());
      p0[s] = 1.0;
      auto r = envelope(P, stat, p0, gap);
      if (s == 0) node1 = r.hit;
      ++total;
      monotone += r.monotone;
      within += r.within_bound && r.monotone;
      runs << name << ',' << s + 1 << ',' << g17(gap) << ',' << r.bound << ',' << r.hit << ','
           << (r.monotone ? "true" : "false") << '\n';
    }
    return node1;
  };

  std::string gap_list;
  for (int i = 0; i <= 10; ++i) {
    const double l = i / 10.0;
    const Matrix P = (1.0 - l) * p2 + l * p3;
    if (!is_primitive(P)) continue;
    const auto gap = spectral_gap(P);
    const long hit = check("block lambda=" + g17(l), P, p, gap.gap);
    auto curve = mixing_curve(projected_stepper(P), Vector::Unit(8, 0), p, 1000);
    for (const auto& s : curve.samples) curves << g17(l) << ',' << s.t << ',' << g17(s.error) << '\n';
    gaps << g17(l) << ',' << g17(gap.gap) << ',' << g17(gap.modulus) << ',' << std::ceil(10.0 / gap.gap) << ','
         << hit << '\n';
    if (i % 5 == 0) gap_list += (gap_list.empty() ? "" : ", ") + ("gap(" + g17(l) + ")=" + g3(gap.gap));
  }

  std::mt19937_64 rng(9009);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 4);
    auto inst = hm_test::random_broadcast_instance(rng, n, layer_sizes(i), i % 2 == 1);
    auto pk = projected_kernel(infer_broadcast(inst.a, inst.p, inst.weights));
    if (!is_primitive(pk.P)) continue;
    check("random " + std::to_string(i) + " " + inst.label, pk.P, pk.stationary, spectral_gap(pk.P).gap);
  }

  art["c09_block_mixture_curves.csv"] = curves.str();
  art["c09_block_mixture_gaps.csv"] = gaps.str();
  art["c09_envelope_runs.csv"] = runs.str();
  return {within == total, std::to_string(within) + "/" + std::to_string(total) +
                               " delta starts reach 1e-8 within ceil(10/gap) steps (" + std::to_string(monotone) +
                               " monotone); block mixtures " + gap_list};
}

// ---------------------------------------------------------------------------
// MovieLens ordering (criterion 10)

std::string ratings_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("HYPERMERW_ML100K")) return env;
#ifdef HYPERMERW_ML100K
  return HYPERMERW_ML100K;
#else
  return "data/ml-100k/u.data";
#endif
}

Verdict criterion10(Artifacts& art, const std::string& path) {
  using namespace movielens;
  if (!fs::exists(path)) return {false, "ratings file not found at " + path + " (run tools/fetch_ml100k.sh)"};
  const auto start = Clock::now();
  auto corpus = build_events(parse_ratings(read_file(path)), 500, 0.8);
  auto kernel = fit_merw(corpus);
  auto merw = merw_ranker(kernel);
  auto lazy = baseline_lazy_rw(corpus);
  auto pop = baseline_popularity(corpus);
  auto report = evaluate(corpus, kernel, {merw.get(), lazy.get(), pop.get()}, {10, 20, 30, 40, 100});
  const double elapsed = seconds_since(start);

  std::ostringstream csv, table;
  report.write_csv(csv, {"ratings=ml-100k u.data", "topn=500 split=0.8 k=3"});
  report.write_table(table);
  art["c10_movielens.csv"] = csv.str();
  art["c10_movielens_table.txt"] = table.str();

  bool ordered = true;
  std::string detail;
  for (std::size_t L : {10, 100}) {
    const double m = report.hit_rate("MERW", "seen-edge", L);
    const double l = report.hit_rate("LazyRW", "seen-edge", L);
    const double q = report.hit_rate("Popularity", "seen-edge", L);
    ordered = ordered && m >= l && l >= q;
    char buf[160];
    std::snprintf(buf, sizeof buf, "L=%zu MERW %.4f LazyRW %.4f Popularity %.4f; ", L, m, l, q);
    detail += buf;
  }
  const bool fast = elapsed < 300.0;
  return {ordered && fast, "seen-edge N=" + std::to_string(report.seen_edge) + ": " + detail + "runtime " +
                               g3(elapsed) + " s" + (ordered ? "" : " (ordering violated)")};
}

// ---------------------------------------------------------------------------

struct Suite {
  std::string ratings;
  Artifacts artifacts;
  std::map<int, Verdict> verdicts;

  void run() {
    const auto b = broadcast_batch();
    const auto m = merge_batch();
    artifacts["c01_broadcast_batch.csv"] = batch_csv(b);
    artifacts["c02_merge_batch.csv"] = batch_csv(m);
    verdicts[1] = constraint_verdict(b);
    verdicts[2] = constraint_verdict(m);
    verdicts[3] = criterion3(artifacts);

    double front = 0.0, back = 0.0;
    int solved = 0;
    for (const auto& r : b)
      if (r.ok) front = std::max(front, r.certificate), ++solved;
    for (const auto& r : m)
      if (r.ok) back = std::max(back, r.certificate), ++solved;
    verdicts[4] = {front <= 1e-8 && back <= 1e-8, std::to_string(solved) + " inferences; max front residual " +
                                                      g3(front) + ", max back residual " + g3(back) + " (tol 1e-8)"};

    verdicts[5] = criterion5(artifacts);
    verdicts[6] = criterion6(artifacts);

    double decay = 0.0;
    for (const auto& r : b) decay = std::max(decay, r.worst_decay);
    verdicts[7] = {decay <= 0.9, "max r_{t+10}/r_t over r_t <= 1e-2 on criterion-1 runs: " + g3(decay) +
                                     " (bound 0.9)"};

    verdicts[8] = criterion8(artifacts);
    verdicts[9] = criterion9(artifacts);
    verdicts[10] = criterion10(artifacts, ratings);
  }
};

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir, ratings;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc)
      out_dir = argv[++i];
    else if (arg == "--ratings" && i + 1 < argc)
      ratings = argv[++i];
    else {
      std::cerr << "usage: acceptance [--out DIR] [--ratings u.data]\n";
      return 1;
    }
  }
  ratings = ratings_path(ratings);

  Suite first{ratings, {}, {}};
  Suite second{ratings, {}, {}};
  try {
    first.run();
    second.run();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << '\n';
    return 1;
  }

  std::vector<std::string> differing;
  for (const auto& [name, bytes] : first.artifacts) {
    auto it = second.artifacts.find(name);
    if (it == second.artifacts.end() || it->second != bytes) differing.push_back(name);
  }
  if (first.artifacts.size() != second.artifacts.size()) differing.push_back("(artifact set)");
  std::string diff_list;
  for (const auto& d : differing) diff_list += " " + d;
  first.verdicts[11] = {differing.empty(), std::to_string(first.artifacts.size()) +
                                               " artifacts regenerated, " +
                                               (differing.empty() ? "all byte-identical" : "differing:" + diff_list)};

  if (!out_dir.empty()) {
    try {
      fs::create_directories(out_dir);
      for (const auto& [name, bytes] : first.artifacts) write_file(fs::path(out_dir) / name, bytes);
    } catch (const std::exception& e) {
      std::cout << "cannot write artifacts: " << e.what() << '\n';
      return 1;
    }
  }

  int failures = 0;
  for (const auto& [id, v] : first.verdicts) {
    std::printf("criterion %2d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.summary.c_str());
    failures += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(first.verdicts.size()) - failures,
              first.verdicts.size());
  return failures == 0 ? 0 : 1;
}
