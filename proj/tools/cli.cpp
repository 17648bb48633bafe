#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypermerw/analysis.hpp"
#include "hypermerw/broadcast.hpp"
#include "hypermerw/error.hpp"
#include "hypermerw/hypergraph.hpp"
#include "hypermerw/merge.hpp"
#include "hypermerw/movielens.hpp"
#include "hypermerw/serialize.hpp"

namespace hypermerw::cli {

namespace {

using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kIo = 3;

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InvalidInput("cannot read " + what + " from '" + s + "'");
  return x;
}

bool looks_numeric(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789.,eE+- ") == std::string::npos;
}

/// "uniform", an inline comma list, or a JSON file (array or {"p": [...]}).
Vector read_vector(const std::string& spec, std::size_t n, const std::string& what) {
  Vector v;
  if (spec == "uniform") {
    v = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  } else if (looks_numeric(spec) && !std::filesystem::exists(spec)) {
    auto parts = split(spec, ',');
    v.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(parts[i], what);
  } else {
    json doc;
    try {
      doc = json::parse(read_file(spec));
    } catch (const json::exception& ex) {
      throw InvalidInput(what + " file '" + spec + "' is not valid JSON: " + ex.what());
    }
    v = vector_from_json(doc);
  }
  if (static_cast<std::size_t>(v.size()) != n)
    throw InvalidInput(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw InvalidInput(what + " must be strictly positive (entry " + std::to_string(i + 1) + ")");
  const double sum = v.sum();
  if (std::abs(sum - 1.0) > 1e-12) {
    if (std::abs(sum - 1.0) > 1e-9)
      std::cerr << "notice: " << what << " sums to " << g17(sum) << "; renormalized to 1\n";
    v /= sum;
  }
  return v;
}

/// "k=w" pairs; without any, equal weights over the layers present.
LayerWeights read_weights(const std::vector<std::string>& specs, const AdjacencyLayers& a) {
  LayerWeights w;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidInput("--lambda expects k=weight, got '" + s + "'");
    const double k = to_double(s.substr(0, eq), "layer size");
    if (k != std::floor(k) || k < 2) throw InvalidInput("layer size must be an integer >= 2 in '" + s + "'");
    w[static_cast<int>(k)] = to_double(s.substr(eq + 1), "layer weight");
  }
  if (w.empty())
    for (const auto& [k, t] : a.layers) w[k] = 1.0 / static_cast<double>(a.layers.size());
  return w;
}

json weights_json(const LayerWeights& w) {
  json o = json::object();
  for (const auto& [k, x] : w) o[std::to_string(k)] = x;
  return o;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
}

DegreeScope read_scope(const std::string& s) {
  if (s == "global") return DegreeScope::Global;
  if (s == "per-layer") return DegreeScope::PerLayer;
  throw InvalidInput("--degree must be global or per-layer");
}

struct InferArgs {
  std::string graph;
  std::string p;
  std::vector<std::string> lambda;
  double eps = 1e-10;
  long max_iter = 100000;
  std::string degree = "global";
  std::string source;
  std::string out;
};

void add_infer_options(CLI::App* cmd, InferArgs& a, bool broadcast) {
  cmd->add_option("--graph", a.graph, "Hypergraph JSON file")->required();
  cmd->add_option("--p", a.p, "Stationary vector: uniform, inline list, or JSON file")->required();
  cmd->add_option("--lambda", a.lambda, "Layer weight k=w (repeatable; default equal weights)");
  cmd->add_option("--eps", a.eps, "Residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", a.max_iter, "Maximum scaling sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--degree", a.degree, "Degree normalization: global or per-layer");
  if (broadcast) cmd->add_option("--source", a.source, "Pivot distribution q (defaults to p)");
  cmd->add_option("--out", a.out, "Output kernel JSON (default stdout)");
}

json infer_config(const std::string& command, const InferArgs& a, const LayerWeights& w) {
  json c = {{"command", command}, {"graph", a.graph},   {"p", a.p},
            {"lambda", weights_json(w)}, {"eps", a.eps}, {"max_iter", a.max_iter},
            {"degree", a.degree}};
  if (!a.source.empty()) c["source"] = a.source;
  return c;
}

void report_residuals(const std::string& what, double first, double second, const ScalingTrace& trace,
                      const std::string& first_name) {
  std::cerr << what << ": " << first_name << " residual " << g17(first) << ", stationarity residual "
            << g17(second) << ", " << trace.iterations << " sweeps"
            << (trace.converged ? "" : " (tolerance not reached)") << '\n';
}

int infer_broadcast_cmd(const InferArgs& a) {
  auto h = parse_hypergraph(read_file(a.graph));
  auto layers = adjacency_layers(h, Orientation::OneTail, read_scope(a.degree));
  const Vector p = read_vector(a.p, h.node_count(), "p");
  const LayerWeights w = read_weights(a.lambda, layers);
  BroadcastOptions opt;
  opt.tolerance = a.eps;
  opt.max_iter = a.max_iter;
  opt.record_history = false;
  if (!a.source.empty()) opt.source = read_vector(a.source, h.node_count(), "source");
  auto kernel = infer_broadcast(layers, p, w, opt);
  json doc = to_json(kernel);
  doc["config"] = infer_config("infer-broadcast", a, w);
  doc["residuals"]["divergence"] = broadcast_divergence(kernel, layers);
  emit(a.out, doc.dump(2) + "\n");
  report_residuals("infer-broadcast", kernel.row_residual, kernel.stationarity_residual, kernel.trace, "row");
  return kOk;
}

int infer_merge_cmd(const InferArgs& a) {
  auto h = parse_hypergraph(read_file(a.graph));
  auto layers = adjacency_layers(h, Orientation::OneHead, read_scope(a.degree));
  const Vector p = read_vector(a.p, h.node_count(), "p");
  const LayerWeights w = read_weights(a.lambda, layers);
  MergeOptions opt;
  opt.tolerance = a.eps;
  opt.max_iter = a.max_iter;
  opt.record_history = false;
  auto kernel = infer_merge(layers, p, w, opt);
  json doc = to_json(kernel);
  doc["config"] = infer_config("infer-merge", a, w);
  doc["residuals"]["divergence"] = merge_divergence(kernel, layers);
  emit(a.out, doc.dump(2) + "\n");
  report_residuals("infer-merge", kernel.context_residual, kernel.stationarity_residual, kernel.trace, "context");
  if (kernel.coverage < 1.0 - 1e-12)
    std::cerr << "notice: supported contexts cover " << g17(kernel.coverage)
              << " of the stationary context mass; stationarity targets coverage * p\n";
  return kOk;
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + ex.what());
  }
}

struct SimulateArgs {
  std::vector<std::string> kernels;
  std::string mix;
  std::string sweep;
  long T = 100;
  std::string p0 = "delta:1";
  bool renormalize = false;
  std::uint64_t seed = 0;
  std::string out;
};

Vector read_p0(const std::string& spec, std::size_t n, std::uint64_t seed) {
  if (spec.rfind("delta:", 0) == 0) {
    const double i = to_double(spec.substr(6), "delta node");
    if (i != std::floor(i) || i < 1 || i > static_cast<double>(n))
      throw InvalidInput("--p0 delta node must lie in [1, " + std::to_string(n) + "]");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
    v[static_cast<Eigen::Index>(i) - 1] = 1.0;
    return v;
  }
  if (spec == "random") {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e(1.0);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = e(rng);
    return v / v.sum();
  }
  return read_vector(spec, n, "p0");
}

std::string describe(const MixingCurve& c) {
  return "final_l1_error=" + g17(c.samples.back().error) + " max_leaked_mass=" + g17(c.max_leak);
}

int simulate_cmd(const SimulateArgs& a) {
  if (a.kernels.empty()) throw InvalidInput("simulate needs at least one --kernel");
  if (a.T < 1) throw InvalidInput("--T must be at least 1");
  std::vector<json> docs;
  for (const auto& k : a.kernels) docs.push_back(load_json(k));
  const KernelKind kind = kernel_kind(docs.front());
  for (const auto& d : docs)
    if (kernel_kind(d) != kind) throw InvalidInput("all --kernel files must have the same type");

  std::vector<std::string> comments{"command=simulate"};
  for (const auto& k : a.kernels) comments.push_back("kernel=" + k);
  comments.push_back("T=" + std::to_string(a.T));
  comments.push_back("p0=" + a.p0);
  comments.push_back("seed=" + std::to_string(a.seed));

  if (kind == KernelKind::Merge) {
    if (docs.size() != 1 || !a.mix.empty() || !a.sweep.empty())
      throw InvalidInput("merge simulation takes exactly one --kernel and no --mix/--sweep");
    MergeKernel m = merge_kernel_from_json(docs.front());
    const Vector p0 = read_p0(a.p0, static_cast<std::size_t>(m.stationary.size()), a.seed);
    comments.push_back(std::string("renormalize=") + (a.renormalize ? "true" : "false"));
    comments.push_back("kernel_residual=" + g17(m.residual()));
    comments.push_back("contraction_constant=" + g17(contraction_constant(m)));
    auto curve = mixing_curve(merge_stepper(m, a.renormalize), p0, m.stationary, a.T);
    comments.push_back(describe(curve));
    std::ostringstream os;
    write_curve_csv(os, curve, comments);
    emit(a.out, os.str());
    if (curve.max_leak > 1e-9)
      std::cerr << "warning: merge steps leaked up to " << g17(curve.max_leak)
                << " of the mass (contexts outside the support were sampled)\n";
    std::cerr << "simulate: " << describe(curve) << '\n';
    return kOk;
  }

  if (a.renormalize) throw InvalidInput("--renormalize applies to merge kernels only");
  std::vector<ProjectedKernel> projected;
  double kernel_residual = 0.0;
  for (const auto& d : docs) {
    auto b = broadcast_kernel_from_json(d);
    kernel_residual = std::max(kernel_residual, b.residual());
    projected.push_back(projected_kernel(b));
  }
  const Vector& p = projected.front().stationary;
  for (const auto& pk : projected)
    if (pk.stationary.size() != p.size() || (pk.stationary - p).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidInput("mixed broadcast kernels must share the stationary vector");
  const auto n = static_cast<std::size_t>(p.size());
  const Vector p0 = read_p0(a.p0, n, a.seed);
  comments.push_back("kernel_residual=" + g17(kernel_residual));

  auto mixture = [&](const std::vector<double>& w) {
    Matrix P = Matrix::Zero(p.size(), p.size());
    for (std::size_t i = 0; i < w.size(); ++i) P += w[i] * projected[i].P;
    return P;
  };
  auto run_one = [&](const Matrix& P, std::vector<std::string>& lines) {
    const auto gap = spectral_gap(P);
    lines.push_back("spectral_gap=" + g17(gap.gap) + " modulus=" + g17(gap.modulus) +
                    " gap_converged=" + (gap.converged ? "true" : "false"));
    lines.push_back(std::string("primitive=") + (is_primitive(P) ? "true" : "false"));
    lines.push_back("stationarity_residual=" + g17(stationarity_residual(P, p)));
    return std::pair{mixing_curve(projected_stepper(P), p0, p, a.T), gap};
  };

  if (a.sweep.empty()) {
    std::vector<double> w;
    if (a.mix.empty()) {
      if (projected.size() != 1) throw InvalidInput("several --kernel files need --mix or --sweep");
      w = {1.0};
    } else {
      for (const auto& s : split(a.mix, ',')) w.push_back(to_double(s, "mix weight"));
      if (w.size() != projected.size()) throw InvalidInput("--mix needs one weight per --kernel");
      double sum = 0.0;
      for (double x : w) {
        if (x < 0.0) throw InvalidInput("--mix weights must be nonnegative");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("--mix weights must sum to 1");
      comments.push_back("mix=" + a.mix);
    }
    auto [curve, gap] = run_one(mixture(w), comments);
    comments.push_back(describe(curve));
    std::ostringstream os;
    write_curve_csv(os, curve, comments);
    emit(a.out, os.str());
    std::cerr << "simulate: spectral gap " << g17(gap.gap) << ", " << describe(curve) << '\n';
    return kOk;
  }

  // Sweep: P(lambda) = (1 - lambda) P_first + lambda P_second.
  if (projected.size() != 2 || !a.mix.empty())
    throw InvalidInput("--sweep needs exactly two --kernel files and no --mix");
  std::vector<double> lambdas;
  for (const auto& s : split(a.sweep, ',')) {
    const double l = to_double(s, "sweep value");
    if (l < 0.0 || l > 1.0) throw InvalidInput("--sweep values must lie in [0, 1]");
    lambdas.push_back(l);
  }
  if (lambdas.empty()) throw InvalidInput("--sweep needs at least one value");
  comments.push_back("sweep=" + a.sweep + " (weight of the second kernel)");
  std::ostringstream body;
  std::ostringstream table;
  table << "lambda  spectral_gap  modulus  final_l1_error\n";
  for (double l : lambdas) {
    std::vector<std::string> lines;
    auto [curve, gap] = run_one(mixture({1.0 - l, l}), lines);
    for (const auto& line : lines) comments.push_back("lambda=" + g17(l) + " " + line);
    for (const auto& s : curve.samples) body << g17(l) << ',' << s.t << ',' << g17(s.error) << '\n';
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-7.4g %-13.6g %-8.6g %.6g\n", l, gap.gap, gap.modulus,
                  curve.samples.back().error);
    table << buf;
  }
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "lambda,t,l1_error\n" << body.str();
  emit(a.out, os.str());
  std::cerr << table.str();
  return kOk;
}

struct ErgodicityArgs {
  std::string kernel;
  std::string out;
};

int ergodicity_cmd(const ErgodicityArgs& a) {
  json doc = load_json(a.kernel);
  json out;
  out["config"] = {{"command", "ergodicity"}, {"kernel", a.kernel}};
  if (kernel_kind(doc) == KernelKind::Broadcast) {
    auto b = broadcast_kernel_from_json(doc);
    auto pk = projected_kernel(b);
    auto gap = spectral_gap(pk.P);
    out["type"] = "broadcast";
    out["primitive"] = is_primitive(pk.P);
    out["spectral_gap"] = gap.gap;
    out["modulus"] = gap.modulus;
    out["gap_converged"] = gap.converged;
    out["gap_iterations"] = gap.iterations;
    out["row_residual"] = (pk.P.rowwise().sum().array() - 1.0).abs().maxCoeff();
    out["stationarity_residual"] = stationarity_residual(pk.P, pk.stationary);
  } else {
    auto m = merge_kernel_from_json(doc);
    out["type"] = "merge";
    json deltas = json::object();
    for (const auto& [k, t] : m.layers) deltas[std::to_string(k)] = dobrushin_delta(t);
    const double c = contraction_constant(m);
    out["dobrushin_delta"] = deltas;
    out["contraction_constant"] = c;
    out["certified"] = c < 1.0;
    out["coverage"] = m.coverage;
    out["kernel_residual"] = m.residual();
  }
  emit(a.out, out.dump(2) + "\n");
  return kOk;
}

struct EvalArgs {
  std::string ratings;
  std::size_t topn = 500;
  double split = 0.8;
  std::string ls = "10,20,30,40,100";
  std::string reference = "counts";
  std::string prior = "fixed-point";
  double eps = 1e-10;
  long max_iter = 100000;
  std::string out;
  std::string kernel_out;
};

int eval_cmd(const EvalArgs& a) {
  using namespace movielens;
  std::vector<std::size_t> ls;
  for (const auto& s : split(a.ls, ',')) {
    const double l = to_double(s, "cutoff L");
    if (l < 1 || l != std::floor(l)) throw InvalidInput("--Ls values must be positive integers");
    ls.push_back(static_cast<std::size_t>(l));
  }
  if (ls.empty()) throw InvalidInput("--Ls needs at least one value");
  MerwOptions opt;
  if (a.reference == "counts")
    opt.reference = Reference::Counts;
  else if (a.reference == "uniform")
    opt.reference = Reference::Uniform;
  else
    throw InvalidInput("--reference must be counts or uniform");
  if (a.prior == "fixed-point")
    opt.prior = Prior::FixedPoint;
  else if (a.prior == "smoothed")
    opt.prior = Prior::Smoothed;
  else
    throw InvalidInput("--prior must be fixed-point or smoothed");
  opt.inference.tolerance = a.eps;
  opt.inference.max_iter = a.max_iter;
  opt.inference.record_history = false;

  auto corpus = build_events(parse_ratings(read_file(a.ratings)), a.topn, a.split);
  auto kernel = fit_merw(corpus, opt);
  auto merw = merw_ranker(kernel);
  auto lazy = baseline_lazy_rw(corpus);
  auto pop = baseline_popularity(corpus);
  auto report = evaluate(corpus, kernel, {merw.get(), lazy.get(), pop.get()}, ls);

  const std::vector<std::string> comments{
      "command=eval-nextitem",
      "ratings=" + a.ratings,
      "topn=" + std::to_string(a.topn),
      "split=" + g17(a.split),
      "Ls=" + a.ls,
      "reference=" + a.reference,
      "prior=" + a.prior,
      "eps=" + g17(a.eps),
      "max_iter=" + std::to_string(a.max_iter),
      "items=" + std::to_string(corpus.item_count()) + " events=" + std::to_string(corpus.events.size()) +
          " train=" + std::to_string(corpus.train_events().size()) +
          " test=" + std::to_string(corpus.test_events().size()) +
          " split_timestamp=" + std::to_string(corpus.split_timestamp),
      "context_residual=" + g17(kernel.context_residual) +
          " stationarity_residual=" + g17(kernel.stationarity_residual) +
          " sweeps=" + std::to_string(kernel.trace.iterations)};
  if (!a.out.empty()) {
    std::ostringstream os;
    report.write_csv(os, comments);
    write_file(a.out, os.str());
  }
  if (!a.kernel_out.empty()) {
    json doc = to_json(kernel);
    doc["config"] = {{"command", "eval-nextitem"}, {"ratings", a.ratings}, {"topn", a.topn},
                     {"split", a.split}, {"reference", a.reference}, {"prior", a.prior}};
    write_file(a.kernel_out, doc.dump(2) + "\n");
  }
  for (const auto& c : comments) std::cout << "# " << c << '\n';
  report.write_table(std::cout);
  return kOk;
}

struct ValidateArgs {
  std::string graph;
  std::string orientation;
};

int validate_cmd(const ValidateArgs& a) {
  auto h = parse_hypergraph(read_file(a.graph));
  Orientation o = h.orientation();
  if (a.orientation == "one-tail")
    o = Orientation::OneTail;
  else if (a.orientation == "one-head")
    o = Orientation::OneHead;
  else if (!a.orientation.empty())
    throw InvalidInput("--orientation must be one-tail or one-head");
  auto diagnostics = validate(h, o);
  std::cout << "nodes=" << h.node_count() << " edges=" << h.edges().size()
            << " orientation=" << (o == Orientation::OneTail ? "one-tail" : "one-head")
            << " loops=" << (h.loops() == Loops::Allow ? "true" : "false") << '\n';
  for (const auto& d : diagnostics) std::cout << d.message << '\n';
  if (diagnostics.empty()) {
    std::cout << "no diagnostics\n";
    return kOk;
  }
  // One-head graphs may leak mass without being infeasible.
  for (const auto& d : diagnostics)
    if (d.kind != Diagnostic::Kind::NoTail) return kInfeasible;
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Maximum-entropy random walks on directed hypergraphs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  InferArgs broadcast_args, merge_args;
  auto* ib = app.add_subcommand("infer-broadcast", "Infer broadcasting transition tensors");
  add_infer_options(ib, broadcast_args, true);
  auto* im = app.add_subcommand("infer-merge", "Infer merging transition tensors");
  add_infer_options(im, merge_args, false);

  SimulateArgs sim;
  auto* sc = app.add_subcommand("simulate", "Iterate node dynamics and write the mixing curve");
  sc->add_option("--kernel", sim.kernels, "Kernel JSON (repeatable)")->required();
  sc->add_option("--mix", sim.mix, "Comma-separated weights, one per broadcast kernel");
  sc->add_option("--sweep", sim.sweep, "Comma-separated weights of the second of two broadcast kernels");
  sc->add_option("--T", sim.T, "Number of steps");
  sc->add_option("--p0", sim.p0, "Start: delta:i, uniform, random, inline list, or JSON file");
  sc->add_flag("--renormalize", sim.renormalize, "Divide merge steps by their mass");
  sc->add_option("--seed", sim.seed, "Seed for --p0 random");
  sc->add_option("--out", sim.out, "Output CSV (default stdout)");

  ErgodicityArgs erg;
  auto* ec = app.add_subcommand("ergodicity", "Primitivity and spectral gap, or Dobrushin contraction");
  ec->add_option("--kernel", erg.kernel, "Kernel JSON")->required();
  ec->add_option("--out", erg.out, "Output JSON (default stdout)");

  EvalArgs ev;
  auto* evc = app.add_subcommand("eval-nextitem", "Next-item hit@L evaluation on MovieLens-style ratings");
  evc->add_option("--ratings", ev.ratings, "Tab-separated user, item, rating, timestamp")->required();
  evc->add_option("--topn", ev.topn, "Items kept by rating count")->check(CLI::Range(3, 1000000));
  evc->add_option("--split", ev.split, "Training fraction of event timestamps")->check(CLI::Range(0.0, 1.0));
  evc->add_option("--Ls", ev.ls, "Comma-separated cutoffs");
  evc->add_option("--reference", ev.reference, "Reference tensor: counts or uniform");
  evc->add_option("--prior", ev.prior, "Stationary vector: fixed-point or smoothed");
  evc->add_option("--eps", ev.eps, "Residual tolerance")->check(CLI::PositiveNumber);
  evc->add_option("--max-iter", ev.max_iter, "Maximum scaling sweeps")->check(CLI::PositiveNumber);
  evc->add_option("--out", ev.out, "Report CSV");
  evc->add_option("--kernel-out", ev.kernel_out, "Write the fitted kernel JSON");

  ValidateArgs val;
  auto* vc = app.add_subcommand("validate-graph", "Report structural infeasibility of a hypergraph");
  vc->add_option("--graph", val.graph, "Hypergraph JSON file")->required();
  vc->add_option("--orientation", val.orientation, "one-tail or one-head (default: inferred)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ib->parsed()) return infer_broadcast_cmd(broadcast_args);
    if (im->parsed()) return infer_merge_cmd(merge_args);
    if (sc->parsed()) return simulate_cmd(sim);
    if (ec->parsed()) return ergodicity_cmd(erg);
    if (evc->parsed()) return eval_cmd(ev);
    if (vc->parsed()) return validate_cmd(val);
  } catch (const InfeasibleConstraints& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    if (!e.nodes().empty()) {
      std::cerr << "violating nodes:";
      for (std::size_t i = 0; i < e.nodes().size() && i < 20; ++i) std::cerr << ' ' << e.nodes()[i] + 1;
      if (e.nodes().size() > 20) std::cerr << " ...";
      std::cerr << '\n';
    }
    return kInfeasible;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hypermerw::cli
