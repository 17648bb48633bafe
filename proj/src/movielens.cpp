#include "hypermerw/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

#include "hypermerw/error.hpp"
#include "hypermerw/parallel.hpp"

namespace hypermerw::movielens {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Numeric order for numeric ids, lexicographic otherwise.
bool raw_less(std::string_view a, std::string_view b) {
  if (all_digits(a) && all_digits(b)) {
    auto strip = [](std::string_view s) {
      auto i = s.find_first_not_of('0');
      return i == std::string_view::npos ? std::string_view("0") : s.substr(i);
    };
    a = strip(a);
    b = strip(b);
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

struct RawLess {
  bool operator()(const std::string& a, const std::string& b) const { return raw_less(a, b); }
};

std::vector<NodeId> order_by_score(const std::vector<double>& score, std::size_t L) {
  std::vector<NodeId> idx(score.size());
  std::iota(idx.begin(), idx.end(), NodeId{0});
  auto better = [&](NodeId a, NodeId b) { return score[a] != score[b] ? score[a] > score[b] : a < b; };
  const std::size_t keep = std::min(L, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), better);
  idx.resize(keep);
  return idx;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class ScoreRanker : public Ranker {
 public:
  ScoreRanker(std::string name, std::vector<double> score) : name_(std::move(name)), score_(std::move(score)) {}
  std::string name() const override { return name_; }
  std::vector<NodeId> rank(const Event&, std::size_t L) const override { return order_by_score(score_, L); }

 private:
  std::string name_;
  std::vector<double> score_;
};

class LazyRwRanker : public Ranker {
 public:
  LazyRwRanker(std::vector<std::vector<NodeId>> successors, std::vector<double> popularity)
      : successors_(std::move(successors)), popularity_(std::move(popularity)) {}
  std::string name() const override { return "LazyRW"; }
  std::vector<NodeId> rank(const Event& e, std::size_t L) const override {
    const auto& next = successors_[e.last];
    if (next.empty()) return order_by_score(popularity_, L);
    std::vector<double> score(popularity_.size(), 0.0);
    for (NodeId j : next) score[j] = 1.0 / static_cast<double>(next.size());
    return order_by_score(score, L);
  }

 private:
  std::vector<std::vector<NodeId>> successors_;
  std::vector<double> popularity_;
};

class MerwRanker : public Ranker {
 public:
  explicit MerwRanker(const MergeKernel& kernel) : kernel_(kernel) {}
  std::string name() const override { return "MERW"; }
  std::vector<NodeId> rank(const Event& e, std::size_t L) const override {
    return rank_candidates(kernel_, e.context, L);
  }

 private:
  const MergeKernel& kernel_;
};

std::vector<double> next_counts(const EventCorpus& corpus) {
  std::vector<double> c(corpus.item_count(), 0.0);
  for (const auto& e : corpus.events)
    if (e.train) c[e.next] += 1.0;
  return c;
}

}  // namespace

std::vector<Interaction> parse_ratings(std::string_view text) {
  std::vector<Interaction> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t a = 0;
    while (true) {
      std::size_t b = line.find('\t', a);
      fields.push_back(line.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
      if (b == std::string_view::npos) break;
      a = b + 1;
    }
    auto fail = [&](const std::string& why) {
      throw InvalidInput("ratings line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) fail("expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) fail("empty user or item id");
    Interaction x;
    x.user = std::string(fields[0]);
    x.item = std::string(fields[1]);
    try {
      std::size_t used = 0;
      x.rating = std::stod(std::string(fields[2]), &used);
      if (used != fields[2].size()) throw std::invalid_argument("rating");
    } catch (const std::exception&) {
      fail("rating is not a number");
    }
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), x.timestamp);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size()) fail("timestamp is not an integer");
    if (x.timestamp < 0) fail("negative timestamp");
    out.push_back(std::move(x));
  }
  if (out.empty()) throw InvalidInput("ratings file is empty");
  return out;
}

std::vector<Event> EventCorpus::train_events() const {
  std::vector<Event> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [](const Event& e) { return e.train; });
  return out;
}

std::vector<Event> EventCorpus::test_events() const {
  std::vector<Event> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [](const Event& e) { return !e.train; });
  return out;
}

EventCorpus build_events(const std::vector<Interaction>& interactions, std::size_t top_n,
                         double train_fraction) {
  if (top_n < 3) throw InvalidInput("top_n must be at least 3");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidInput("train fraction must lie in (0, 1)");

  std::map<std::string, std::size_t, RawLess> counts;
  for (const auto& x : interactions) ++counts[x.item];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > top_n) ranked.resize(top_n);

  EventCorpus corpus;
  for (const auto& [item, c] : ranked) corpus.items.push_back(item);
  std::sort(corpus.items.begin(), corpus.items.end(), raw_less);
  for (std::size_t i = 0; i < corpus.items.size(); ++i) corpus.item_index[corpus.items[i]] = static_cast<NodeId>(i);

  struct Visit {
    std::int64_t timestamp;
    const std::string* raw;
    NodeId item;
  };
  std::map<std::string, std::vector<Visit>, RawLess> histories;
  for (const auto& x : interactions) {
    auto it = corpus.item_index.find(x.item);
    if (it == corpus.item_index.end()) continue;
    histories[x.user].push_back({x.timestamp, &it->first, it->second});
  }
  for (auto& [user, h] : histories) {
    std::stable_sort(h.begin(), h.end(), [](const Visit& a, const Visit& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return raw_less(*a.raw, *b.raw);
    });
    for (std::size_t t = 2; t < h.size(); ++t) {
      Event e;
      e.context = {std::min(h[t - 2].item, h[t - 1].item), std::max(h[t - 2].item, h[t - 1].item)};
      e.last = h[t - 1].item;
      e.next = h[t].item;
      e.timestamp = h[t].timestamp;
      corpus.events.push_back(e);
    }
  }
  if (corpus.events.empty()) throw InvalidInput("no events after filtering");

  std::vector<std::int64_t> ts;
  ts.reserve(corpus.events.size());
  for (const auto& e : corpus.events) ts.push_back(e.timestamp);
  std::sort(ts.begin(), ts.end());
  auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ts.size())));
  cut = std::min(cut, ts.size() - 1);
  corpus.split_timestamp = ts[cut];
  for (auto& e : corpus.events) e.train = e.timestamp < corpus.split_timestamp;
  return corpus;
}

AdjacencyLayers training_support(const EventCorpus& corpus, Reference reference) {
  std::map<std::array<NodeId, 2>, std::map<NodeId, double>> counts;
  for (const auto& e : corpus.events)
    if (e.train) counts[e.context][e.next] += 1.0;
  if (counts.empty()) throw InvalidInput("training corpus is empty");
  std::vector<SymSparseTensor::Entry> entries;
  for (const auto& [ctx, next] : counts) {
    double total = 0.0;
    for (const auto& [j, c] : next) total += c;
    for (const auto& [j, c] : next) {
      const double value = reference == Reference::Counts ? c / total : 1.0 / static_cast<double>(next.size());
      entries.push_back({{j, {ctx[0], ctx[1]}}, value});
    }
  }
  AdjacencyLayers a;
  a.orientation = Orientation::OneHead;
  a.dim = corpus.item_count();
  a.layers.emplace(3, SymSparseTensor(3, a.dim, Symmetry::Back, std::move(entries), Loops::Allow));
  return a;
}

Vector reference_fixed_point(const AdjacencyLayers& layers, double tolerance, long max_iter) {
  const auto n = static_cast<Eigen::Index>(layers.dim);
  const double share = 1.0 / static_cast<double>(layers.layers.size());
  Vector p = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (long it = 0; it < max_iter; ++it) {
    Vector next = Vector::Zero(n);
    for (const auto& [k, t] : layers.layers) next += share * polynomial_apply(t, p);
    const double mass = next.sum();
    if (!(mass > 0.0)) throw InfeasibleConstraints("reference dynamics lose all mass");
    next /= mass;
    const double change = (next - p).lpNorm<1>();
    p = std::move(next);
    if (change <= tolerance) break;
  }
  return p;
}

MergeKernel fit_merw(const EventCorpus& corpus, const MerwOptions& options) {
  const AdjacencyLayers a = training_support(corpus, options.reference);
  const std::size_t n = corpus.item_count();
  Vector p;
  if (options.prescribed) {
    p = *options.prescribed;
  } else if (options.prior == Prior::Smoothed) {
    auto c = next_counts(corpus);
    p.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) p[static_cast<Eigen::Index>(j)] = c[j] + 1.0;
    p /= p.sum();
  } else {
    p = reference_fixed_point(a);
    // Entries that decay towards zero mark items the dynamics drain; the
    // stationary constraint cannot hold there.
    std::vector<NodeId> zero;
    for (Eigen::Index j = 0; j < p.size(); ++j)
      if (!(p[j] > 1e-12)) zero.push_back(static_cast<NodeId>(j));
    if (!zero.empty())
      throw InfeasibleConstraints("reference fixed point vanishes on items never reached in training", zero);
    p /= p.sum();
  }
  return infer_merge(a, p, {{3, 1.0}}, options.inference);
}

std::vector<NodeId> rank_candidates(const MergeKernel& kernel, std::array<NodeId, 2> context, std::size_t L) {
  auto layer = kernel.layers.find(3);
  if (layer == kernel.layers.end()) return {};
  const auto& m = layer->second;
  if (context[0] > context[1]) std::swap(context[0], context[1]);
  auto block = m.find_context(context);
  if (!block) return {};
  std::vector<double> score(m.dim(), 0.0);
  for (std::size_t i = m.block_begin(*block); i < m.block_end(*block); ++i) score[m.distinguished(i)] = m.value(i);
  return order_by_score(score, L);
}

std::unique_ptr<Ranker> baseline_popularity(const EventCorpus& corpus) {
  return std::make_unique<ScoreRanker>("Popularity", next_counts(corpus));
}

std::unique_ptr<Ranker> baseline_lazy_rw(const EventCorpus& corpus) {
  std::vector<std::set<NodeId>> next(corpus.item_count());
  for (const auto& e : corpus.events)
    if (e.train) next[e.last].insert(e.next);
  std::vector<std::vector<NodeId>> successors;
  successors.reserve(next.size());
  for (const auto& s : next) successors.emplace_back(s.begin(), s.end());
  return std::make_unique<LazyRwRanker>(std::move(successors), next_counts(corpus));
}

std::unique_ptr<Ranker> merw_ranker(const MergeKernel& kernel) {
  return std::make_unique<MerwRanker>(kernel);
}

double EvalReport::hit_rate(std::string_view method, std::string_view subset, std::size_t L) const {
  for (const auto& r : rows)
    if (r.method == method && r.subset == subset && r.L == L) return r.hit_rate;
  throw InvalidInput("no report row for " + std::string(method) + "/" + std::string(subset) + "/" +
                     std::to_string(L));
}

void EvalReport::write_csv(std::ostream& os, const std::vector<std::string>& comments) const {
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "method,subset,L,hit_rate,N\n";
  for (const auto& r : rows) os << r.method << ',' << r.subset << ',' << r.L << ',' << format_g17(r.hit_rate) << ',' << r.n << '\n';
}

void EvalReport::write_table(std::ostream& os) const {
  std::vector<std::string> methods, subsets;
  std::vector<std::size_t> ls;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(subsets.begin(), subsets.end(), r.subset) == subsets.end()) subsets.push_back(r.subset);
    if (std::find(ls.begin(), ls.end(), r.L) == ls.end()) ls.push_back(r.L);
  }
  char buf[64];
  for (const auto& s : subsets) {
    const std::size_t n = s == "seen-edge" ? seen_edge : seen_context;
    os << "Hit@L on " << s << " test events (N=" << n << ")\n";
    os << "  Method      ";
    for (auto L : ls) {
      std::snprintf(buf, sizeof buf, " %9s", ("Hit@" + std::to_string(L)).c_str());
      os << buf;
    }
    os << '\n';
    for (const auto& m : methods) {
      std::snprintf(buf, sizeof buf, "  %-12s", m.c_str());
      os << buf;
      for (auto L : ls) {
        std::snprintf(buf, sizeof buf, " %9.4f", hit_rate(m, s, L));
        os << buf;
      }
      os << '\n';
    }
    os << '\n';
  }
}

EvalReport evaluate(const EventCorpus& corpus, const MergeKernel& kernel,
                    const std::vector<const Ranker*>& rankers, const std::vector<std::size_t>& Ls) {
  if (Ls.empty()) throw InvalidInput("no cutoffs L given");
  const auto test = corpus.test_events();
  if (test.empty()) throw InvalidInput("no test events");
  const std::size_t max_l = *std::max_element(Ls.begin(), Ls.end());
  auto layer = kernel.layers.find(3);

  // Per event: subset membership (0 none, 1 context, 2 edge) and the rank of
  // the true item for every ranker (max_l when missed).
  std::vector<int> subset(test.size(), 0);
  std::vector<std::size_t> position(test.size() * rankers.size(), max_l);
  parallel_for(test.size(), [&](std::size_t i) {
    const auto& e = test[i];
    if (layer == kernel.layers.end()) return;
    const auto& m = layer->second;
    auto block = m.find_context(e.context);
    if (!block) return;
    subset[i] = 1;
    for (std::size_t x = m.block_begin(*block); x < m.block_end(*block); ++x)
      if (m.distinguished(x) == e.next) subset[i] = 2;
    for (std::size_t r = 0; r < rankers.size(); ++r) {
      auto list = rankers[r]->rank(e, max_l);
      auto it = std::find(list.begin(), list.end(), e.next);
      position[i * rankers.size() + r] = it == list.end() ? max_l : static_cast<std::size_t>(it - list.begin());
    }
  });

  EvalReport report;
  for (int s : subset) {
    report.seen_context += s >= 1;
    report.seen_edge += s == 2;
  }
  for (std::size_t r = 0; r < rankers.size(); ++r)
    for (const auto& [name, need, size] : {std::tuple{"seen-context", 1, report.seen_context},
                                           std::tuple{"seen-edge", 2, report.seen_edge}})
      for (std::size_t L : Ls) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < test.size(); ++i)
          if (subset[i] >= need && position[i * rankers.size() + r] < L) ++hits;
        report.rows.push_back({rankers[r]->name(), name, L,
                               size == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(size), size});
      }
  return report;
}

}  // namespace hypermerw::movielens
