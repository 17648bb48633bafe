#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypermerw/merge.hpp"

namespace hypermerw::movielens {

struct Interaction {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

/// Tab-separated `user item rating timestamp` lines, in file order.
/// Throws InvalidInput naming the offending line.
std::vector<Interaction> parse_ratings(std::string_view text);

/// One length-three window: the two earlier items form the context, `last`
/// is the later of the two.
struct Event {
  std::array<NodeId, 2> context{};  // sorted
  NodeId last = 0;
  NodeId next = 0;
  std::int64_t timestamp = 0;  // of the next item
  bool train = false;
};

struct EventCorpus {
  std::vector<Event> events;
  /// Dense index -> raw item id; dense indices follow ascending raw id.
  std::vector<std::string> items;
  std::map<std::string, NodeId> item_index;
  /// Events with timestamp strictly below this are training events.
  std::int64_t split_timestamp = 0;

  std::size_t item_count() const { return items.size(); }
  std::vector<Event> train_events() const;
  std::vector<Event> test_events() const;
};

/// Keeps the top_n items by rating count (ties by raw id), windows each
/// user's filtered, time-sorted history (ties by raw id) and splits at the
/// train_fraction quantile of event timestamps.
EventCorpus build_events(const std::vector<Interaction>& interactions, std::size_t top_n,
                         double train_fraction);

enum class Reference { Counts, Uniform };
/// FixedPoint: stationary vector of the reference's own (renormalized)
/// merging dynamics. Smoothed: add-one smoothed next-item frequency.
enum class Prior { FixedPoint, Smoothed };

struct MerwOptions {
  Reference reference = Reference::Counts;
  Prior prior = Prior::FixedPoint;
  /// Overrides `prior` when set.
  std::optional<Vector> prescribed;
  MergeOptions inference;
};

/// Context -> receiver counts over training events, as a k=3 one-head
/// adjacency layer (count-normalized or degree-normalized per context).
AdjacencyLayers training_support(const EventCorpus& corpus, Reference reference);

/// Fixed point of p -> F(p)/|F(p)| for the conditional law in `layers`.
Vector reference_fixed_point(const AdjacencyLayers& layers, double tolerance = 1e-15,
                             long max_iter = 100000);

/// Infers the k=3 merging kernel from the training events.
MergeKernel fit_merw(const EventCorpus& corpus, const MerwOptions& options = {});

/// Items by conditional probability given the context (descending, ties by
/// index), truncated to L. Unseen contexts give an empty list.
std::vector<NodeId> rank_candidates(const MergeKernel& kernel, std::array<NodeId, 2> context,
                                    std::size_t L);

class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string name() const = 0;
  virtual std::vector<NodeId> rank(const Event& event, std::size_t L) const = 0;
};

/// Training next-item frequency, ties by index.
std::unique_ptr<Ranker> baseline_popularity(const EventCorpus& corpus);
/// Row of the last context item in the pairwise kernel of training
/// (last -> next) transitions, uniform over observed successors; popularity
/// order for an unseen last item.
std::unique_ptr<Ranker> baseline_lazy_rw(const EventCorpus& corpus);
/// Ranks with rank_candidates; keeps a reference to `kernel`.
std::unique_ptr<Ranker> merw_ranker(const MergeKernel& kernel);

struct EvalRow {
  std::string method;
  std::string subset;  // "seen-context" or "seen-edge"
  std::size_t L = 0;
  double hit_rate = 0.0;
  std::size_t n = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t seen_context = 0;
  std::size_t seen_edge = 0;

  double hit_rate(std::string_view method, std::string_view subset, std::size_t L) const;
  void write_csv(std::ostream& os, const std::vector<std::string>& comments = {}) const;
  void write_table(std::ostream& os) const;
};

/// Hit@L of each ranker on the test events whose context was seen in
/// training (seen-context) and, within those, whose next item lies in the
/// learned support (seen-edge). Parallel over events.
EvalReport evaluate(const EventCorpus& corpus, const MergeKernel& kernel,
                    const std::vector<const Ranker*>& rankers, const std::vector<std::size_t>& Ls);

}  // namespace hypermerw::movielens
