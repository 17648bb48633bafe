#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hypermerw/tensor.hpp"

namespace hypermerw {

/// OneTail: every edge has a single tail (broadcasting).
/// OneHead: every edge has a single head (merging).
enum class Orientation { OneTail, OneHead };

struct Hyperedge {
  NodeSet tail;
  NodeSet head;

  friend bool operator==(const Hyperedge&, const Hyperedge&) = default;
  friend auto operator<=>(const Hyperedge&, const Hyperedge&) = default;
  /// Number of nodes in the edge (the tensor order it lands in).
  std::size_t size() const { return tail.size() + head.size(); }
};

/// Validated directed hypergraph. Edges are stored sorted and deduplicated,
/// with each node set sorted.
class DirectedHypergraph {
 public:
  /// Throws InvalidInput on out-of-range nodes, repeated nodes within a set,
  /// tail/head overlap, or edges that fit neither orientation. With
  /// Loops::Allow, repeats and overlap are accepted.
  DirectedHypergraph(std::size_t n, std::vector<Hyperedge> edges, Loops loops = Loops::Forbid);

  std::size_t node_count() const noexcept { return n_; }
  const std::vector<Hyperedge>& edges() const noexcept { return edges_; }
  Loops loops() const noexcept { return loops_; }
  /// Inferred orientation. Graphs whose edges all have one tail and one head
  /// report OneTail but are compatible with both.
  Orientation orientation() const noexcept { return orientation_; }
  bool compatible_with(Orientation o) const;

 private:
  std::size_t n_ = 0;
  std::vector<Hyperedge> edges_;
  Loops loops_ = Loops::Forbid;
  Orientation orientation_ = Orientation::OneTail;
};

/// JSON document: {"n": int, "edges": [{"tail": [...], "head": [...]}, ...]}
/// with 1-based node ids, plus optional "loops": bool.
DirectedHypergraph parse_hypergraph(std::string_view text);
std::string serialize_hypergraph(const DirectedHypergraph& h);

/// Global: a pivot's degree counts its edges of every size.
/// PerLayer: each layer is normalized on its own.
enum class DegreeScope { Global, PerLayer };

struct AdjacencyLayers {
  Orientation orientation = Orientation::OneTail;
  std::size_t dim = 0;
  std::map<int, SymSparseTensor> layers;
};

/// Degree-normalized adjacency tensors, one per edge size.
/// OneTail: ordered value 1/(d_pivot * (k-1)!), rows stochastic.
/// OneHead: ordered value 1/d_S with d_S the number of edges with tail S,
/// so every supported tail set has unit context mass.
AdjacencyLayers adjacency_layers(const DirectedHypergraph& h, Orientation orientation,
                                 DegreeScope scope = DegreeScope::Global);
AdjacencyLayers adjacency_layers(const DirectedHypergraph& h,
                                 DegreeScope scope = DegreeScope::Global);

struct Diagnostic {
  enum class Kind { IsolatedPivot, NoHead, NoTail, Transient };
  Kind kind;
  NodeId node;  // 0-based
  std::string message;
};

/// Structural problems that make a strictly positive stationary vector
/// unattainable (or, for NoTail, make the merging dynamics leak mass).
std::vector<Diagnostic> validate(const DirectedHypergraph& h);
std::vector<Diagnostic> validate(const DirectedHypergraph& h, Orientation orientation);

}  // namespace hypermerw
