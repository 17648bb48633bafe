#include "hypermerw/hypergraph.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string>

#include <json.hpp>

#include "hypermerw/error.hpp"

namespace hypermerw {

using json = nlohmann::json;

namespace {

std::string node_name(NodeId v) { return std::to_string(v + 1); }

void check_set(const NodeSet& s, std::size_t n, Loops loops, const char* what) {
  if (s.empty()) throw InvalidInput(std::string("hyperedge ") + what + " set is empty");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= n) throw InvalidInput("node index " + node_name(s[i]) + " out of range");
    if (loops == Loops::Forbid && i > 0 && s[i] == s[i - 1])
      throw InvalidInput(std::string("duplicate node ") + node_name(s[i]) + " within a " + what +
                         " set");
  }
}

}  // namespace

DirectedHypergraph::DirectedHypergraph(std::size_t n, std::vector<Hyperedge> edges, Loops loops)
    : n_(n), loops_(loops) {
  for (auto& e : edges) {
    std::sort(e.tail.begin(), e.tail.end());
    std::sort(e.head.begin(), e.head.end());
    check_set(e.tail, n, loops, "tail");
    check_set(e.head, n, loops, "head");
    if (loops == Loops::Forbid) {
      NodeSet common;
      std::set_intersection(e.tail.begin(), e.tail.end(), e.head.begin(), e.head.end(),
                            std::back_inserter(common));
      if (!common.empty())
        throw InvalidInput("tail and head share node " + node_name(common.front()));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  if (compatible_with(Orientation::OneTail)) orientation_ = Orientation::OneTail;
  else if (compatible_with(Orientation::OneHead)) orientation_ = Orientation::OneHead;
  else throw InvalidInput("mixed orientations: edges must all have one tail or all have one head");
}

bool DirectedHypergraph::compatible_with(Orientation o) const {
  return std::all_of(edges_.begin(), edges_.end(), [o](const Hyperedge& e) {
    return o == Orientation::OneTail ? e.tail.size() == 1 : e.head.size() == 1;
  });
}

DirectedHypergraph parse_hypergraph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string("malformed hypergraph document: ") + ex.what());
  }
  try {
    if (!doc.is_object()) throw InvalidInput("hypergraph document must be a JSON object");
    if (!doc.contains("n") || !doc["n"].is_number_integer())
      throw InvalidInput("hypergraph document needs an integer field 'n'");
    const auto n_signed = doc["n"].get<long long>();
    if (n_signed < 1) throw InvalidInput("'n' must be positive");
    const auto n = static_cast<std::size_t>(n_signed);
    Loops loops = doc.value("loops", false) ? Loops::Allow : Loops::Forbid;
    if (!doc.contains("edges") || !doc["edges"].is_array())
      throw InvalidInput("hypergraph document needs an array field 'edges'");

    auto read_set = [n](const json& arr, const char* what) {
      if (!arr.is_array()) throw InvalidInput(std::string("edge field '") + what + "' must be an array");
      NodeSet out;
      for (const auto& x : arr) {
        if (!x.is_number_integer())
          throw InvalidInput(std::string("edge field '") + what + "' must hold integers");
        auto v = x.get<long long>();
        if (v < 1 || static_cast<std::size_t>(v) > n)
          throw InvalidInput("node index " + std::to_string(v) + " out of range [1, " +
                             std::to_string(n) + "]");
        out.push_back(static_cast<NodeId>(v - 1));
      }
      return out;
    };

    std::vector<Hyperedge> edges;
    for (const auto& e : doc["edges"]) {
      if (!e.is_object() || !e.contains("tail") || !e.contains("head"))
        throw InvalidInput("each edge needs 'tail' and 'head'");
      edges.push_back({read_set(e["tail"], "tail"), read_set(e["head"], "head")});
    }
    return DirectedHypergraph(n, std::move(edges), loops);
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string("malformed hypergraph document: ") + ex.what());
  }
}

std::string serialize_hypergraph(const DirectedHypergraph& h) {
  json doc;
  doc["n"] = h.node_count();
  if (h.loops() == Loops::Allow) doc["loops"] = true;
  json edges = json::array();
  auto one_based = [](const NodeSet& s) {
    json a = json::array();
    for (auto v : s) a.push_back(v + 1);
    return a;
  };
  for (const auto& e : h.edges()) edges.push_back({{"tail", one_based(e.tail)}, {"head", one_based(e.head)}});
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

AdjacencyLayers adjacency_layers(const DirectedHypergraph& h, DegreeScope scope) {
  return adjacency_layers(h, h.orientation(), scope);
}

AdjacencyLayers adjacency_layers(const DirectedHypergraph& h, Orientation orientation,
                                 DegreeScope scope) {
  if (!h.compatible_with(orientation))
    throw InvalidInput("hypergraph edges do not fit the requested orientation");
  const bool front = orientation == Orientation::OneTail;

  // Degree keyed by (outer key, layer); layer 0 means "all sizes".
  std::map<std::pair<NodeSet, int>, double> degree;
  for (const auto& e : h.edges()) {
    const int layer = (scope == DegreeScope::PerLayer && front) ? static_cast<int>(e.size()) : 0;
    degree[{e.tail, layer}] += 1.0;
  }

  std::map<int, std::vector<SymSparseTensor::Entry>> entries;
  for (const auto& e : h.edges()) {
    const int k = static_cast<int>(e.size());
    const int layer = (scope == DegreeScope::PerLayer && front) ? k : 0;
    const double d = degree.at({e.tail, layer});
    if (front) {
      double ord = orderings(e.head);
      entries[k].push_back({{e.tail.front(), e.head}, 1.0 / (d * ord)});
    } else {
      entries[k].push_back({{e.head.front(), e.tail}, 1.0 / d});
    }
  }

  AdjacencyLayers out;
  out.orientation = orientation;
  out.dim = h.node_count();
  for (auto& [k, es] : entries)
    out.layers.emplace(k, SymSparseTensor(k, h.node_count(), front ? Symmetry::Front : Symmetry::Back,
                                          std::move(es), h.loops()));
  return out;
}

std::vector<Diagnostic> validate(const DirectedHypergraph& h) {
  return validate(h, h.orientation());
}

std::vector<Diagnostic> validate(const DirectedHypergraph& h, Orientation orientation) {
  const std::size_t n = h.node_count();
  std::vector<bool> in_head(n, false), in_tail(n, false);
  std::vector<std::vector<NodeId>> adj(n), radj(n);
  for (const auto& e : h.edges()) {
    for (auto v : e.head) in_head[v] = true;
    for (auto v : e.tail) in_tail[v] = true;
    for (auto a : e.tail)
      for (auto b : e.head) {
        adj[a].push_back(b);
        radj[b].push_back(a);
      }
  }

  std::vector<Diagnostic> out;
  std::vector<bool> flagged(n, false);
  for (NodeId v = 0; v < n; ++v) {
    const auto name = node_name(v);
    if (orientation == Orientation::OneTail && !in_tail[v]) {
      out.push_back({Diagnostic::Kind::IsolatedPivot, v,
                     "node " + name + " has no outgoing hyperedge: row constraint with p" + name +
                         " > 0 infeasible"});
      flagged[v] = true;
    }
    if (!in_head[v]) {
      out.push_back({Diagnostic::Kind::NoHead, v,
                     "node " + name + " unreachable: stationary constraint with p" + name +
                         " > 0 infeasible"});
      flagged[v] = true;
    }
    if (orientation == Orientation::OneHead && !in_tail[v]) {
      out.push_back({Diagnostic::Kind::NoTail, v,
                     "node " + name + " appears in no tail set: contexts containing it leak mass"});
    }
  }
  if (orientation == Orientation::OneHead) return out;

  // Strongly connected components (Kosaraju). A component with an edge
  // leaving it is transient, so its stationary mass must vanish.
  std::vector<NodeId> order;
  std::vector<bool> seen(n, false);
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<NodeId, std::size_t>> stack{{s, 0}};
    seen[s] = true;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < adj[v].size()) {
        NodeId w = adj[v][next++];
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<NodeId> stack{*it};
    comp[*it] = ncomp;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : radj[v])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          stack.push_back(w);
        }
    }
    ++ncomp;
  }
  std::vector<bool> leaves(ncomp, false);
  for (NodeId v = 0; v < n; ++v)
    for (NodeId w : adj[v])
      if (comp[w] != comp[v]) leaves[comp[v]] = true;
  for (NodeId v = 0; v < n; ++v) {
    if (flagged[v] || !leaves[comp[v]]) continue;
    const auto name = node_name(v);
    out.push_back({Diagnostic::Kind::Transient, v,
                   "node " + name + " lies in a transient class of the projected support: "
                   "stationary constraint with p" + name + " > 0 infeasible"});
  }
  return out;
}

}  // namespace hypermerw
