#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hypermerw/dense.hpp"

namespace hypermerw {

/// Node ids are 0-based in memory; file formats and messages use 1-based.
using NodeId = std::uint32_t;
using NodeSet = std::vector<NodeId>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Canonical tail set -> value.
using ContextMap = std::map<NodeSet, double>;

/// Front: invariant under permutations of modes 2..k (broadcasting).
/// Back: invariant under permutations of modes 1..k-1 (merging).
enum class Symmetry { Front, Back };

/// Forbid: the group is a strictly increasing set not containing the
/// distinguished node. Allow: the group is a sorted multiset and may contain it.
enum class Loops { Forbid, Allow };

struct CanonicalKey {
  NodeId distinguished = 0;
  NodeSet group;

  friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;
  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

/// Number of distinct orderings of a sorted multiset: m! / prod(mult_i!).
double orderings(std::span<const NodeId> group);

/// Sparse tensor with one stored value per canonical key. The value is that
/// of a single ordered index tuple; all orderings of the group share it.
///
/// Entries are kept sorted so that entries sharing an outer key sit in one
/// contiguous block: the pivot for Front tensors, the tail set for Back
/// tensors. Rescaled copies share the (immutable) support.
class SymSparseTensor {
 public:
  struct Entry {
    CanonicalKey key;
    double value = 0.0;
  };

  SymSparseTensor();
  /// Validates every key, drops zero values. Duplicate keys and negative or
  /// non-finite values throw InvalidInput.
  SymSparseTensor(int order, std::size_t dim, Symmetry symmetry, std::vector<Entry> entries,
                  Loops loops = Loops::Forbid);

  int order() const noexcept;
  std::size_t dim() const noexcept;
  Symmetry symmetry() const noexcept;
  Loops loops() const noexcept;
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  NodeId distinguished(std::size_t i) const;
  std::span<const NodeId> group(std::size_t i) const;
  double value(std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// Ordered tuples represented by entry i (orderings of its group).
  double multiplicity(std::size_t i) const;
  CanonicalKey key(std::size_t i) const;
  std::vector<Entry> entries() const;

  std::optional<std::size_t> find(const CanonicalKey& key) const;
  /// Ordered value at `key`; 0 when absent.
  double at(const CanonicalKey& key) const;

  std::size_t block_count() const noexcept;
  std::size_t block_begin(std::size_t b) const;
  std::size_t block_end(std::size_t b) const;
  std::size_t block_of(std::size_t i) const;
  /// Back tensors: block index of a canonical tail set.
  std::optional<std::size_t> find_context(std::span<const NodeId> tail) const;

  /// Same support, new values. Zero values are dropped (changing the support);
  /// negative values throw.
  SymSparseTensor with_values(std::vector<double> values) const;
  bool same_support(const SymSparseTensor& other) const;

  /// Replicates each canonical value to every ordering. Needs dim <= 8.
  DenseTensor to_dense() const;

 private:
  struct Support;
  SymSparseTensor(std::shared_ptr<const Support> support, std::vector<double> values);

  std::shared_ptr<const Support> support_;
  std::vector<double> values_;
};

/// result[j] = sum over entries with pivot j of value * orderings.
Vector row_mass(const SymSparseTensor& t);

/// Contraction of modes 3..k with ones: result[i][j] is the mass of ordered
/// tuples with pivot i and j in the first receiver slot.
Matrix receiver_marginal_matrix(const SymSparseTensor& t);

/// Column sums of receiver_marginal_matrix without forming the matrix.
Vector receiver_mass(const SymSparseTensor& t);

/// For every tail set S: sum_j value(S, j) * v[j].
ContextMap context_mass(const SymSparseTensor& t, const Vector& v);
/// Same, indexed by block.
Vector context_mass_by_block(const SymSparseTensor& t, const Vector& v);

/// Contraction of modes 1..k-1 with p: result[j] = sum value * orderings * prod p_S.
Vector polynomial_apply(const SymSparseTensor& t, const Vector& p);

/// Entry (j1, S) times u[j1] * prod_{r in S} v[r].
SymSparseTensor scale_front(const SymSparseTensor& k, const Vector& u, const Vector& v);

/// Entry (S, j) times U[S] * v[j]. Missing tail sets throw InvalidInput.
SymSparseTensor scale_back(const SymSparseTensor& k, const ContextMap& u, const Vector& v);
/// Same with U indexed by block.
SymSparseTensor scale_back(const SymSparseTensor& k, const Vector& u_by_block, const Vector& v);

}  // namespace hypermerw
