#include "hypermerw/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "hypermerw/error.hpp"

namespace hypermerw {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n)
    throw InvalidInput(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                       std::to_string(v.size()));
}

void require_positive(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw InvalidInput(std::string(what) + ": entry " + std::to_string(i + 1) +
                         " is not strictly positive");
}

void require_symmetry(const SymSparseTensor& t, Symmetry s, const char* op) {
  if (t.symmetry() != s)
    throw InvalidInput(std::string(op) + ": wrong tensor symmetry");
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(int order, std::size_t dim) : order_(order), dim_(dim) {
  if (order < 1) throw InvalidInput("dense tensor order must be positive");
  std::size_t cells = 1;
  for (int m = 0; m < order; ++m) {
    cells *= dim;
    if (cells > (std::size_t{1} << 20)) throw InvalidInput("dense tensor too large");
  }
  data_.assign(cells, 0.0);
}

std::size_t DenseTensor::flat_index(std::span<const std::uint32_t> index) const {
  if (index.size() != static_cast<std::size_t>(order_))
    throw InvalidInput("dense tensor index has wrong arity");
  std::size_t flat = 0;
  for (auto i : index) {
    if (i >= dim_) throw InvalidInput("dense tensor index out of range");
    flat = flat * dim_ + i;
  }
  return flat;
}

std::vector<std::uint32_t> DenseTensor::multi_index(std::size_t flat) const {
  std::vector<std::uint32_t> idx(order_);
  for (int m = order_ - 1; m >= 0; --m) {
    idx[m] = static_cast<std::uint32_t>(flat % dim_);
    flat /= dim_;
  }
  return idx;
}

// ---------------------------------------------------------------------------
// SymSparseTensor

double orderings(std::span<const NodeId> group) {
  double count = factorial(static_cast<int>(group.size()));
  std::size_t i = 0;
  while (i < group.size()) {
    std::size_t j = i;
    while (j < group.size() && group[j] == group[i]) ++j;
    count /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return count;
}

struct SymSparseTensor::Support {
  int order = 2;
  std::size_t dim = 0;
  Symmetry symmetry = Symmetry::Front;
  Loops loops = Loops::Forbid;
  std::vector<NodeId> distinguished;
  std::vector<NodeId> groups;  // stride order - 1
  std::vector<double> multiplicity;
  std::vector<std::size_t> block_start{0};
  std::vector<std::size_t> block_id;

  std::size_t width() const { return static_cast<std::size_t>(order - 1); }
  std::span<const NodeId> group(std::size_t i) const {
    return {groups.data() + i * width(), width()};
  }
  // Lexicographic order on (outer key, inner key).
  int compare(std::size_t i, NodeId d, std::span<const NodeId> g) const {
    auto gi = group(i);
    auto cmp_group = [&]() {
      auto c = std::lexicographical_compare_three_way(gi.begin(), gi.end(), g.begin(), g.end());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    };
    auto cmp_d = distinguished[i] < d ? -1 : (distinguished[i] > d ? 1 : 0);
    if (symmetry == Symmetry::Front) return cmp_d != 0 ? cmp_d : cmp_group();
    int cg = cmp_group();
    return cg != 0 ? cg : cmp_d;
  }
};

SymSparseTensor::SymSparseTensor() : support_(std::make_shared<Support>()) {}

SymSparseTensor::SymSparseTensor(std::shared_ptr<const Support> support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {}

SymSparseTensor::SymSparseTensor(int order, std::size_t dim, Symmetry symmetry,
                                 std::vector<Entry> entries, Loops loops) {
  if (order < 2) throw InvalidInput("tensor order must be at least 2");
  auto s = std::make_shared<Support>();
  s->order = order;
  s->dim = dim;
  s->symmetry = symmetry;
  s->loops = loops;

  for (const auto& e : entries) {
    const auto& g = e.key.group;
    if (g.size() != static_cast<std::size_t>(order - 1))
      throw InvalidInput("canonical key group must have k-1 nodes");
    if (e.key.distinguished >= dim) throw InvalidInput("node index out of range");
    for (std::size_t r = 0; r < g.size(); ++r) {
      if (g[r] >= dim) throw InvalidInput("node index out of range");
      if (r > 0 && g[r] < g[r - 1]) throw InvalidInput("canonical key group must be sorted");
      if (loops == Loops::Forbid) {
        if (r > 0 && g[r] == g[r - 1]) throw InvalidInput("repeated node in canonical key group");
        if (g[r] == e.key.distinguished)
          throw InvalidInput("distinguished node " + std::to_string(g[r] + 1) +
                             " also appears in its group");
      }
    }
    if (!(e.value >= 0.0) || !std::isfinite(e.value))
      throw InvalidInput("tensor values must be finite and nonnegative");
  }

  auto outer_less = [symmetry](const Entry& a, const Entry& b) {
    if (symmetry == Symmetry::Front)
      return std::tie(a.key.distinguished, a.key.group) < std::tie(b.key.distinguished, b.key.group);
    return std::tie(a.key.group, a.key.distinguished) < std::tie(b.key.group, b.key.distinguished);
  };
  std::sort(entries.begin(), entries.end(), outer_less);
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].key == entries[i - 1].key) throw InvalidInput("duplicate canonical key");

  for (const auto& e : entries) {
    if (e.value == 0.0) continue;
    s->distinguished.push_back(e.key.distinguished);
    s->groups.insert(s->groups.end(), e.key.group.begin(), e.key.group.end());
    s->multiplicity.push_back(orderings(e.key.group));
    values_.push_back(e.value);
  }

  const std::size_t m = values_.size();
  s->block_id.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    bool same = i > 0 && (symmetry == Symmetry::Front
                              ? s->distinguished[i] == s->distinguished[i - 1]
                              : std::ranges::equal(s->group(i), s->group(i - 1)));
    if (i > 0 && !same) s->block_start.push_back(i);
    s->block_id[i] = s->block_start.size() - 1;
  }
  if (m > 0) s->block_start.push_back(m);
  support_ = std::move(s);
}

int SymSparseTensor::order() const noexcept { return support_->order; }
std::size_t SymSparseTensor::dim() const noexcept { return support_->dim; }
Symmetry SymSparseTensor::symmetry() const noexcept { return support_->symmetry; }
Loops SymSparseTensor::loops() const noexcept { return support_->loops; }
NodeId SymSparseTensor::distinguished(std::size_t i) const { return support_->distinguished[i]; }
std::span<const NodeId> SymSparseTensor::group(std::size_t i) const { return support_->group(i); }
double SymSparseTensor::multiplicity(std::size_t i) const { return support_->multiplicity[i]; }

CanonicalKey SymSparseTensor::key(std::size_t i) const {
  auto g = group(i);
  return {distinguished(i), NodeSet(g.begin(), g.end())};
}

std::vector<SymSparseTensor::Entry> SymSparseTensor::entries() const {
  std::vector<Entry> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back({key(i), values_[i]});
  return out;
}

std::optional<std::size_t> SymSparseTensor::find(const CanonicalKey& key) const {
  if (key.group.size() != support_->width()) return std::nullopt;
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    int c = support_->compare(mid, key.distinguished, key.group);
    if (c == 0) return mid;
    if (c < 0) lo = mid + 1;
    else hi = mid;
  }
  return std::nullopt;
}

double SymSparseTensor::at(const CanonicalKey& key) const {
  auto i = find(key);
  return i ? values_[*i] : 0.0;
}

std::size_t SymSparseTensor::block_count() const noexcept {
  return support_->block_start.size() - 1;
}
std::size_t SymSparseTensor::block_begin(std::size_t b) const { return support_->block_start[b]; }
std::size_t SymSparseTensor::block_end(std::size_t b) const { return support_->block_start[b + 1]; }
std::size_t SymSparseTensor::block_of(std::size_t i) const { return support_->block_id[i]; }

std::optional<std::size_t> SymSparseTensor::find_context(std::span<const NodeId> tail) const {
  if (symmetry() != Symmetry::Back || tail.size() != support_->width()) return std::nullopt;
  std::size_t lo = 0, hi = block_count();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    auto g = group(block_begin(mid));
    auto c = std::lexicographical_compare_three_way(g.begin(), g.end(), tail.begin(), tail.end());
    if (c == 0) return mid;
    if (c < 0) lo = mid + 1;
    else hi = mid;
  }
  return std::nullopt;
}

SymSparseTensor SymSparseTensor::with_values(std::vector<double> values) const {
  if (values.size() != size()) throw InvalidInput("with_values: length mismatch");
  bool has_zero = false;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidInput("tensor values must be finite and nonnegative");
    has_zero = has_zero || v == 0.0;
  }
  if (!has_zero) return SymSparseTensor(support_, std::move(values));
  auto es = entries();
  for (std::size_t i = 0; i < es.size(); ++i) es[i].value = values[i];
  return SymSparseTensor(order(), dim(), symmetry(), std::move(es), loops());
}

bool SymSparseTensor::same_support(const SymSparseTensor& other) const {
  if (support_ == other.support_) return true;
  const auto& a = *support_;
  const auto& b = *other.support_;
  return a.order == b.order && a.dim == b.dim && a.symmetry == b.symmetry &&
         a.distinguished == b.distinguished && a.groups == b.groups;
}

DenseTensor SymSparseTensor::to_dense() const {
  if (dim() > 8) throw InvalidInput("dense fallback limited to n <= 8");
  DenseTensor d(order(), dim());
  const bool front = symmetry() == Symmetry::Front;
  std::vector<NodeId> idx(order());
  for (std::size_t i = 0; i < size(); ++i) {
    auto g = group(i);
    NodeSet perm(g.begin(), g.end());
    do {
      if (front) {
        idx[0] = distinguished(i);
        std::copy(perm.begin(), perm.end(), idx.begin() + 1);
      } else {
        std::copy(perm.begin(), perm.end(), idx.begin());
        idx.back() = distinguished(i);
      }
      d.at(idx) = values_[i];
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Contractions

Vector row_mass(const SymSparseTensor& t) {
  require_symmetry(t, Symmetry::Front, "row_mass");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(t.dim()));
  for (std::size_t i = 0; i < t.size(); ++i)
    out[t.distinguished(i)] += t.value(i) * t.multiplicity(i);
  return out;
}

namespace {

// Calls f(receiver, weight) for every distinct receiver r of entry i, where
// weight = orderings(S) * mult(r) / (k-1) counts tuples with r in slot 2.
template <class F>
void for_each_first_slot(const SymSparseTensor& t, std::size_t i, F&& f) {
  auto g = t.group(i);
  const double slots = static_cast<double>(g.size());
  std::size_t a = 0;
  while (a < g.size()) {
    std::size_t b = a;
    while (b < g.size() && g[b] == g[a]) ++b;
    f(g[a], t.multiplicity(i) * static_cast<double>(b - a) / slots);
    a = b;
  }
}

}  // namespace

Matrix receiver_marginal_matrix(const SymSparseTensor& t) {
  require_symmetry(t, Symmetry::Front, "receiver_marginal_matrix");
  const auto n = static_cast<Eigen::Index>(t.dim());
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const NodeId pivot = t.distinguished(i);
    const double value = t.value(i);
    for_each_first_slot(t, i, [&](NodeId r, double w) { out(pivot, r) += value * w; });
  }
  return out;
}

Vector receiver_mass(const SymSparseTensor& t) {
  require_symmetry(t, Symmetry::Front, "receiver_mass");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(t.dim()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double value = t.value(i);
    for_each_first_slot(t, i, [&](NodeId r, double w) { out[r] += value * w; });
  }
  return out;
}

Vector context_mass_by_block(const SymSparseTensor& t, const Vector& v) {
  require_symmetry(t, Symmetry::Back, "context_mass");
  require_size(v, t.dim(), "context_mass");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(t.block_count()));
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    double s = 0.0;
    for (std::size_t i = t.block_begin(b); i < t.block_end(b); ++i)
      s += t.value(i) * v[t.distinguished(i)];
    out[static_cast<Eigen::Index>(b)] = s;
  }
  return out;
}

ContextMap context_mass(const SymSparseTensor& t, const Vector& v) {
  Vector by_block = context_mass_by_block(t, v);
  ContextMap out;
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    auto g = t.group(t.block_begin(b));
    out.emplace_hint(out.end(), NodeSet(g.begin(), g.end()), by_block[static_cast<Eigen::Index>(b)]);
  }
  return out;
}

Vector polynomial_apply(const SymSparseTensor& t, const Vector& p) {
  require_symmetry(t, Symmetry::Back, "polynomial_apply");
  require_size(p, t.dim(), "polynomial_apply");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p[i] >= 0.0)) throw InvalidInput("polynomial_apply: negative entry in p");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(t.dim()));
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    const std::size_t first = t.block_begin(b);
    double weight = t.multiplicity(first);
    for (NodeId u : t.group(first)) weight *= p[u];
    if (weight == 0.0) continue;
    for (std::size_t i = first; i < t.block_end(b); ++i)
      out[t.distinguished(i)] += t.value(i) * weight;
  }
  return out;
}

SymSparseTensor scale_front(const SymSparseTensor& k, const Vector& u, const Vector& v) {
  require_symmetry(k, Symmetry::Front, "scale_front");
  require_size(u, k.dim(), "scale_front u");
  require_size(v, k.dim(), "scale_front v");
  require_positive(u, "scale_front u");
  require_positive(v, "scale_front v");
  std::vector<double> values(k.values());
  for (std::size_t i = 0; i < k.size(); ++i) {
    double f = u[k.distinguished(i)];
    for (NodeId r : k.group(i)) f *= v[r];
    values[i] *= f;
  }
  return k.with_values(std::move(values));
}

SymSparseTensor scale_back(const SymSparseTensor& k, const Vector& u_by_block, const Vector& v) {
  require_symmetry(k, Symmetry::Back, "scale_back");
  require_size(v, k.dim(), "scale_back v");
  require_size(u_by_block, k.block_count(), "scale_back U");
  require_positive(v, "scale_back v");
  require_positive(u_by_block, "scale_back U");
  std::vector<double> values(k.values());
  for (std::size_t i = 0; i < k.size(); ++i)
    values[i] *= u_by_block[static_cast<Eigen::Index>(k.block_of(i))] * v[k.distinguished(i)];
  return k.with_values(std::move(values));
}

SymSparseTensor scale_back(const SymSparseTensor& k, const ContextMap& u, const Vector& v) {
  require_symmetry(k, Symmetry::Back, "scale_back");
  Vector by_block(static_cast<Eigen::Index>(k.block_count()));
  for (std::size_t b = 0; b < k.block_count(); ++b) {
    auto g = k.group(k.block_begin(b));
    auto it = u.find(NodeSet(g.begin(), g.end()));
    if (it == u.end()) throw InvalidInput("scale_back: incomplete potentials, missing a tail set");
    by_block[static_cast<Eigen::Index>(b)] = it->second;
  }
  return scale_back(k, by_block, v);
}

}  // namespace hypermerw
