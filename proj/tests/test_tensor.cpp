#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hypermerw/error.hpp"
#include "hypermerw/tensor.hpp"
#include "support/instances.hpp"

using namespace hypermerw;
using Entry = SymSparseTensor::Entry;

namespace {

// Node ids in these tests are 0-based; comments quote them 1-based.
SymSparseTensor front(int k, std::size_t n, std::vector<Entry> e, Loops loops = Loops::Forbid) {
  return SymSparseTensor(k, n, Symmetry::Front, std::move(e), loops);
}
SymSparseTensor back(int k, std::size_t n, std::vector<Entry> e, Loops loops = Loops::Forbid) {
  return SymSparseTensor(k, n, Symmetry::Back, std::move(e), loops);
}

// Independent dense reference: fill every ordering by permuting the group.
DenseTensor densify(const SymSparseTensor& t) {
  DenseTensor d(t.order(), t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) {
    NodeSet g(t.group(i).begin(), t.group(i).end());
    do {
      std::vector<std::uint32_t> idx;
      if (t.symmetry() == Symmetry::Front) {
        idx.push_back(t.distinguished(i));
        idx.insert(idx.end(), g.begin(), g.end());
      } else {
        idx.assign(g.begin(), g.end());
        idx.push_back(t.distinguished(i));
      }
      d.at(idx) = t.value(i);
    } while (std::next_permutation(g.begin(), g.end()));
  }
  return d;
}

SymSparseTensor random_tensor(std::mt19937_64& rng, int k, std::size_t n, Symmetry sym, Loops loops) {
  std::bernoulli_distribution keep(0.6);
  std::uniform_real_distribution<double> val(0.1, 2.0);
  std::vector<Entry> e;
  const auto groups = loops == Loops::Allow ? hm_test::multisets(n, k - 1) : hm_test::subsets(n, k - 1, n);
  for (NodeId j = 0; j < n; ++j)
    for (const auto& g : groups) {
      if (loops == Loops::Forbid && std::find(g.begin(), g.end(), j) != g.end()) continue;
      if (keep(rng)) e.push_back({{j, g}, val(rng)});
    }
  return SymSparseTensor(k, n, sym, std::move(e), loops);
}

}  // namespace

TEST_CASE("orderings counts distinct permutations of a multiset") {
  CHECK(orderings(NodeSet{}) == 1.0);
  CHECK(orderings(NodeSet{1, 2, 3}) == 6.0);
  CHECK(orderings(NodeSet{1, 1, 3}) == 3.0);
  CHECK(orderings(NodeSet{2, 2, 2}) == 1.0);
}

TEST_CASE("construction validates canonical keys") {
  CHECK_THROWS_AS(front(3, 3, {{{0, {2, 1}}, 0.5}}), InvalidInput);  // unsorted group
  CHECK_THROWS_AS(front(3, 3, {{{0, {0, 1}}, 0.5}}), InvalidInput);  // pivot in group
  CHECK_THROWS_AS(front(3, 3, {{{0, {1, 1}}, 0.5}}), InvalidInput);  // repeat without loops
  CHECK_THROWS_AS(front(3, 3, {{{0, {1, 3}}, 0.5}}), InvalidInput);  // out of range
  CHECK_THROWS_AS(front(3, 3, {{{0, {1}}, 0.5}}), InvalidInput);     // wrong arity
  CHECK_THROWS_AS(front(3, 3, {{{0, {1, 2}}, -0.5}}), InvalidInput);
  CHECK_THROWS_AS(front(3, 3, {{{0, {1, 2}}, 0.5}, {{0, {1, 2}}, 0.25}}), InvalidInput);
  CHECK_THROWS_AS(front(1, 3, {}), InvalidInput);
  CHECK_NOTHROW(front(3, 3, {{{0, {0, 1}}, 0.5}, {{0, {1, 1}}, 0.5}}, Loops::Allow));

  auto t = front(3, 4, {{{2, {0, 1}}, 0.0}, {{1, {0, 3}}, 0.3}, {{0, {1, 2}}, 0.2}});
  REQUIRE(t.size() == 2);  // zero dropped
  CHECK(t.distinguished(0) == 0);
  CHECK(t.at({1, {0, 3}}) == doctest::Approx(0.3));
  CHECK(t.at({2, {0, 1}}) == 0.0);
  CHECK(t.block_count() == 2);
}

TEST_CASE("row_mass") {
  SUBCASE("single entry counts both orderings") {
    Vector r = row_mass(front(3, 3, {{{0, {1, 2}}, 0.5}}));
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 0.0);
  }
  SUBCASE("empty tensor") { CHECK(row_mass(front(3, 4, {})).isZero()); }
  SUBCASE("two entries on one pivot") {
    Vector r = row_mass(front(3, 4, {{{0, {1, 2}}, 0.25}, {{0, {1, 3}}, 0.25}}));
    CHECK(r[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("receiver_marginal_matrix") {
  Matrix m3 = receiver_marginal_matrix(front(3, 3, {{{0, {1, 2}}, 0.5}}));
  CHECK(m3(0, 0) == 0.0);
  CHECK(m3(0, 1) == doctest::Approx(0.5));
  CHECK(m3(0, 2) == doctest::Approx(0.5));
  Matrix m2 = receiver_marginal_matrix(front(2, 2, {{{0, {1}}, 0.7}}));
  CHECK(m2(0, 1) == doctest::Approx(0.7));
  Matrix m4 = receiver_marginal_matrix(front(4, 4, {{{0, {1, 2, 3}}, 1.0 / 6}}));
  for (int j = 1; j < 4; ++j) CHECK(m4(0, j) == doctest::Approx(1.0 / 3));
  CHECK(receiver_mass(front(4, 4, {{{0, {1, 2, 3}}, 1.0 / 6}})).isApprox(m4.colwise().sum().transpose()));
}

TEST_CASE("context_mass") {
  auto t = back(3, 4, {{{2, {0, 1}}, 0.5}, {{3, {0, 1}}, 0.5}});
  auto ones = context_mass(t, Vector::Ones(4));
  REQUIRE(ones.size() == 1);
  CHECK(ones.at({0, 1}) == doctest::Approx(1.0));
  Vector v(4);
  v << 1, 1, 2, 4;
  CHECK(context_mass(t, v).at({0, 1}) == doctest::Approx(3.0));
  CHECK(context_mass(back(3, 4, {}), v).empty());
}

TEST_CASE("polynomial_apply") {
  Vector p(3);
  p << 0.5, 0.5, 0;
  Vector r = polynomial_apply(back(3, 3, {{{2, {0, 1}}, 0.5}}), p);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == doctest::Approx(0.25));
  CHECK(polynomial_apply(back(3, 3, {{{2, {0, 1}}, 0.5}}), Vector::Zero(3)).isZero());

  Matrix P(3, 3);
  P << 0.2, 0.8, 0, 0.5, 0, 0.5, 0.1, 0.3, 0.6;
  std::vector<Entry> e;
  for (NodeId i = 0; i < 3; ++i)
    for (NodeId j = 0; j < 3; ++j) e.push_back({{j, {i}}, P(i, j)});
  Vector q(3);
  q << 0.3, 0.3, 0.4;
  CHECK(polynomial_apply(back(2, 3, e, Loops::Allow), q).isApprox(P.transpose() * q, 1e-14));
}

TEST_CASE("scale_front and scale_back") {
  auto k = front(3, 3, {{{0, {1, 2}}, 0.5}});
  CHECK(scale_front(k, Vector::Ones(3), Vector::Ones(3)).values() == k.values());
  Vector u(3), v(3);
  u << 2, 1, 1;
  v << 1, 3, 4;
  CHECK(scale_front(k, u, v).value(0) == doctest::Approx(12.0));
  CHECK(scale_front(front(3, 3, {}), u, v).empty());
  CHECK_THROWS_AS(scale_front(k, -u, v), InvalidInput);

  auto b = back(3, 3, {{{2, {0, 1}}, 0.5}});
  ContextMap U{{{0, 1}, 4.0}};
  Vector w(3);
  w << 1, 1, 0.5;
  CHECK(scale_back(b, U, w).value(0) == doctest::Approx(1.0));
  CHECK(scale_back(b, ContextMap{{{0, 1}, 1.0}}, Vector::Ones(3)).values() == b.values());
  CHECK(scale_back(back(3, 3, {}), ContextMap{}, w).empty());
  CHECK_THROWS_AS(scale_back(b, ContextMap{{{0, 2}, 1.0}}, w), InvalidInput);
  CHECK_THROWS_AS(scale_back(k, U, w), InvalidInput);  // wrong symmetry
}

TEST_CASE("contractions agree with dense enumeration on random tensors") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 3;
    const int k = 2 + trial % 3;
    const Loops loops = trial % 2 ? Loops::Allow : Loops::Forbid;
    CAPTURE(n);
    CAPTURE(k);
    CAPTURE(trial);

    auto f = random_tensor(rng, k, n, Symmetry::Front, loops);
    DenseTensor df = densify(f);
    CHECK(df.data() == f.to_dense().data());
    Vector rows = Vector::Zero(n);
    Matrix marg = Matrix::Zero(n, n);
    for (std::size_t c = 0; c < df.size(); ++c) {
      auto idx = df.multi_index(c);
      rows[idx[0]] += df[c];
      marg(idx[0], idx[1]) += df[c];
    }
    CHECK((row_mass(f) - rows).cwiseAbs().maxCoeff() <= 1e-12 * (1 + rows.maxCoeff()));
    CHECK((receiver_marginal_matrix(f) - marg).cwiseAbs().maxCoeff() <= 1e-12 * (1 + marg.maxCoeff()));
    CHECK((receiver_mass(f) - marg.colwise().sum().transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1 + marg.sum()));

    auto b = random_tensor(rng, k, n, Symmetry::Back, loops);
    DenseTensor db = densify(b);
    Vector p = Vector::Random(n).cwiseAbs();
    Vector v = Vector::Random(n).cwiseAbs().array() + 0.1;
    Vector poly = Vector::Zero(n);
    std::map<std::vector<std::uint32_t>, double> ctx;
    for (std::size_t c = 0; c < db.size(); ++c) {
      if (db[c] == 0.0) continue;
      auto idx = db.multi_index(c);
      double w = db[c];
      for (int s = 0; s + 1 < k; ++s) w *= p[idx[s]];
      poly[idx[k - 1]] += w;
      std::vector<std::uint32_t> tail(idx.begin(), idx.end() - 1);
      ctx[tail] += db[c] * v[idx[k - 1]];
    }
    Vector got = polynomial_apply(b, p);
    CHECK((got - poly).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, poly.cwiseAbs().maxCoeff()));
    CHECK((got.array() >= 0).all());
    for (const auto& [s, m] : context_mass(b, v)) {
      std::vector<std::uint32_t> tail(s.begin(), s.end());
      CHECK(ctx.at(tail) == doctest::Approx(m).epsilon(1e-12));
    }

    Vector u = Vector::Random(n).cwiseAbs().array() + 0.1;
    auto sf = scale_front(f, u, v);
    CHECK(sf.same_support(f));
    for (std::size_t i = 0; i < f.size(); ++i) {
      double expect = f.value(i) * u[f.distinguished(i)];
      for (NodeId r : f.group(i)) expect *= v[r];
      CHECK(sf.value(i) == doctest::Approx(expect).epsilon(1e-14));
    }
    Vector ub = Vector::Random(b.block_count()).cwiseAbs().array() + 0.1;
    auto sb = scale_back(b, ub, v);
    CHECK(sb.same_support(b));
    for (std::size_t i = 0; i < b.size(); ++i)
      CHECK(sb.value(i) == doctest::Approx(b.value(i) * ub[b.block_of(i)] * v[b.distinguished(i)]).epsilon(1e-14));
  }
}

TEST_CASE("rescaled copies share support and find contexts") {
  auto b = back(3, 4, {{{3, {0, 1}}, 0.5}, {{2, {0, 1}}, 0.5}, {{0, {1, 2}}, 1.0}});
  REQUIRE(b.block_count() == 2);
  auto blk = b.find_context(NodeSet{0, 1});
  REQUIRE(blk.has_value());
  CHECK(b.block_end(*blk) - b.block_begin(*blk) == 2);
  CHECK_FALSE(b.find_context(NodeSet{0, 3}).has_value());
  auto c = b.with_values({1, 2, 3});
  CHECK(c.same_support(b));
  CHECK(c.with_values({0, 2, 3}).size() == 2);
  CHECK_THROWS_AS(b.with_values({1, 2}), InvalidInput);
}
