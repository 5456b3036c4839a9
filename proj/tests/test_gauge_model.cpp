#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gaugetc/atomic_model.hpp"
#include "gaugetc/dense.hpp"
#include "gaugetc/rng.hpp"
#include "gaugetc/tiny_norm.hpp"
#include "test_support.hpp"

using namespace gaugetc;

namespace {

// The 2x2 identity as a half-half mix of the all-ones vertex and the
// checkerboard vertex; reused across entry, inner-product and norm tests.
AtomicModel identity_exhibit() {
  const Shape shape({2, 2});
  std::vector<WeightedVertex> terms;
  terms.push_back(WeightedVertex{0.5, SignVertex(shape, {{1, 1}, {1, 1}})});
  terms.push_back(WeightedVertex{0.5, SignVertex(shape, {{1, -1}, {1, -1}})});
  return AtomicModel(shape, 1.0, std::move(terms));
}

}  // namespace

TEST_CASE("vertex entries are sign products") {
  CHECK(SignVertex(Shape({2, 2}), {{1, 1}, {1, 1}}).entry(EntryIndex{{1, 1}}) == 1);
  CHECK(SignVertex(Shape({2, 3, 2}), {{1, -1}, {1, 1, 1}, {-1, 1}})
            .entry(EntryIndex{{1, 0, 0}}) == 1);
  CHECK(SignVertex(Shape({2, 2}), {{1, -1}, {1, 1}}).entry(EntryIndex{{1, 0}}) == -1);
  CHECK_THROWS_AS(SignVertex(Shape({2, 2}), {{1, 0}, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(SignVertex(Shape({2, 2}), {{1, 1, 1}, {1, 1}}), std::invalid_argument);
}

TEST_CASE("vertex projection follows the index order") {
  const Shape shape({2, 2});
  const SignVertex v(shape, {{1, -1}, {1, -1}});
  const std::vector<EntryIndex> u = {EntryIndex{{0, 0}}, EntryIndex{{1, 1}}};
  CHECK(v.project(u) == std::vector<int8_t>{1, 1});
  CHECK(v.project({}).empty());
  const SignVertex w(shape, {{1, -1}, {1, 1}});
  const std::vector<EntryIndex> single = {EntryIndex{{1, 0}}};
  CHECK(w.project(single) == std::vector<int8_t>{-1});
}

TEST_CASE("two whole-mode flips preserve every entry") {
  const Shape shape({2, 3, 2});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const SignVertex v = testsupport::random_vertex(shape, rng);
    std::vector<int8_t> flipped = v.flat_signs();
    for (int j = 0; j < shape.dim(1); ++j) {
      flipped[static_cast<size_t>(shape.mode_offset(1) + j)] *= -1;
    }
    for (int j = 0; j < shape.dim(2); ++j) {
      flipped[static_cast<size_t>(shape.mode_offset(2) + j)] *= -1;
    }
    const SignVertex w(shape, flipped);
    for (int64_t f = 0; f < shape.entry_count(); ++f) {
      const EntryIndex x = shape.index_from_flat(f);
      CHECK(v.entry(x) == w.entry(x));
    }
  }
}

TEST_CASE("canonicalize matches the worked example and is idempotent") {
  const Shape shape({2, 2});
  const SignVertex v(shape, {{1, 1}, {-1, 1}});
  const SignVertex c = v.canonicalized();
  CHECK(c == SignVertex(shape, {{-1, -1}, {1, -1}}));
  CHECK(c.canonicalized() == c);
  for (int64_t f = 0; f < shape.entry_count(); ++f) {
    const EntryIndex x = shape.index_from_flat(f);
    CHECK(v.entry(x) == c.entry(x));
  }
}

TEST_CASE("canonicalize preserves entries on random vertices") {
  const Shape shape({3, 2, 2});
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const SignVertex v = testsupport::random_vertex(shape, rng);
    const SignVertex c = v.canonicalized();
    CHECK(c.is_canonical());
    for (int64_t f = 0; f < shape.entry_count(); ++f) {
      const EntryIndex x = shape.index_from_flat(f);
      CHECK(v.entry(x) == c.entry(x));
    }
  }
}

TEST_CASE("model entries: single term, identity exhibit, empty model") {
  const Shape shape({2, 2});
  const SignVertex v(shape, {{1, -1}, {1, -1}});
  const AtomicModel single(shape, 1.0, {WeightedVertex{1.0, v}});
  for (int64_t f = 0; f < 4; ++f) {
    const EntryIndex x = shape.index_from_flat(f);
    CHECK(single.entry(x) == v.entry(x));
  }

  const AtomicModel identity = identity_exhibit();
  CHECK(identity.entry(EntryIndex{{0, 0}}) == doctest::Approx(1.0));
  CHECK(identity.entry(EntryIndex{{0, 1}}) == doctest::Approx(0.0));
  CHECK(identity.entry(EntryIndex{{1, 0}}) == doctest::Approx(0.0));
  CHECK(identity.entry(EntryIndex{{1, 1}}) == doctest::Approx(1.0));

  const AtomicModel zero = AtomicModel::zero(shape);
  for (int64_t f = 0; f < 4; ++f) {
    CHECK(zero.entry(shape.index_from_flat(f)) == 0.0);
  }
}

TEST_CASE("model invariants enforced at construction") {
  const Shape shape({2, 2});
  const SignVertex v = SignVertex::all_plus(shape);
  CHECK_THROWS_AS(AtomicModel(shape, 1.0, {WeightedVertex{-0.1, v}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(AtomicModel(shape, 1.0,
                              {WeightedVertex{0.6, v}, WeightedVertex{0.6, v.negated()}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(AtomicModel(shape, 1.0,
                              {WeightedVertex{0.3, v}, WeightedVertex{0.3, v}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(AtomicModel(shape, -1.0, {}), std::invalid_argument);
}

TEST_CASE("factored inner product: vertex norm, identity exhibit, zero model") {
  const Shape shape({2, 3, 2});
  const AtomicModel unit(shape, 1.0,
                         {WeightedVertex{1.0, SignVertex::all_plus(shape)}});
  CHECK(inner_product(unit, unit) == doctest::Approx(12.0));  // entry count

  const AtomicModel identity = identity_exhibit();
  CHECK(inner_product(identity, identity) == doctest::Approx(2.0));

  CHECK(inner_product(identity, AtomicModel::zero(Shape({2, 2}))) == 0.0);
  CHECK_THROWS_AS(inner_product(unit, identity), std::invalid_argument);
}

TEST_CASE("factored inner product agrees with dense evaluation") {
  std::mt19937_64 rng(29);
  for (const Shape& shape : {Shape({3, 3}), Shape({2, 2, 2}), Shape({4, 3, 2})}) {
    for (int trial = 0; trial < 10; ++trial) {
      const AtomicModel a = testsupport::random_model(shape, 4, 0.9, rng);
      const AtomicModel b = testsupport::random_model(shape, 4, 0.7, rng);
      const std::vector<double> da = materialize_dense(
          [&](const EntryIndex& x) { return a.entry(x); }, shape);
      const std::vector<double> db = materialize_dense(
          [&](const EntryIndex& x) { return b.entry(x); }, shape);
      double dense_dot = 0.0;
      for (size_t i = 0; i < da.size(); ++i) dense_dot += da[i] * db[i];
      const double factored = inner_product(a, b);
      CHECK(std::abs(factored - dense_dot) <= 1e-12 * std::max(1.0, std::abs(dense_dot)));
    }
  }
}

TEST_CASE("model json round trip") {
  std::mt19937_64 rng(31);
  const AtomicModel model = testsupport::random_model(Shape({2, 3, 2}), 3, 0.85, rng);
  const std::string text = model_to_json(model);
  const AtomicModel loaded = model_from_json(text);
  CHECK(loaded.shape() == model.shape());
  CHECK(loaded.lambda() == model.lambda());
  REQUIRE(loaded.term_count() == model.term_count());
  for (int i = 0; i < model.term_count(); ++i) {
    CHECK(loaded.terms()[static_cast<size_t>(i)].weight ==
          model.terms()[static_cast<size_t>(i)].weight);
    CHECK(loaded.terms()[static_cast<size_t>(i)].vertex ==
          model.terms()[static_cast<size_t>(i)].vertex);
  }
  CHECK(model_to_json(loaded) == text);
  CHECK_THROWS_AS(model_from_json("{\"shape\":[2]}"), std::invalid_argument);
  CHECK_THROWS_AS(
      model_from_json("{\"shape\":[2],\"lambda\":1,\"terms\":[{\"weight\":1,"
                      "\"signs\":[[1,2]]}]}"),
      std::invalid_argument);
}

TEST_CASE("canonical vertex enumeration covers distinct tensors exactly once") {
  const Shape shape({2, 3});
  const std::vector<SignVertex> vertices = enumerate_canonical_vertices(shape);
  CHECK(vertices.size() == 16);  // 2^(5-2+1)
  for (size_t i = 0; i < vertices.size(); ++i) {
    CHECK(vertices[i].is_canonical());
    for (size_t j = 0; j < i; ++j) {
      bool same = true;
      for (int64_t f = 0; f < shape.entry_count() && same; ++f) {
        const EntryIndex x = shape.index_from_flat(f);
        same = vertices[i].entry(x) == vertices[j].entry(x);
      }
      CHECK_FALSE(same);
    }
  }
}

TEST_CASE("tiny norm: vertices, identity, zero") {
  const Shape shape({2, 2});
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 5; ++trial) {
    const SignVertex v = testsupport::random_vertex(shape, rng);
    const std::vector<double> dense = materialize_dense(
        [&](const EntryIndex& x) { return static_cast<double>(v.entry(x)); }, shape);
    CHECK(tiny_norm_oracle(dense, shape) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(tiny_norm_oracle(std::vector<double>{1, 0, 0, 1}, shape) == 1.0);
  CHECK(tiny_norm_oracle(std::vector<double>{0, 0, 0, 0}, shape) == 0.0);
  CHECK_THROWS_AS(tiny_norm_oracle(std::vector<double>(1 << 9, 0.0),
                                   Shape({2, 2, 2, 2, 2, 2, 2, 2, 2})),
                  std::invalid_argument);
}

TEST_CASE("tiny norm axioms on random small tensors") {
  std::mt19937_64 rng(41);
  const Shape shape({2, 2, 2});
  for (int trial = 0; trial < 8; ++trial) {
    const AtomicModel a = testsupport::random_model(shape, 3, 0.9, rng);
    const AtomicModel b = testsupport::random_model(shape, 3, 0.6, rng);
    std::vector<double> da = materialize_dense(
        [&](const EntryIndex& x) { return a.entry(x); }, shape);
    std::vector<double> db = materialize_dense(
        [&](const EntryIndex& x) { return b.entry(x); }, shape);
    const double na = tiny_norm_oracle(da, shape);
    const double nb = tiny_norm_oracle(db, shape);

    std::vector<double> neg(da.size());
    for (size_t i = 0; i < da.size(); ++i) neg[i] = -da[i];
    CHECK(tiny_norm_oracle(neg, shape) == na);  // mirrored program, bitwise

    const double alpha = 0.25 + 2.0 * uniform_unit(rng);
    std::vector<double> scaled(da.size());
    for (size_t i = 0; i < da.size(); ++i) scaled[i] = alpha * da[i];
    CHECK(tiny_norm_oracle(scaled, shape) ==
          doctest::Approx(alpha * na).epsilon(1e-9));

    std::vector<double> sum(da.size());
    for (size_t i = 0; i < da.size(); ++i) sum[i] = da[i] + db[i];
    CHECK(tiny_norm_oracle(sum, shape) <= na + nb + 1e-9);
  }
}

TEST_CASE("norm sandwich on weighted vertex sums") {
  std::mt19937_64 rng(43);
  const Shape shape({3, 2, 2});
  for (int trial = 0; trial < 10; ++trial) {
    const AtomicModel model = testsupport::random_model(shape, 3, 0.95, rng);
    const double s = model.weight_sum();
    const std::vector<double> dense = materialize_dense(
        [&](const EntryIndex& x) { return model.entry(x); }, shape);
    double max_abs = 0.0;
    for (const double v : dense) max_abs = std::max(max_abs, std::abs(v));
    const double norm = tiny_norm_oracle(dense, shape);
    CHECK(norm >= max_abs - 1e-9);
    CHECK(norm <= s + 1e-9);
  }
}
