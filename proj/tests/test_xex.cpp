#include "churnlab/xex_softmax.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "testutil.hpp"

using namespace churnlab;

namespace {

Matrix fd_matrix_gradient(const SimilarityMatrix& s,
                          const std::function<double(const SimilarityMatrix&)>& value,
                          double h = 1e-5) {
  Matrix g(s.rows(), s.cols());
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) {
      Matrix sp = s, sm = s;
      sp(i, j) += h;
      sm(i, j) -= h;
      g(i, j) = (value(sp) - value(sm)) / (2.0 * h);
    }
  }
  return g;
}

void check_gradient(const SimilarityMatrix& s, const XexLoss& loss,
                    const std::function<double(const SimilarityMatrix&)>& value, double tol) {
  Matrix fd = fd_matrix_gradient(s, value);
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j)
      CHECK(testutil::rel_err(loss.gradient(i, j), fd(i, j)) < tol);
}

}  // namespace

TEST_CASE("MiningSpec resolution") {
  CHECK(MiningSpec::top_fraction(0.5).resolve(4) == 2);
  CHECK(MiningSpec::top_fraction(0.5).resolve(5) == 3);  // ceil
  CHECK(MiningSpec::top_fraction(1.0).resolve(7) == 7);
  CHECK(MiningSpec::top_fraction(0.01).resolve(3) == 1);
  CHECK(MiningSpec::top_count(3).resolve(8) == 3);
  CHECK_THROWS_AS(MiningSpec::top_fraction(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MiningSpec::top_fraction(1.2), std::invalid_argument);
  CHECK_THROWS_AS(MiningSpec::top_count(0), std::invalid_argument);
  CHECK_THROWS_AS((void)MiningSpec::top_count(9).resolve(8), std::invalid_argument);
  CHECK_THROWS_AS((void)MiningSpec::top_fraction(0.5).resolve(0), std::invalid_argument);
}

TEST_CASE("cosine similarity matrix") {
  Matrix q(2, 3);
  q << 1, 0, 0, 0, 2, 0;  // rows normalize to e1, e2
  Matrix d = q;
  SimilarityMatrix s = cosine_similarity_matrix(q, d, 1.0);
  CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s(0, 1) == doctest::Approx(0.0));

  // default scaling squares lambda
  s = cosine_similarity_matrix(q, d, 20.0);
  CHECK(s(0, 0) == doctest::Approx(400.0).epsilon(1e-15));
  s = cosine_similarity_matrix(q, d, 20.0, TempScaling::lambda);
  CHECK(s(0, 0) == doctest::Approx(20.0).epsilon(1e-15));

  // entries always bounded by the scale
  Rng rng(109);
  Matrix a = testutil::random_scores(rng, 5, 4, -2.0, 2.0);
  Matrix b = testutil::random_scores(rng, 6, 4, -2.0, 2.0);
  s = cosine_similarity_matrix(a, b, 3.0);
  CHECK(s.rows() == 5);
  CHECK(s.cols() == 6);
  CHECK(s.cwiseAbs().maxCoeff() <= 9.0 + 1e-12);

  Matrix zero = Matrix::Zero(2, 3);
  CHECK_THROWS_AS((void)cosine_similarity_matrix(zero, d, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)cosine_similarity_matrix(q, Matrix::Zero(2, 4), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)cosine_similarity_matrix(q, d, 0.0), std::invalid_argument);
}

TEST_CASE("negatives_per_query lists the off-diagonal row entries in column order") {
  Matrix s(3, 3);
  s << 5, 1, 2,  //
      3, 6, 4,   //
      7, 8, 9;
  CHECK(negatives_per_query(s, 0) == std::vector<double>{1, 2});
  CHECK(negatives_per_query(s, 1) == std::vector<double>{3, 4});
  CHECK(negatives_per_query(s, 2) == std::vector<double>{7, 8});
  CHECK_THROWS_AS((void)negatives_per_query(s, 3), std::invalid_argument);
}

TEST_CASE("snm mining picks the highest negatives with deterministic ties") {
  Matrix s(3, 3);
  s << 2, 0, 1,  //
      0, 5, 3,   //
      4, 4, 0;
  // row 0, k=1: negatives are {0 (col 1), 1 (col 2)} -> value 1 at column 2
  auto cols = snm_mined_columns(s, 0, MiningSpec::top_count(1));
  CHECK(cols == std::vector<Index>{2});
  CHECK(s(0, cols[0]) == 1.0);
  // row 2 ties at 4: lower column wins
  cols = snm_mined_columns(s, 2, MiningSpec::top_count(1));
  CHECK(cols == std::vector<Index>{0});
  // full fraction keeps every negative, ascending order
  cols = snm_mined_columns(s, 1, MiningSpec::top_fraction(1.0));
  CHECK(cols == std::vector<Index>{0, 2});
}

TEST_CASE("ce mining ranks all off-diagonal entries with row-then-column ties") {
  Matrix s(2, 2);
  s << 1, 0,  //
      -1, 1;
  auto entries = ce_mined_entries(s, MiningSpec::top_count(1));
  REQUIRE(entries.size() == 1);
  CHECK(entries[0] == std::pair<Index, Index>(0, 1));
  CHECK(s(0, 1) == 0.0);

  // all off-diagonal entries equal: row-major prefix wins
  Matrix t = Matrix::Zero(3, 3);
  t.diagonal().setConstant(1.0);
  auto tied = ce_mined_entries(t, MiningSpec::top_count(3));
  REQUIRE(tied.size() == 3);
  CHECK(tied[0] == std::pair<Index, Index>(0, 1));
  CHECK(tied[1] == std::pair<Index, Index>(0, 2));
  CHECK(tied[2] == std::pair<Index, Index>(1, 0));

  // the pool is global: one hard row may own every mined entry
  Matrix u = Matrix::Zero(3, 3);
  u(1, 0) = 5.0;
  u(1, 2) = 6.0;
  auto hard = ce_mined_entries(u, MiningSpec::top_count(2));
  REQUIRE(hard.size() == 2);
  CHECK(hard[0] == std::pair<Index, Index>(1, 0));
  CHECK(hard[1] == std::pair<Index, Index>(1, 2));
}

TEST_CASE("sampled softmax loss on known matrices") {
  Matrix s(2, 2);
  s << 1, 0,  //
      0, 1;
  CHECK(sampled_softmax_loss(s).value == doctest::Approx(0.31326168751822286).epsilon(1e-15));

  // all-equal scores: every row gives log n
  for (Index n : {2, 3, 8}) {
    Matrix t = Matrix::Constant(n, n, 1.7);
    CHECK(std::abs(sampled_softmax_loss(t).value - std::log(static_cast<double>(n))) < 1e-12);
  }
  Matrix one = Matrix::Constant(1, 1, 4.2);
  CHECK(sampled_softmax_loss(one).value == doctest::Approx(0.0));

  Matrix rect(2, 3);
  rect << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS((void)sampled_softmax_loss(rect), std::invalid_argument);
}

TEST_CASE("ce softmax loss on known matrices") {
  Matrix s(2, 2);
  s << 1, 0,  //
      0, 1;
  CHECK(ce_softmax_loss(s).value == doctest::Approx(0.55144471393205108).epsilon(1e-15));
  for (Index n : {2, 3, 8}) {
    Matrix t = Matrix::Constant(n, n, -0.4);
    double expect = std::log(static_cast<double>(n * n - n + 1));
    CHECK(std::abs(ce_softmax_loss(t).value - expect) < 1e-12);
  }
}

TEST_CASE("mined variants recover the full losses at maximal k") {
  Rng rng(113);
  for (int t = 0; t < 100; ++t) {
    Index n = 2 + static_cast<Index>(rng.below(7));
    Matrix s = testutil::random_scores(rng, n, n, -3.0, 3.0);
    XexLoss snm = snm_loss(s, MiningSpec::top_count(n - 1));
    XexLoss samp = sampled_softmax_loss(s);
    CHECK(std::abs(snm.value - samp.value) < 1e-12);
    CHECK((snm.gradient - samp.gradient).cwiseAbs().maxCoeff() < 1e-12);

    XexLoss cem = ce_mining_loss(s, MiningSpec::top_count(n * n - n));
    XexLoss ce = ce_softmax_loss(s);
    CHECK(std::abs(cem.value - ce.value) < 1e-12);
    CHECK((cem.gradient - ce.gradient).cwiseAbs().maxCoeff() < 1e-12);

    // fraction 1.0 resolves to the same sets
    CHECK(std::abs(snm_loss(s, MiningSpec::top_fraction(1.0)).value - samp.value) < 1e-12);
    CHECK(std::abs(ce_mining_loss(s, MiningSpec::top_fraction(1.0)).value - ce.value) < 1e-12);
  }
}

TEST_CASE("losses are invariant to shifting all scores") {
  Rng rng(127);
  MiningSpec half = MiningSpec::top_fraction(0.5);
  for (int t = 0; t < 60; ++t) {
    Index n = 2 + static_cast<Index>(rng.below(7));
    Matrix s = testutil::random_scores(rng, n, n, -3.0, 3.0);
    for (double c : {-10.0, 3.7, 10.0}) {
      Matrix shifted = s.array() + c;
      CHECK(std::abs(sampled_softmax_loss(shifted).value - sampled_softmax_loss(s).value) < 1e-9);
      CHECK(std::abs(snm_loss(shifted, half).value - snm_loss(s, half).value) < 1e-9);
      CHECK(std::abs(ce_softmax_loss(shifted).value - ce_softmax_loss(s).value) < 1e-9);
      CHECK(std::abs(ce_mining_loss(shifted, half).value - ce_mining_loss(s, half).value) < 1e-9);
    }
  }
}

TEST_CASE("loss values are nondecreasing in the mined-set size") {
  Rng rng(131);
  for (int t = 0; t < 60; ++t) {
    Index n = 3 + static_cast<Index>(rng.below(6));
    Matrix s = testutil::random_scores(rng, n, n, -3.0, 3.0);
    double prev = -infinity();
    for (Index k = 1; k <= n - 1; ++k) {
      double v = snm_loss(s, MiningSpec::top_count(k)).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    prev = -infinity();
    for (Index k = 1; k <= n * n - n; ++k) {
      double v = ce_mining_loss(s, MiningSpec::top_count(k)).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    // the shared pool makes ce at least as hard as per-row sampled softmax
    CHECK(ce_softmax_loss(s).value >= sampled_softmax_loss(s).value - 1e-12);
  }
}

TEST_CASE("gradients match finite differences") {
  Rng rng(137);
  MiningSpec half = MiningSpec::top_fraction(0.5);
  for (int t = 0; t < 8; ++t) {
    Matrix s = testutil::random_scores(rng, 8, 8, -3.0, 3.0);
    check_gradient(s, sampled_softmax_loss(s),
                   [](const SimilarityMatrix& m) { return sampled_softmax_loss(m).value; }, 1e-5);
    check_gradient(s, ce_softmax_loss(s),
                   [](const SimilarityMatrix& m) { return ce_softmax_loss(m).value; }, 1e-5);
    check_gradient(
        s, snm_loss(s, half),
        [&](const SimilarityMatrix& m) { return snm_loss(m, half).value; }, 1e-4);
    check_gradient(
        s, ce_mining_loss(s, half),
        [&](const SimilarityMatrix& m) { return ce_mining_loss(m, half).value; }, 1e-4);
  }
}

TEST_CASE("gradients sum to zero and mirror shift invariance") {
  // shifting all scores by c leaves the loss unchanged, so the gradient
  // entries of each loss must sum to zero
  Rng rng(139);
  MiningSpec half = MiningSpec::top_fraction(0.5);
  for (int t = 0; t < 40; ++t) {
    Index n = 2 + static_cast<Index>(rng.below(7));
    Matrix s = testutil::random_scores(rng, n, n, -3.0, 3.0);
    CHECK(std::abs(sampled_softmax_loss(s).gradient.sum()) < 1e-12);
    CHECK(std::abs(snm_loss(s, half).gradient.sum()) < 1e-12);
    CHECK(std::abs(ce_softmax_loss(s).gradient.sum()) < 1e-12);
    CHECK(std::abs(ce_mining_loss(s, half).gradient.sum()) < 1e-12);
  }
}
