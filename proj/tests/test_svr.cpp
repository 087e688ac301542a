#include "finsent/svr.hpp"

#include <cmath>

#include "doctest.h"
#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "svr_oracle.hpp"

using namespace finsent;

namespace {

SparseFeatureVector dense_to_sparse(const std::vector<double>& x) {
  SparseFeatureVector v;
  v.width = static_cast<std::uint32_t>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0)
      v.entries.emplace_back(static_cast<std::uint32_t>(i), x[i]);
  }
  return v;
}

struct Fixture {
  svr_oracle::Dense X;
  std::vector<double> y;
  double C;
  double eps;

  std::vector<SparseFeatureVector> sparse() const {
    std::vector<SparseFeatureVector> out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(dense_to_sparse(x));
    return out;
  }
};

Fixture random_fixture(std::size_t n, std::size_t d, double C, double eps,
                       std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  f.C = C;
  f.eps = eps;
  std::vector<double> true_w(d);
  for (auto& w : true_w) w = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1, 1);
    double target = svr_oracle::dot(true_w, x) + 0.1 * rng.uniform(-1, 1);
    f.X.push_back(std::move(x));
    f.y.push_back(target);
  }
  return f;
}

SvrConfig tight_config(double C, double eps) {
  SvrConfig cfg;
  cfg.C = C;
  cfg.epsilon = eps;
  cfg.tol = 1e-10;
  cfg.max_iter = 100000;
  cfg.seed = 7;
  return cfg;
}

double violation_sum(const SvrModel& model,
                     const std::vector<SparseFeatureVector>& X,
                     const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    s += std::max(0.0, std::abs(predict_svr(model, X[i]) - y[i]) -
                           model.config.epsilon);
  }
  return s;
}

}  // namespace

TEST_CASE("interpolating line lies in the tube") {
  // X = {(1)->1, (2)->2}, C=10, eps=0: exact fit w=1, b=0
  std::vector<SparseFeatureVector> X{dense_to_sparse({1.0}),
                                     dense_to_sparse({2.0})};
  std::vector<double> y{1.0, 2.0};
  SvrModel model = train_svr(X, y, tight_config(10.0, 0.0));
  CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(model.bias == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));

  svr_oracle::Result ref = svr_oracle::solve({{1.0}, {2.0}}, y, 10.0, 0.0);
  CHECK(ref.gap <= 1e-9);
  CHECK(svr_objective(model, X, y) ==
        doctest::Approx(ref.primal).epsilon(1e-6));
}

TEST_CASE("constant targets give a constant predictor") {
  Rng rng(11);
  std::vector<SparseFeatureVector> X;
  std::vector<double> y;
  for (int i = 0; i < 5; ++i) {
    X.push_back(dense_to_sparse(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
    y.push_back(0.37);
  }
  SvrModel model = train_svr(X, y, tight_config(1.0, 0.1));
  for (double w : model.weights) CHECK(std::abs(w) <= 1e-6);
  CHECK(model.bias == doctest::Approx(0.37).epsilon(1e-9));
  CHECK(model.training_summary.duality_gap <= 1e-10);
}

TEST_CASE("oracle equivalence on random fixtures") {
  const Fixture fixtures[] = {
      random_fixture(30, 5, 1.0, 0.05, 21),
      random_fixture(20, 3, 0.1, 0.01, 22),
      random_fixture(12, 2, 0.5, 0.0, 23),
  };
  for (const auto& f : fixtures) {
    CAPTURE(f.X.size());
    auto X = f.sparse();
    SvrModel model = train_svr(X, f.y, tight_config(f.C, f.eps));
    svr_oracle::Result ref = svr_oracle::solve(f.X, f.y, f.C, f.eps);
    REQUIRE(ref.gap <= 1e-9 * std::max(1.0, std::abs(ref.primal)));

    const double mine = svr_objective(model, X, f.y);
    CHECK(std::abs(mine - ref.primal) <=
          1e-6 * std::max(1.0, std::abs(ref.primal)));
    for (std::size_t i = 0; i < X.size(); ++i) {
      CHECK(std::abs(predict_svr(model, X[i]) -
                     (svr_oracle::dot(ref.w, f.X[i]) + ref.bias)) <= 1e-3);
    }
  }
}

TEST_CASE("svr_objective edge cases") {
  SvrModel zero;
  zero.weights = {0.0};
  zero.bias = 0.0;
  zero.config.C = 1.0;

  zero.config.epsilon = 0.1;
  std::vector<SparseFeatureVector> X{dense_to_sparse({1.0})};
  CHECK(svr_objective(zero, X, {0.0}) == 0.0);

  zero.config.epsilon = 0.0;
  CHECK(svr_objective(zero, X, {1.0}) == 1.0);
}

TEST_CASE("predict_svr") {
  SvrModel model;
  model.weights = {1.0, 2.0};
  model.bias = 0.5;
  SparseFeatureVector x;
  x.width = 2;
  x.entries = {{0, 1.0}, {1, 1.0}};
  CHECK(predict_svr(model, x) == 3.5);

  SparseFeatureVector zero;
  zero.width = 2;
  CHECK(predict_svr(model, zero) == 0.5);

  SparseFeatureVector wrong;
  wrong.width = 3;
  CHECK_THROWS_AS(predict_svr(model, wrong), DimensionMismatchError);
}

TEST_CASE("input validation") {
  std::vector<SparseFeatureVector> X{dense_to_sparse({1.0})};
  CHECK_THROWS_AS(train_svr(X, {}, SvrConfig{}), DimensionMismatchError);
  CHECK_THROWS_AS(train_svr({}, {}, SvrConfig{}), DimensionMismatchError);
  CHECK_THROWS_AS(train_svr(X, {std::nan("")}, SvrConfig{}), NonFiniteError);

  SvrConfig bad;
  bad.C = -1;
  CHECK_THROWS_AS(train_svr(X, {1.0}, bad), ConfigError);
}

TEST_CASE("determinism: identical inputs give bit-identical models") {
  Fixture f = random_fixture(25, 4, 0.5, 0.02, 31);
  auto X = f.sparse();
  SvrModel a = train_svr(X, f.y, tight_config(f.C, f.eps));
  SvrModel b = train_svr(X, f.y, tight_config(f.C, f.eps));
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK(a.training_summary.epochs == b.training_summary.epochs);
}

TEST_CASE("best-so-far primal objective is non-increasing") {
  Fixture f = random_fixture(30, 5, 1.0, 0.05, 41);
  SvrModel model = train_svr(f.sparse(), f.y, tight_config(f.C, f.eps));
  const auto& trace = model.training_summary.primal_trace;
  REQUIRE(!trace.empty());
  double best = trace.front();
  for (double p : trace) {
    double next_best = std::min(best, p);
    CHECK(next_best <= best + 1e-9);
    best = next_best;
  }
  CHECK(trace.back() <= trace.front() + 1e-9);
}

TEST_CASE("epsilon-tube complementary slackness") {
  for (std::uint64_t seed : {51ULL, 52ULL}) {
    Fixture f = random_fixture(20, 3, 1.0, 0.1, seed);
    auto X = f.sparse();
    SvrModel model = train_svr(X, f.y, tight_config(f.C, f.eps));
    REQUIRE(model.dual_coefficients.size() == X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double err = std::abs(predict_svr(model, X[i]) - f.y[i]);
      if (err < f.eps - 1e-4) {
        CHECK(std::abs(model.dual_coefficients[i]) <= 1e-4);
      }
    }
  }
}

TEST_CASE("doubling C weakly decreases tube violations") {
  for (std::uint64_t seed : {61ULL, 62ULL, 63ULL}) {
    Fixture f = random_fixture(25, 4, 0.25, 0.05, seed);
    auto X = f.sparse();
    SvrModel small_c = train_svr(X, f.y, tight_config(0.25, f.eps));
    SvrModel big_c = train_svr(X, f.y, tight_config(0.5, f.eps));
    CHECK(violation_sum(big_c, X, f.y) <=
          violation_sum(small_c, X, f.y) + 1e-8);
  }
}

TEST_CASE("model json round-trip") {
  Fixture f = random_fixture(10, 3, 0.5, 0.01, 71);
  SvrModel model = train_svr(f.sparse(), f.y, tight_config(f.C, f.eps));
  SvrModel back = svr_model_from_json(svr_model_to_json(model));
  CHECK(back.weights == model.weights);
  CHECK(back.bias == model.bias);
  CHECK(back.config.C == model.config.C);
  CHECK(back.config.epsilon == model.config.epsilon);
}

TEST_CASE("solver reaches tolerance on text-like sparse binary data") {
  // wide binary features with duplicated rows, the shape real n-gram data
  // takes; the duplicated rows make some pair subproblems degenerate
  for (std::uint64_t seed : {81ULL, 82ULL}) {
    Rng rng(seed);
    const std::size_t n = 60, width = 300;
    std::vector<SparseFeatureVector> X;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 10 == 9) {
        X.push_back(X[i - 1]);  // exact duplicate
        y.push_back(y[i - 1]);
        continue;
      }
      SparseFeatureVector v;
      v.width = width;
      std::uint32_t col = static_cast<std::uint32_t>(rng.uniform_index(12));
      while (col < width) {
        v.entries.emplace_back(col, 1.0);
        col += 1 + static_cast<std::uint32_t>(rng.uniform_index(30));
      }
      X.push_back(std::move(v));
      y.push_back(rng.uniform(-1, 1));
    }
    SvrConfig cfg = tight_config(0.1, 0.01);
    cfg.tol = 1e-8;
    SvrModel model = train_svr(X, y, cfg);
    CHECK(model.training_summary.duality_gap <= 1e-8);
    CHECK(model.training_summary.epochs < cfg.max_iter);
  }
}

TEST_CASE("optimal_bias: flat interval midpoint and crossings") {
  // all residuals equal: zero-loss interval, midpoint is the residual
  std::vector<double> same{0.5, 0.5, 0.5};
  CHECK(optimal_bias(same, 0.2) == doctest::Approx(0.5).epsilon(1e-12));

  // eps=0: plain median-like minimizer of sum |b - r|
  std::vector<double> spread{0.0, 1.0, 10.0};
  CHECK(optimal_bias(spread, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}
