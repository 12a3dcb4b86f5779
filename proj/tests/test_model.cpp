// Copyright (c) 2026 The Lectometer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "lectometer/model.hpp"
#include "oracles.hpp"

using namespace lectometer;
using namespace lectometer::model;

namespace {

struct Instance {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Eigen::MatrixXd X;
  std::vector<int> y;
};

Instance random_instance(int k, int dim, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Instance in{Eigen::MatrixXd(k, dim), Eigen::VectorXd(k), Eigen::MatrixXd(n, dim), {}};
  for (Eigen::Index i = 0; i < in.W.size(); ++i) in.W.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < in.b.size(); ++i) in.b(i) = normal(rng);
  for (Eigen::Index i = 0; i < in.X.size(); ++i) in.X.data()[i] = 2.0 * normal(rng);
  for (int i = 0; i < n; ++i) in.y.push_back(static_cast<int>(rng() % static_cast<unsigned>(k)));
  return in;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
  Eigen::VectorXd t(W.size() + b.size());
  t << Eigen::Map<const Eigen::VectorXd>(W.data(), W.size()), b;
  return t;
}

ProbeModel zero_model(int k, int dim) {
  ProbeModel m;
  for (int i = 0; i < k; ++i) m.classes.push_back(std::string(1, static_cast<char>('a' + i)));
  m.W = Eigen::MatrixXd::Zero(k, dim);
  m.b = Eigen::VectorXd::Zero(k);
  return m;
}

}  // namespace

TEST_CASE("objective at zero parameters is N ln K") {
  for (int k : {2, 3, 7}) {
    auto in = random_instance(k, 4, 15, static_cast<std::uint64_t>(k));
    in.W.setZero();
    in.b.setZero();
    const auto obj = objective_and_gradient<double>(in.W, in.b, in.X, in.y, 1.0);
    CHECK(obj.value == doctest::Approx(15 * std::log(static_cast<double>(k))).epsilon(1e-14));
  }
}

TEST_CASE("objective symmetric under label swap") {
  Eigen::MatrixXd X(2, 1);
  X << 1, -1;
  for (double w : {-1.3, 0.0, 0.4, 2.5}) {
    Eigen::MatrixXd W(2, 1), Wswap(2, 1);
    W << w, -w;
    Wswap << -w, w;
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
    const std::vector<int> y{0, 1}, yswap{1, 0};
    const double a = objective_and_gradient<double>(W, b, X, y, 1.0).value;
    const double s = objective_and_gradient<double>(Wswap, b, X, yswap, 1.0).value;
    CHECK(a == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("objective matches the loop reference and works in long double") {
  const auto in = random_instance(3, 5, 20, 99);
  const auto obj = objective_and_gradient<double>(in.W, in.b, in.X, in.y, 0.7);
  CHECK(obj.value == doctest::Approx(oracle::naive_objective(in.W, in.b, in.X, in.y, 0.7)).epsilon(1e-12));

  const auto ld = objective_and_gradient<long double>(
      in.W.cast<long double>(), in.b.cast<long double>(), in.X.cast<long double>(), in.y, 0.7L);
  CHECK(static_cast<double>(ld.value) == doctest::Approx(obj.value).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central differences") {
  double worst = 0.0;
  std::uint64_t seed = 1000;
  for (int k : {2, 3, 5}) {
    for (int dim : {2, 8}) {
      for (int rep = 0; rep < 3; ++rep) {
        const auto in = random_instance(k, dim, 20, seed++);
        const double C = 0.5 + rep;
        const auto obj = objective_and_gradient<double>(in.W, in.b, in.X, in.y, C);
        const auto f = [&](const Eigen::VectorXd& t) {
          Eigen::MatrixXd W = Eigen::Map<const Eigen::MatrixXd>(t.data(), k, dim);
          Eigen::VectorXd b = t.tail(k);
          return oracle::naive_objective(W, b, in.X, in.y, C);
        };
        const Eigen::VectorXd fd = oracle::finite_difference(f, flatten(in.W, in.b), 1e-5);
        const Eigen::VectorXd an = flatten(obj.grad_W, obj.grad_b);
        const double rel = (an - fd).norm() / std::max(1e-12, fd.norm());
        worst = std::max(worst, rel);
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("objective is convex along random segments") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_instance(3, 4, 12, 500 + static_cast<std::uint64_t>(trial));
    auto b = random_instance(3, 4, 12, 900 + static_cast<std::uint64_t>(trial));
    b.W *= 3.0;
    const double t = u(rng);
    const auto value = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& bias) {
      return objective_and_gradient<double>(W, bias, a.X, a.y, 1.0).value;
    };
    const double mid = value(t * a.W + (1 - t) * b.W, t * a.b + (1 - t) * b.b);
    CHECK(mid <= t * value(a.W, a.b) + (1 - t) * value(b.W, b.b) + 1e-9);
  }
}

TEST_CASE("objective input errors") {
  auto in = random_instance(2, 3, 4, 1);
  CHECK_THROWS_AS(objective_and_gradient<double>(in.W, in.b, Eigen::MatrixXd(0, 3), {}, 1.0),
                  ValidationError);
  in.X(0, 0) = std::nan("");
  CHECK_THROWS_AS(objective_and_gradient<double>(in.W, in.b, in.X, in.y, 1.0), ValidationError);
}

TEST_CASE("predict_proba") {
  const auto m = zero_model(4, 3);
  const Eigen::VectorXd p = m.predict_proba(Eigen::Vector3d(1, -2, 5));
  for (int i = 0; i < 4; ++i) CHECK(p(i) == 0.25);

  auto two = zero_model(2, 1);
  two.b << 2, 0;
  const Eigen::VectorXd q = two.predict_proba(Eigen::VectorXd::Zero(1));
  CHECK(q(0) == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1)).epsilon(1e-15));
  CHECK(q(0) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(q(1) == doctest::Approx(0.1192).epsilon(1e-3));

  CHECK_THROWS_AS(m.predict_proba(Eigen::VectorXd::Zero(2)), ValidationError);
  CHECK_THROWS_AS(m.predict_label(Eigen::Vector3d(0, std::nan(""), 0)), ValidationError);
}

TEST_CASE("probabilities lie on the simplex and ignore logit shifts") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 6);
    const auto in = random_instance(k, 5, 1, 40 + static_cast<std::uint64_t>(trial));
    ProbeModel m = zero_model(k, 5);
    m.W = 0.5 * in.W;
    m.b = in.b;
    const Eigen::VectorXd x = in.X.row(0).transpose();
    const Eigen::VectorXd p = m.predict_proba(x);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK((p.array() > 0.0).all());
    CHECK((p.array() < 1.0).all());

    ProbeModel shifted = m;
    shifted.b.array() += 50.0 * normal(rng);
    CHECK(shifted.predict_proba(x).isApprox(p, 1e-12));
  }
}

TEST_CASE("predict_label: argmax, tie rule and scale invariance") {
  auto m = zero_model(3, 1);
  m.b << std::log(0.7), std::log(0.2), std::log(0.1);
  CHECK(m.predict_index(Eigen::VectorXd::Zero(1)) == 0);
  CHECK(m.predict_label(Eigen::VectorXd::Zero(1)) == "a");

  auto tie = zero_model(2, 1);
  CHECK(tie.predict_index(Eigen::VectorXd::Ones(1)) == 0);
  tie.b << 0.3, 0.3;
  CHECK(tie.predict_label(Eigen::VectorXd::Ones(1)) == "a");

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(4, 3, 1, 300 + static_cast<std::uint64_t>(trial));
    ProbeModel r = zero_model(4, 3);
    r.W = in.W;
    r.b = in.b;
    const Eigen::VectorXd x = in.X.row(0).transpose();
    const int label = r.predict_index(x);
    const double a = 0.05 + static_cast<double>(rng() % 100) / 10.0;
    ProbeModel scaled = r;
    scaled.W *= a;
    scaled.b *= a;
    CHECK(scaled.predict_index(x) == label);
  }
}

TEST_CASE("fit on uninformative features recovers class priors") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 3);
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i % 2 ? "b" : "a");
  const auto result = fit(X, labels);
  CHECK(result.report.converged);
  CHECK(result.model.W.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd p = result.model.predict_proba(Eigen::Vector3d(1, 2, 3));
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(result.report.initial_objective == doctest::Approx(10 * std::log(2.0)));
}

TEST_CASE("fit on the 1-D two-point problem reaches the grid-search minimum") {
  Eigen::MatrixXd X(2, 1);
  X << 1, -1;
  const std::vector<std::string> labels{"1", "0"};
  const auto result = fit(X, labels, {.C = 1.0, .tol = 1e-9});
  CHECK(result.report.converged);

  const std::vector<int> y{1, 0};
  const double grid = oracle::zoom_grid_min_4d(
      [&](const std::array<double, 4>& p) {
        Eigen::MatrixXd W(2, 1);
        W << p[0], p[1];
        Eigen::VectorXd b(2);
        b << p[2], p[3];
        return oracle::naive_objective(W, b, X, y, 1.0);
      },
      -4.0, 4.0);
  // By symmetry the problem reduces to min_w 2 log(1 + e^{-2w}) + w^2.
  CHECK(grid == doctest::Approx(0.8757177).epsilon(1e-6));
  CHECK(std::abs(result.report.final_objective - grid) < 1e-4);
}

TEST_CASE("fit from different initializations agrees") {
  const auto in = random_instance(3, 5, 60, 77);
  std::vector<std::string> labels;
  for (int v : in.y) labels.push_back("c" + std::to_string(v));
  const auto zero = fit(in.X, labels);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto rnd = fit(in.X, labels, {.C = 1.0, .tol = 1e-6, .seed = seed,
                                        .init = Init::kRandom, .init_scale = 2.0});
    CHECK(rnd.report.converged);
    CHECK(std::abs(rnd.report.final_objective - zero.report.final_objective) <=
          1e-6 * std::abs(zero.report.final_objective));
  }
}

TEST_CASE("fit is deterministic and monotone") {
  const auto in = random_instance(5, 8, 80, 12);
  std::vector<std::string> labels;
  for (int v : in.y) labels.push_back("c" + std::to_string(v));
  const auto a = fit(in.X, labels);
  const auto b = fit(in.X, labels);
  CHECK(a.model.W == b.model.W);
  CHECK(a.model.b == b.model.b);
  CHECK(a.report.iterations == b.report.iterations);
  CHECK(a.report.converged);
  CHECK(a.report.grad_inf_norm <= 1e-6);
  CHECK(a.report.objective_trace.front() == doctest::Approx(80 * std::log(5.0)));
  for (std::size_t i = 1; i < a.report.objective_trace.size(); ++i) {
    CHECK(a.report.objective_trace[i] <= a.report.objective_trace[i - 1]);
  }
  CHECK(a.model.classes == std::vector<std::string>{"c0", "c1", "c2", "c3", "c4"});
}

TEST_CASE("fit respects max_iter") {
  const auto in = random_instance(3, 8, 50, 4);
  std::vector<std::string> labels;
  for (int v : in.y) labels.push_back("c" + std::to_string(v));
  const auto r = fit(in.X, labels, {.tol = 1e-14, .max_iter = 3});
  CHECK(r.report.iterations <= 3);
  CHECK_FALSE(r.report.converged);
}

TEST_CASE("fit errors") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 2);
  CHECK_THROWS_AS(fit(X, {"a", "a", "a", "a"}), ValidationError);
  CHECK_THROWS_AS(fit(X, {"a", "b"}), ValidationError);
  Eigen::MatrixXd bad = X;
  bad(2, 1) = INFINITY;
  CHECK_THROWS_AS(fit(bad, {"a", "b", "a", "b"}), ValidationError);
}

TEST_CASE("standardization folds into an equivalent raw-feature model") {
  const auto in = random_instance(3, 4, 1, 5);
  ProbeModel z = zero_model(3, 4);
  z.W = in.W;
  z.b = in.b;
  const Eigen::Vector4d mean(1, -2, 0.5, 3), scale(2, 0.5, 1, 4);
  const auto raw = fold_standardization(z, mean, scale);
  const Eigen::Vector4d x(0.3, 1.1, -0.7, 2.0);
  const Eigen::Vector4d zx = ((x - mean).array() / scale.array()).matrix();
  CHECK(raw.logits(x).isApprox(z.logits(zx), 1e-12));
}

TEST_CASE("model JSON round trip") {
  const auto in = random_instance(3, 4, 30, 6);
  std::vector<std::string> labels;
  for (int v : in.y) labels.push_back("c" + std::to_string(v));
  auto m = fit(in.X, labels).model;
  m.pooling = Pooling::kMean;
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.classes == m.classes);
  CHECK(back.W == m.W);
  CHECK(back.b == m.b);
  CHECK(back.C == m.C);
  CHECK(back.pooling == Pooling::kMean);

  CHECK_THROWS_AS(model_from_json("[]"), ParseError);
  CHECK_THROWS_AS(model_from_json(R"({"classes": ["b", "a"], "C": 1, "W": [0, 0],
                                      "b": [0, 0], "pooling": "max", "dim": 1})"),
                  ValidationError);
  CHECK_THROWS_AS(model_from_json(R"({"classes": ["a", "b"], "C": 1, "W": [0],
                                      "b": [0, 0], "pooling": "max", "dim": 1})"),
                  ValidationError);
}
