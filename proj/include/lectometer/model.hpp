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

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lectometer/common.hpp"

namespace lectometer::model {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct ObjectiveValue {
  Scalar value{};
  Matrix<Scalar> grad_W;  // K x dim
  Vector<Scalar> grad_b;  // K
};

/// Row-wise log-sum-exp of a logits matrix, shifted by the row maximum.
template <typename Scalar>
Vector<Scalar> row_log_sum_exp(const Matrix<Scalar>& logits) {
  const Vector<Scalar> row_max = logits.rowwise().maxCoeff();
  return row_max.array() +
         (logits.colwise() - row_max).array().exp().rowwise().sum().log();
}

/// Penalized multinomial negative log-likelihood
///
///   sum_i -log softmax(W x_i + b)[y_i] + ||W||_F^2 / (2 C)
///
/// with its exact gradient. The bias is not penalized. X holds one sample
/// per row; y holds class indices in [0, K).
template <typename Scalar>
ObjectiveValue<Scalar> objective_and_gradient(const Matrix<Scalar>& W,
                                              const Vector<Scalar>& b,
                                              const Matrix<Scalar>& X,
                                              std::span<const int> y,
                                              Scalar C) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = W.rows();
  if (n < 1) throw ValidationError("objective needs at least one sample");
  if (static_cast<Eigen::Index>(y.size()) != n || X.cols() != W.cols() ||
      b.size() != k) {
    throw ValidationError("objective: inconsistent shapes");
  }
  if (!(C > Scalar(0))) throw ValidationError("objective: C must be positive");
  if (!X.allFinite() || !W.allFinite() || !b.allFinite()) {
    throw ValidationError("objective: non-finite input");
  }

  Matrix<Scalar> logits = X * W.transpose();
  logits.rowwise() += b.transpose();
  const Vector<Scalar> lse = row_log_sum_exp(logits);

  Scalar nll(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    if (yi < 0 || yi >= k) throw ValidationError("objective: label out of range");
    nll += lse(i) - logits(i, yi);
  }

  // Residuals P - onehot(y), reusing the logits buffer.
  Matrix<Scalar>& residual = logits;
  residual = (residual.colwise() - lse).array().exp().matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    residual(i, y[static_cast<std::size_t>(i)]) -= Scalar(1);
  }

  ObjectiveValue<Scalar> out;
  out.value = nll + W.squaredNorm() / (Scalar(2) * C);
  out.grad_W = residual.transpose() * X + W / C;
  out.grad_b = residual.colwise().sum().transpose();
  return out;
}

struct ProbeModel {
  std::vector<std::string> classes;  // sorted, unique
  Eigen::MatrixXd W;                 // K x dim
  Eigen::VectorXd b;                 // K
  double C = 1.0;
  Pooling pooling = Pooling::kMax;

  Eigen::Index num_classes() const { return W.rows(); }
  Eigen::Index dim() const { return W.cols(); }

  Eigen::VectorXd logits(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const;
  // Argmax of the probabilities; exact ties go to the lowest class index.
  int predict_index(const Eigen::VectorXd& x) const;
  const std::string& predict_label(const Eigen::VectorXd& x) const;
  // One prediction per row of X.
  std::vector<std::string> predict_labels(const Eigen::MatrixXd& X) const;
};

// Numerically stable softmax of a single logits vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// First index of the maximum coefficient.
int argmax_first(const Eigen::VectorXd& v);

enum class Init { kZero, kRandom };

struct FitOptions {
  double C = 1.0;
  double tol = 1e-6;    // on the infinity norm of the gradient
  int max_iter = 1000;
  std::uint64_t seed = 0;
  Init init = Init::kZero;
  double init_scale = 1.0;  // std-dev of the random initialization
};

struct FitReport {
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;  // Newton steps taken
  bool converged = false;
  // Objective at the initial point and after every accepted step.
  std::vector<double> objective_trace;
};

struct Parameters {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

/// Minimizes the penalized objective by truncated Newton steps (conjugate
/// gradients on exact Hessian-vector products) with a backtracking (Armijo)
/// line search. Every accepted step satisfies the sufficient decrease
/// condition, so the objective trace is non-increasing. Stops when the
/// gradient's infinity norm reaches `tol`, after `max_iter` Newton steps, or
/// when the remaining decrease is below the objective's rounding.
Parameters minimize(const Eigen::MatrixXd& X, std::span<const int> y,
                    int num_classes, const FitOptions& options,
                    FitReport& report);

struct FitResult {
  ProbeModel model;
  FitReport report;
};

// Classes are the sorted distinct labels. Throws ValidationError with fewer
// than two classes or non-finite features.
FitResult fit(const Eigen::MatrixXd& X, const std::vector<std::string>& labels,
              const FitOptions& options = {});

/// Rewrites a model trained on z-scored features (x - mean) / scale into an
/// equivalent model over raw features.
ProbeModel fold_standardization(const ProbeModel& model,
                                const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& scale);

// {"classes", "C", "W" (row-major), "b", "pooling", "dim"}
std::string model_to_json(const ProbeModel& model);
ProbeModel model_from_json(const std::string& text);

}  // namespace lectometer::model
