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

#include "lectometer/model.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "json.hpp"

namespace lectometer::model {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return (shifted / shifted.sum()).matrix();
}

int argmax_first(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

Eigen::VectorXd ProbeModel::logits(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw ValidationError("input has dim " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(dim()));
  }
  if (!x.allFinite()) throw ValidationError("input contains non-finite values");
  return W * x + b;
}

Eigen::VectorXd ProbeModel::predict_proba(const Eigen::VectorXd& x) const {
  return softmax(logits(x));
}

int ProbeModel::predict_index(const Eigen::VectorXd& x) const {
  // Softmax is monotone, but rounding can merge distinct logits into equal
  // probabilities; decide on probabilities so the tie rule matches them.
  return argmax_first(predict_proba(x));
}

const std::string& ProbeModel::predict_label(const Eigen::VectorXd& x) const {
  return classes[static_cast<std::size_t>(predict_index(x))];
}

std::vector<std::string> ProbeModel::predict_labels(
    const Eigen::MatrixXd& X) const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out.push_back(predict_label(X.row(i).transpose()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer

namespace {

// Parameters are packed as theta = [vec(W) column-major; b].
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd proba;  // N x K softmax probabilities at this point
};

class Problem {
 public:
  Problem(const Eigen::MatrixXd& X, std::span<const int> y, int k, double C)
      : X_(X), y_(y), k_(k), C_(C) {}

  Eigen::Index size() const { return k_ * X_.cols() + k_; }

  Parameters unpack(const Eigen::VectorXd& theta) const {
    Parameters p;
    p.W = Eigen::Map<const Eigen::MatrixXd>(theta.data(), k_, X_.cols());
    p.b = theta.tail(k_);
    return p;
  }

  Eigen::VectorXd pack(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) const {
    Eigen::VectorXd theta(size());
    theta.head(W.size()) = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
    theta.tail(k_) = b;
    return theta;
  }

  Evaluation evaluate(const Eigen::VectorXd& theta) const {
    const Parameters p = unpack(theta);
    auto obj = objective_and_gradient<double>(p.W, p.b, X_, y_, C_);
    Evaluation e;
    e.value = obj.value;
    e.grad = pack(obj.grad_W, obj.grad_b);
    Eigen::MatrixXd logits = X_ * p.W.transpose();
    logits.rowwise() += p.b.transpose();
    const Eigen::VectorXd lse = row_log_sum_exp(logits);
    e.proba = (logits.colwise() - lse).array().exp().matrix();
    return e;
  }

  // Hessian-vector product at the point whose probabilities are `proba`.
  Eigen::VectorXd hessian_times(const Eigen::MatrixXd& proba,
                                const Eigen::VectorXd& v) const {
    const Parameters dir = unpack(v);
    Eigen::MatrixXd d = X_ * dir.W.transpose();
    d.rowwise() += dir.b.transpose();
    // Per sample: (diag(p) - p p^T) d
    const Eigen::VectorXd pd = proba.cwiseProduct(d).rowwise().sum();
    const Eigen::MatrixXd r = proba.cwiseProduct(d.colwise() - pd);
    return pack(r.transpose() * X_ + dir.W / C_, r.colwise().sum().transpose());
  }

 private:
  const Eigen::MatrixXd& X_;
  std::span<const int> y_;
  Eigen::Index k_;
  double C_;
};

// Approximately solves H d = -g by conjugate gradients, stopping at the
// forcing tolerance or on non-positive curvature.
Eigen::VectorXd newton_direction(const Problem& problem, const Evaluation& at,
                                 int max_cg) {
  const Eigen::VectorXd& g = at.grad;
  const double gnorm = g.norm();
  const double forcing = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size());
  Eigen::VectorXd r = -g;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_cg && std::sqrt(rr) > forcing; ++it) {
    const Eigen::VectorXd hp = problem.hessian_times(at.proba, p);
    const double curvature = p.dot(hp);
    if (!(curvature > 1e-14 * p.squaredNorm())) break;
    const double alpha = rr / curvature;
    d += alpha * p;
    r -= alpha * hp;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (d.isZero(0.0)) d = -g;
  return d;
}

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr int kMaxStalls = 3;
constexpr int kMaxCgIterations = 500;

}  // namespace

Parameters minimize(const Eigen::MatrixXd& X, std::span<const int> y,
                    int num_classes, const FitOptions& options,
                    FitReport& report) {
  if (num_classes < 2) throw ValidationError("fit needs at least two classes");
  if (!(options.C > 0.0)) throw ValidationError("fit: C must be positive");
  if (!(options.tol > 0.0)) throw ValidationError("fit: tol must be positive");
  if (!X.allFinite()) throw ValidationError("fit: non-finite features");

  // The bias is unpenalized, so optimizing over centered features with
  // bias' = b + W * mean is an exact reparametrization: objective values are
  // identical, but the problem is far better conditioned.
  const Eigen::VectorXd mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
  const Problem problem(centered, y, num_classes, options.C);

  Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(num_classes, X.cols());
  Eigen::VectorXd b0 = Eigen::VectorXd::Zero(num_classes);
  if (options.init == Init::kRandom) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, options.init_scale);
    for (Eigen::Index i = 0; i < W0.size(); ++i) W0.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < b0.size(); ++i) b0(i) = normal(rng);
  }
  Eigen::VectorXd theta = problem.pack(W0, b0 + W0 * mean);

  // Gradient with respect to the original (W, b).
  const Eigen::Index nw = W0.size();
  const auto original_grad_norm = [&](const Eigen::VectorXd& g) {
    const Eigen::Map<const Eigen::MatrixXd> gw(g.data(), num_classes, X.cols());
    const Eigen::VectorXd gb = g.tail(num_classes);
    return std::max((gw + gb * mean.transpose()).lpNorm<Eigen::Infinity>(),
                    gb.lpNorm<Eigen::Infinity>());
  };

  Evaluation current = problem.evaluate(theta);
  report = FitReport{};
  report.initial_objective = current.value;
  report.objective_trace.push_back(current.value);

  const int max_cg = static_cast<int>(std::min<Eigen::Index>(kMaxCgIterations, nw + num_classes));
  int stalls = 0;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (original_grad_norm(current.grad) <= options.tol) break;

    Eigen::VectorXd direction = newton_direction(problem, current, max_cg);
    double slope = current.grad.dot(direction);
    if (!(slope < 0.0)) {
      direction = -current.grad;
      slope = -current.grad.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    Evaluation next;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      trial = theta + step * direction;
      next = problem.evaluate(trial);
      if (std::isfinite(next.value) &&
          next.value <= current.value + kArmijo * step * slope &&
          next.value <= current.value) {
        accepted = true;
        break;
      }
    }
    // No acceptable step: the decrease is below the objective's rounding.
    if (!accepted) break;

    const bool flat = !(next.value < current.value);
    theta = std::move(trial);
    current = std::move(next);
    report.objective_trace.push_back(current.value);
    if (!flat) {
      stalls = 0;
    } else if (++stalls > kMaxStalls) {
      ++iter;
      break;
    }
  }

  report.final_objective = current.value;
  report.grad_inf_norm = original_grad_norm(current.grad);
  report.iterations = iter;
  report.converged = report.grad_inf_norm <= options.tol;
  Parameters out = problem.unpack(theta);
  out.b -= out.W * mean;
  return out;
}

FitResult fit(const Eigen::MatrixXd& X, const std::vector<std::string>& labels,
              const FitOptions& options) {
  if (static_cast<Eigen::Index>(labels.size()) != X.rows()) {
    throw ValidationError("fit: label count does not match sample count");
  }
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw ValidationError("fit: training data has fewer than two classes");
  }
  FitResult out;
  out.model.classes.assign(distinct.begin(), distinct.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < out.model.classes.size(); ++i) {
    index[out.model.classes[i]] = static_cast<int>(i);
  }
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& l : labels) y.push_back(index.at(l));

  Parameters p = minimize(X, y, static_cast<int>(distinct.size()), options,
                          out.report);
  out.model.W = std::move(p.W);
  out.model.b = std::move(p.b);
  out.model.C = options.C;
  return out;
}

ProbeModel fold_standardization(const ProbeModel& model,
                                const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& scale) {
  ProbeModel out = model;
  out.W = model.W * scale.cwiseInverse().asDiagonal();
  out.b = model.b - out.W * mean;
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

using nlohmann::json;

std::string model_to_json(const ProbeModel& model) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(model.W.size()));
  for (Eigen::Index r = 0; r < model.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.W.cols(); ++c) w.push_back(model.W(r, c));
  }
  json doc = {{"classes", model.classes},
              {"C", model.C},
              {"W", w},
              {"b", std::vector<double>(model.b.data(),
                                        model.b.data() + model.b.size())},
              {"pooling", std::string(to_string(model.pooling))},
              {"dim", model.dim()}};
  return doc.dump(2) + "\n";
}

ProbeModel model_from_json(const std::string& text) {
  ProbeModel m;
  try {
    const json doc = json::parse(text);
    m.classes = doc.at("classes").get<std::vector<std::string>>();
    m.C = doc.at("C").get<double>();
    m.pooling = parse_pooling(doc.at("pooling").get<std::string>());
    const auto dim = doc.at("dim").get<long long>();
    const auto w = doc.at("W").get<std::vector<double>>();
    const auto b = doc.at("b").get<std::vector<double>>();
    const auto k = static_cast<long long>(m.classes.size());
    if (dim <= 0 || static_cast<long long>(w.size()) != k * dim ||
        static_cast<long long>(b.size()) != k) {
      throw ValidationError("model: W/b sizes do not match classes and dim");
    }
    m.W = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>(w.data(), k, dim);
    m.b = Eigen::Map<const Eigen::VectorXd>(b.data(), k);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  if (m.classes.size() < 2 ||
      !std::is_sorted(m.classes.begin(), m.classes.end()) ||
      std::adjacent_find(m.classes.begin(), m.classes.end()) != m.classes.end()) {
    throw ValidationError("model: classes must be >= 2, unique and sorted");
  }
  if (!m.W.allFinite() || !m.b.allFinite() || !(m.C > 0.0)) {
    throw ValidationError("model: parameters must be finite and C positive");
  }
  return m;
}

}  // namespace lectometer::model
