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

// Test-only reference computations, written independently of the library's
// vectorized objective.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace oracle {

// Penalized multinomial NLL with explicit loops.
inline double naive_objective(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& X, const std::vector<int>& y,
                              double C) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    std::vector<double> z(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index k = 0; k < W.rows(); ++k) {
      double s = b(k);
      for (Eigen::Index j = 0; j < X.cols(); ++j) s += W(k, j) * X(i, j);
      z[static_cast<std::size_t>(k)] = s;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    total += m + std::log(sum) - z[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
  }
  double reg = 0.0;
  for (Eigen::Index i = 0; i < W.size(); ++i) reg += W.data()[i] * W.data()[i];
  return total + reg / (2.0 * C);
}

// Central finite-difference gradient of f at theta.
inline Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& theta, double h = 1e-5) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd plus = theta, minus = theta;
    plus(i) += h;
    minus(i) -= h;
    g(i) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

// Minimum of f over [lo, hi]^4 by repeated dense grids, each zoomed around
// the previous best point.
inline double zoom_grid_min_4d(const std::function<double(const std::array<double, 4>&)>& f,
                               double lo, double hi, int points = 21, int rounds = 12) {
  std::array<double, 4> centre{};
  for (auto& c : centre) c = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  double best = f(centre);
  for (int r = 0; r < rounds; ++r) {
    const double step = 2.0 * half / (points - 1);
    std::array<double, 4> best_point = centre;
    std::array<double, 4> p{};
    for (int a = 0; a < points; ++a) {
      p[0] = centre[0] - half + a * step;
      for (int b = 0; b < points; ++b) {
        p[1] = centre[1] - half + b * step;
        for (int c = 0; c < points; ++c) {
          p[2] = centre[2] - half + c * step;
          for (int d = 0; d < points; ++d) {
            p[3] = centre[3] - half + d * step;
            const double v = f(p);
            if (v < best) {
              best = v;
              best_point = p;
            }
          }
        }
      }
    }
    centre = best_point;
    half = 2.0 * step;
  }
  return best;
}

}  // namespace oracle
