// Copyright 2026 The GRAIL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "grail/autodiff.hpp"
#include "grail/graph.hpp"
#include "grail/seeds.hpp"

namespace grail::testing {

// Erdos-Renyi graph with Gaussian features.
inline Graph random_graph(int n, double p, int f, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NodePair> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p) edges.push_back({i, j});
    }
  }
  Matrix x(n, f);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = standard_normal(rng);
  return Graph(n, std::move(edges), std::move(x));
}

inline Matrix random_matrix(int r, int c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = scale * standard_normal(rng);
  return m;
}

// Symmetric weights in (lo, hi) with zero diagonal.
inline Matrix random_symmetric_weights(int n, std::uint64_t seed, double lo = 0.1,
                                       double hi = 0.9) {
  Rng rng(seed);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = lo + (hi - lo) * uniform01(rng);
  }
  return w;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / denom;
}

// Central differences of a scalar function of one matrix argument.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                               double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double orig = probe.data()[k];
    probe.data()[k] = orig + h;
    const double up = f(probe);
    probe.data()[k] = orig - h;
    const double down = f(probe);
    probe.data()[k] = orig;
    g.data()[k] = (up - down) / (2.0 * h);
  }
  return g;
}

// Symmetric central differences: entries (i,j) and (j,i) move together,
// returned per upper-triangle entry in both positions.
inline Matrix numeric_symmetric_gradient(const std::function<double(const Matrix&)>& f,
                                         const Matrix& w, double h = 1e-5) {
  const Eigen::Index n = w.rows();
  Matrix g = Matrix::Zero(n, n);
  Matrix probe = w;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double orig = probe(i, j);
      probe(i, j) = probe(j, i) = orig + h;
      const double up = f(probe);
      probe(i, j) = probe(j, i) = orig - h;
      const double down = f(probe);
      probe(i, j) = probe(j, i) = orig;
      g(i, j) = g(j, i) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// Analytic gradient of build(tape, leaf) w.r.t. the leaf.
inline std::pair<double, Matrix> analytic_gradient(
    const std::function<Var(Tape&, Var)>& build, const Matrix& x) {
  Tape tape;
  Var v = tape.leaf(x);
  Var loss = build(tape, v);
  tape.backward(loss);
  return {loss.scalar(), tape.grad(v)};
}

inline std::function<double(const Matrix&)> as_function(
    const std::function<Var(Tape&, Var)>& build) {
  return [build](const Matrix& x) {
    Tape tape;
    return build(tape, tape.constant(x)).scalar();
  };
}

// Relative error between reverse-mode and finite-difference gradients.
inline double gradient_check(const std::function<Var(Tape&, Var)>& build, const Matrix& x) {
  return relative_error(analytic_gradient(build, x).second,
                        numeric_gradient(as_function(build), x));
}

// Same, for a symmetric adjacency argument: the reverse-mode gradient of the
// (i,j) and (j,i) pair is g_ij + g_ji.
inline double symmetric_gradient_check(const std::function<Var(Tape&, Var)>& build,
                                       const Matrix& w) {
  const Matrix g = analytic_gradient(build, w).second;
  Matrix paired = g + g.transpose();
  paired.diagonal().setZero();
  return relative_error(paired, numeric_symmetric_gradient(as_function(build), w));
}

// Grid search over the shift for the projection, independent of bisection.
inline std::vector<double> grid_projection(const std::vector<double>& p, double delta) {
  auto at = [&](double mu) {
    std::vector<double> out;
    for (double v : p) out.push_back(std::clamp(v - mu, 0.0, 1.0));
    return out;
  };
  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  if (total(at(0.0)) <= delta) return at(0.0);
  double hi = *std::max_element(p.begin(), p.end());
  double lo = 0.0;
  // Coarse grid to bracket, then refine the bracket with finer grids.
  for (int level = 0; level < 6; ++level) {
    const int points = 1000;
    double best = hi;
    for (int k = 0; k <= points; ++k) {
      const double mu = lo + (hi - lo) * k / points;
      if (total(at(mu)) <= delta) {
        best = mu;
        break;
      }
    }
    const double step = (hi - lo) / points;
    lo = std::max(0.0, best - step);
    hi = best;
  }
  return at(hi);
}

}  // namespace grail::testing
