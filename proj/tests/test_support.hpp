// Copyright 2026 The ppdo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PPDO_TESTS_TEST_SUPPORT_HPP
#define PPDO_TESTS_TEST_SUPPORT_HPP

#include <cstddef>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ppdo/optcore.hpp"

namespace ppdo::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(PPDO_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform(rng, -scale, scale);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

struct RandomProblemShape {
  std::size_t agents = 3;
  int max_agent_dim = 3;
  int max_rows = 3;
  bool zero_objective_offset = false;
  bool zero_constraint_offset = false;
};

/// Random problem on bounded boxes with quadratic, log or zero local terms.
inline ProblemSpec random_problem(std::mt19937_64& rng, const RandomProblemShape& shape) {
  ProblemSpec spec;
  const int p = uniform_int(rng, 1, shape.max_rows);
  const int m = uniform_int(rng, 1, shape.max_rows);
  spec.rho = uniform(rng, 0.5, 2.0);
  spec.objective_offset =
      shape.zero_objective_offset ? Vector(Vector::Zero(p)) : random_vector(rng, p, -1.0, 1.0);
  spec.constraint_offset =
      shape.zero_constraint_offset ? Vector(Vector::Zero(m)) : random_vector(rng, m, -1.0, 1.0);
  for (std::size_t i = 0; i < shape.agents; ++i) {
    const int ni = uniform_int(rng, 1, shape.max_agent_dim);
    AgentSpec a;
    a.objective_coupling = random_matrix(rng, p, ni);
    a.constraint_coupling = random_matrix(rng, m, ni);
    a.box.lower = random_vector(rng, ni, -1.0, 0.0);
    a.box.upper = a.box.lower + random_vector(rng, ni, 0.5, 2.0);
    switch (uniform_int(rng, 0, 2)) {
      case 0:
        a.local = QuadraticObjective{random_matrix(rng, ni, ni), random_vector(rng, ni, -1.0, 1.0),
                                     uniform(rng, -1.0, 1.0)};
        break;
      case 1:
        a.box.lower = Vector::Zero(ni);
        a.box.upper = random_vector(rng, ni, 0.5, 2.0);
        a.local = NegLogObjective{uniform(rng, 0.5, 10.0)};
        break;
      default:
        a.local = ZeroObjective{};
        break;
    }
    spec.agents.push_back(std::move(a));
  }
  return spec;
}

inline SolverParams random_params(std::mt19937_64& rng, std::size_t agents) {
  SolverParams p;
  for (std::size_t i = 0; i < agents; ++i) p.alpha.push_back(uniform(rng, 1e-3, 5e-2));
  p.beta = uniform(rng, 0.05, 1.0);
  p.tau_x = uniform(rng, 0.9, 1.0);
  p.tau_lambda = uniform(rng, 0.9, 1.0);
  p.lambda_max = 50.0;
  p.k_max = 200;
  return p;
}

inline PrimalPoint random_point(std::mt19937_64& rng, const ProblemSpec& spec, double margin = 0.0) {
  PrimalPoint x;
  for (const auto& a : spec.agents) {
    Vector xi(a.dim());
    for (Eigen::Index k = 0; k < a.dim(); ++k) {
      const double lo = a.box.lower[k], hi = a.box.upper[k];
      const double pad = margin * (hi - lo);
      xi[k] = uniform(rng, lo + pad, hi - pad);
    }
    x.push_back(xi);
  }
  return x;
}

}  // namespace ppdo::testing

#endif  // PPDO_TESTS_TEST_SUPPORT_HPP
