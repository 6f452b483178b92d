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

// Plaintext core of the coupled program
//
//   min  (rho/2) || sum_i A_ui x_i + c ||^2 + sum_i f_i(x_i)
//   s.t. x_i in X_i,   sum_i A_gi x_i + d <= 0
//
// with the regularized (RPDS) and shrunken (SPDS) primal-dual subgradient
// iterations. The per-agent update kernels only need the two aggregated
// sums, which is what lets the encrypted protocol reuse them verbatim.

#ifndef PPDO_OPTCORE_HPP
#define PPDO_OPTCORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ppdo/error.hpp"

namespace ppdo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-coordinate bounds. Either side may be infinite.
struct BoxSet {
  Vector lower;
  Vector upper;

  static BoxSet uniform(Eigen::Index dim, double lo, double hi) {
    return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
  }

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Vector& v) const {
    return v.size() == dim() && (v.array() >= lower.array()).all() &&
           (v.array() <= upper.array()).all();
  }

  void validate() const {
    if (lower.size() != upper.size()) {
      throw ConfigError("optcore", "box bounds have different dimensions");
    }
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
        throw ConfigError("optcore", "box coordinate " + std::to_string(j) +
                                         " has lower bound above upper bound");
      }
    }
  }
};

/// Elementwise clamp onto the box.
inline Vector project_box(const BoxSet& box, const Vector& v) {
  box.validate();
  if (v.size() != box.dim()) {
    throw DimensionError("optcore", "projection of a " + std::to_string(v.size()) +
                                        "-vector onto a " + std::to_string(box.dim()) +
                                        "-dimensional box");
  }
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

/// f(x) = (Qx)'(Qx) + l'x + C
struct QuadraticObjective {
  Matrix quad;
  Vector linear;
  double constant = 0.0;
};

/// f(x) = -k sum_j log(1 + x_j)
struct NegLogObjective {
  double weight = 0.0;
};

struct ZeroObjective {};

using LocalObjective = std::variant<ZeroObjective, QuadraticObjective, NegLogObjective>;

namespace detail {

template <class>
inline constexpr bool kAlwaysFalse = false;

inline void require_neglog_domain(const Vector& x) {
  if ((x.array() <= -1.0).any()) {
    throw DomainError("optcore", "log(1 + x) evaluated at x <= -1");
  }
}

}  // namespace detail

inline double local_value(const LocalObjective& f, const Vector& x) {
  return std::visit(
      [&](const auto& obj) -> double {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, ZeroObjective>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, QuadraticObjective>) {
          const Vector qx = obj.quad * x;
          return qx.squaredNorm() + obj.linear.dot(x) + obj.constant;
        } else if constexpr (std::is_same_v<T, NegLogObjective>) {
          detail::require_neglog_domain(x);
          return -obj.weight * x.array().log1p().sum();
        } else {
          static_assert(detail::kAlwaysFalse<T>);
        }
      },
      f);
}

inline Vector local_gradient(const LocalObjective& f, const Vector& x) {
  return std::visit(
      [&](const auto& obj) -> Vector {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, ZeroObjective>) {
          return Vector::Zero(x.size());
        } else if constexpr (std::is_same_v<T, QuadraticObjective>) {
          return 2.0 * obj.quad.transpose() * (obj.quad * x) + obj.linear;
        } else if constexpr (std::is_same_v<T, NegLogObjective>) {
          detail::require_neglog_domain(x);
          return (-obj.weight / (1.0 + x.array())).matrix();
        } else {
          static_assert(detail::kAlwaysFalse<T>);
        }
      },
      f);
}

/// One agent's slice of the problem: its coupling columns, its private local
/// objective and its local box.
struct AgentSpec {
  Matrix objective_coupling;   // p x n_i
  Matrix constraint_coupling;  // m x n_i
  LocalObjective local;
  BoxSet box;

  Eigen::Index dim() const { return objective_coupling.cols(); }
};

struct ProblemSpec {
  std::vector<AgentSpec> agents;
  Vector objective_offset;   // c, dimension p
  Vector constraint_offset;  // d, dimension m
  double rho = 1.0;

  std::size_t num_agents() const { return agents.size(); }
  Eigen::Index objective_dim() const { return objective_offset.size(); }
  Eigen::Index dual_dim() const { return constraint_offset.size(); }

  void validate() const {
    if (agents.empty()) throw ConfigError("optcore", "problem has no agents");
    if (!(rho > 0.0)) throw ConfigError("optcore", "rho must be positive");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& a = agents[i];
      const std::string who = "agent " + std::to_string(i + 1);
      if (a.objective_coupling.rows() != objective_dim()) {
        throw DimensionError("optcore", who + ": A_u has " +
                                            std::to_string(a.objective_coupling.rows()) +
                                            " rows, expected " +
                                            std::to_string(objective_dim()));
      }
      if (a.constraint_coupling.rows() != dual_dim()) {
        throw DimensionError("optcore", who + ": A_g has " +
                                            std::to_string(a.constraint_coupling.rows()) +
                                            " rows, expected " + std::to_string(dual_dim()));
      }
      if (a.constraint_coupling.cols() != a.dim() || a.box.dim() != a.dim()) {
        throw DimensionError("optcore", who + ": column counts of A_u, A_g and the box differ");
      }
      a.box.validate();
      if (const auto* q = std::get_if<QuadraticObjective>(&a.local)) {
        if (q->quad.cols() != a.dim() || q->linear.size() != a.dim()) {
          throw DimensionError("optcore", who + ": quadratic local objective does not match n_i");
        }
      }
      if (std::holds_alternative<NegLogObjective>(a.local) && (a.box.lower.array() < 0.0).any()) {
        throw ConfigError("optcore", who + ": log(1 + x) objective needs a box with lower bound >= 0");
      }
    }
  }
};

using PrimalPoint = std::vector<Vector>;

struct PrimalDualState {
  PrimalPoint x;
  Vector lambda;
  int k = 0;
};

enum class Method { kSpds, kRpds };

/// Order of the two half-steps within one iteration. Both read the same
/// aggregates of x^k; kDualFirst feeds lambda^{k+1} into the primal step,
/// kSimultaneous feeds lambda^k.
enum class UpdateOrder { kDualFirst, kSimultaneous };

struct SolverParams {
  std::vector<double> alpha;  // per agent
  double beta = 1.0;
  double tau_x = 1.0;
  double tau_lambda = 1.0;
  double v = 0.0;        // RPDS primal regularization
  double eps_reg = 0.0;  // RPDS dual regularization
  double lambda_max = 1e3;
  double eps0 = 1e-4;
  int k_max = 1000;
  UpdateOrder order = UpdateOrder::kDualFirst;

  void validate(std::size_t num_agents) const {
    if (alpha.size() != num_agents) {
      throw ConfigError("optcore", "expected " + std::to_string(num_agents) +
                                       " primal step sizes, got " + std::to_string(alpha.size()));
    }
    for (double a : alpha) {
      if (!(a > 0.0)) throw ConfigError("optcore", "primal step sizes must be positive");
    }
    if (!(beta > 0.0)) throw ConfigError("optcore", "dual step size must be positive");
    if (!(tau_x > 0.0 && tau_x <= 1.0) || !(tau_lambda > 0.0 && tau_lambda <= 1.0)) {
      throw ConfigError("optcore", "shrink parameters must lie in (0, 1]");
    }
    if (!(v >= 0.0) || !(eps_reg >= 0.0)) {
      throw ConfigError("optcore", "regularization parameters must be nonnegative");
    }
    if (!(lambda_max > 0.0)) throw ConfigError("optcore", "lambda_max must be positive");
    if (!(eps0 > 0.0)) throw ConfigError("optcore", "eps0 must be positive");
    if (k_max < 1) throw ConfigError("optcore", "k_max must be at least 1");
  }
};

/// The two coupled quantities every update needs:
/// objective = sum_i A_ui x_i + c and constraint = sum_i A_gi x_i + d.
struct Aggregates {
  Vector objective;
  Vector constraint;
};

namespace detail {

inline void check_point(const ProblemSpec& spec, const PrimalPoint& x) {
  if (x.size() != spec.num_agents()) {
    throw DimensionError("optcore", "primal point has " + std::to_string(x.size()) +
                                        " blocks for " + std::to_string(spec.num_agents()) +
                                        " agents");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != spec.agents[i].dim()) {
      throw DimensionError("optcore", "agent " + std::to_string(i + 1) + ": x_i has dimension " +
                                          std::to_string(x[i].size()) + ", expected " +
                                          std::to_string(spec.agents[i].dim()));
    }
  }
}

inline void check_lambda(const ProblemSpec& spec, const Vector& lambda) {
  if (lambda.size() != spec.dual_dim()) {
    throw DimensionError("optcore", "lambda has dimension " + std::to_string(lambda.size()) +
                                        ", expected " + std::to_string(spec.dual_dim()));
  }
}

inline bool all_finite(const PrimalDualState& s) {
  for (const auto& xi : s.x) {
    if (!xi.allFinite()) return false;
  }
  return s.lambda.allFinite();
}

}  // namespace detail

inline Aggregates aggregate(const ProblemSpec& spec, const PrimalPoint& x) {
  detail::check_point(spec, x);
  Aggregates agg{spec.objective_offset, spec.constraint_offset};
  for (std::size_t i = 0; i < x.size(); ++i) {
    agg.objective += spec.agents[i].objective_coupling * x[i];
    agg.constraint += spec.agents[i].constraint_coupling * x[i];
  }
  return agg;
}

inline double eval_objective(const ProblemSpec& spec, const PrimalPoint& x) {
  const Aggregates agg = aggregate(spec, x);
  double value = 0.5 * spec.rho * agg.objective.squaredNorm();
  for (std::size_t i = 0; i < x.size(); ++i) value += local_value(spec.agents[i].local, x[i]);
  return value;
}

/// Gradient of the Lagrangian w.r.t. x_i given the decrypted (or exact)
/// coupled sum sum_j A_uj x_j + c.
inline Vector local_primal_gradient(const AgentSpec& agent, double rho, const Vector& x_i,
                                    const Vector& coupled_sum, const Vector& lambda) {
  return rho * agent.objective_coupling.transpose() * coupled_sum + local_gradient(agent.local, x_i) +
         agent.constraint_coupling.transpose() * lambda;
}

inline Vector primal_subgradient(const ProblemSpec& spec, const PrimalPoint& x, const Vector& lambda,
                                 std::size_t i) {
  if (i >= spec.num_agents()) {
    throw DimensionError("optcore", "agent index " + std::to_string(i) + " out of range");
  }
  detail::check_lambda(spec, lambda);
  const Aggregates agg = aggregate(spec, x);
  return local_primal_gradient(spec.agents[i], spec.rho, x[i], agg.objective, lambda);
}

inline Vector dual_subgradient(const ProblemSpec& spec, const PrimalPoint& x) {
  return aggregate(spec, x).constraint;
}

/// x_i^{k+1} for one agent. SPDS: Pi_X(Pi_X(tau x - alpha g) / tau);
/// RPDS: Pi_X(x - alpha (g + v x)).
inline Vector primal_update(Method method, const AgentSpec& agent, double rho,
                            const SolverParams& params, std::size_t i, const Vector& x_i,
                            const Vector& coupled_sum, const Vector& lambda) {
  const Vector g = local_primal_gradient(agent, rho, x_i, coupled_sum, lambda);
  const double alpha = params.alpha[i];
  if (method == Method::kSpds) {
    const double tau = params.tau_x;
    const Vector inner = project_box(agent.box, tau * x_i - alpha * g);
    return project_box(agent.box, inner / tau);
  }
  return project_box(agent.box, x_i - alpha * (g + params.v * x_i));
}

/// lambda^{k+1}. SPDS: Pi_D(Pi_D(tau lambda + beta h) / tau);
/// RPDS: Pi_D(lambda + beta (h - eps lambda)). D = [0, lambda_max]^m.
inline Vector dual_update(Method method, const SolverParams& params, const Vector& lambda,
                          const Vector& constraint_sum) {
  const BoxSet dual_box = BoxSet::uniform(lambda.size(), 0.0, params.lambda_max);
  if (method == Method::kSpds) {
    const double tau = params.tau_lambda;
    const Vector inner = project_box(dual_box, tau * lambda + params.beta * constraint_sum);
    return project_box(dual_box, inner / tau);
  }
  return project_box(dual_box,
                     lambda + params.beta * (constraint_sum - params.eps_reg * lambda));
}

/// One full iteration from precomputed aggregates of state.x.
inline PrimalDualState advance(Method method, const ProblemSpec& spec, const SolverParams& params,
                               const PrimalDualState& state, const Aggregates& agg) {
  PrimalDualState next;
  next.k = state.k + 1;
  next.lambda = dual_update(method, params, state.lambda, agg.constraint);
  const Vector& lambda_for_primal =
      params.order == UpdateOrder::kDualFirst ? next.lambda : state.lambda;
  next.x.reserve(state.x.size());
  for (std::size_t i = 0; i < state.x.size(); ++i) {
    next.x.push_back(primal_update(method, spec.agents[i], spec.rho, params, i, state.x[i],
                                   agg.objective, lambda_for_primal));
  }
  return next;
}

inline PrimalDualState spds_step(const ProblemSpec& spec, const SolverParams& params,
                                 const PrimalDualState& state) {
  detail::check_lambda(spec, state.lambda);
  return advance(Method::kSpds, spec, params, state, aggregate(spec, state.x));
}

inline PrimalDualState rpds_step(const ProblemSpec& spec, const SolverParams& params,
                                 const PrimalDualState& state) {
  detail::check_lambda(spec, state.lambda);
  return advance(Method::kRpds, spec, params, state, aggregate(spec, state.x));
}

inline PrimalDualState step(Method method, const ProblemSpec& spec, const SolverParams& params,
                            const PrimalDualState& state) {
  return method == Method::kSpds ? spds_step(spec, params, state) : rpds_step(spec, params, state);
}

/// eps = ||x^{k+1} - x^k||_2 + ||lambda^{k+1} - lambda^k||_2 over the stacked x.
inline double stopping_error(const PrimalDualState& before, const PrimalDualState& after) {
  double dx2 = 0.0;
  for (std::size_t i = 0; i < before.x.size(); ++i) dx2 += (after.x[i] - before.x[i]).squaredNorm();
  return std::sqrt(dx2) + (after.lambda - before.lambda).norm();
}

/// x^0 = Pi_X(0), lambda^0 = 0.
inline PrimalDualState initial_state(const ProblemSpec& spec) {
  PrimalDualState s;
  for (const auto& a : spec.agents) s.x.push_back(project_box(a.box, Vector::Zero(a.dim())));
  s.lambda = Vector::Zero(spec.dual_dim());
  return s;
}

inline Vector flatten(const PrimalPoint& x) {
  Eigen::Index total = 0;
  for (const auto& xi : x) total += xi.size();
  Vector flat(total);
  Eigen::Index at = 0;
  for (const auto& xi : x) {
    flat.segment(at, xi.size()) = xi;
    at += xi.size();
  }
  return flat;
}

struct Trajectory {
  std::vector<PrimalDualState> states;  // states[0] is the initial point
  std::vector<double> eps;              // eps[k-1] is the error of step k
  bool converged = false;

  const PrimalDualState& final_state() const { return states.back(); }
  int iterations() const { return static_cast<int>(eps.size()); }
};

/// Plaintext baseline: the iteration loop without any encryption.
inline Trajectory solve_plaintext(const ProblemSpec& spec, const SolverParams& params,
                                  Method method, const PrimalDualState& init) {
  spec.validate();
  params.validate(spec.num_agents());
  detail::check_point(spec, init.x);
  detail::check_lambda(spec, init.lambda);

  Trajectory traj;
  traj.states.push_back(init);
  for (int k = 0; k < params.k_max; ++k) {
    const PrimalDualState& cur = traj.states.back();
    PrimalDualState next = step(method, spec, params, cur);
    if (!detail::all_finite(next)) {
      throw DivergenceError("optcore", "non-finite iterate at k = " + std::to_string(next.k));
    }
    const double eps = stopping_error(cur, next);
    traj.states.push_back(std::move(next));
    traj.eps.push_back(eps);
    if (eps <= params.eps0) {
      traj.converged = true;
      break;
    }
  }
  return traj;
}

inline Trajectory solve_plaintext(const ProblemSpec& spec, const SolverParams& params,
                                  Method method = Method::kSpds) {
  return solve_plaintext(spec, params, method, initial_state(spec));
}

}  // namespace ppdo

#endif  // PPDO_OPTCORE_HPP
