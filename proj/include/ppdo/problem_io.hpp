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

// JSON problem-definition files. See fixtures/numerical.json for the layout.

#ifndef PPDO_PROBLEM_IO_HPP
#define PPDO_PROBLEM_IO_HPP

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppdo/error.hpp"
#include "ppdo/experiments.hpp"
#include "ppdo/optcore.hpp"

namespace ppdo {

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config", where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("config", "unknown key '" + it.key() + "' in " + where);
  }
}

inline double bound_from_json(const json& v) {
  if (v.is_null()) throw ConfigError("config", "null bound (use \"inf\" or \"-inf\")");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ConfigError("config", "bad bound '" + s + "'");
  }
  return v.get<double>();
}

inline json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

inline Vector vector_from_json(const json& v, bool allow_inf = false) {
  if (!v.is_array()) throw ConfigError("config", "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = allow_inf ? bound_from_json(v[j]) : v[j].get<double>();
  }
  return out;
}

inline Matrix matrix_from_json(const json& v) {
  if (!v.is_array() || v.empty()) throw ConfigError("config", "expected a non-empty array of rows");
  const std::size_t cols = v[0].size();
  Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != cols) throw ConfigError("config", "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
    }
  }
  return m;
}

inline json vector_to_json(const Vector& v, bool bounds = false) {
  json arr = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) arr.push_back(bounds ? bound_to_json(v[j]) : json(v[j]));
  return arr;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

inline LocalObjective local_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") {
    reject_unknown_keys(j, {"type"}, "local objective");
    return ZeroObjective{};
  }
  if (type == "quadratic") {
    reject_unknown_keys(j, {"type", "A_q", "A_l", "C_t"}, "local objective");
    return QuadraticObjective{matrix_from_json(j.at("A_q")), vector_from_json(j.at("A_l")),
                              j.value("C_t", 0.0)};
  }
  if (type == "neglog") {
    reject_unknown_keys(j, {"type", "k"}, "local objective");
    return NegLogObjective{j.at("k").get<double>()};
  }
  throw ConfigError("config", "unknown local objective type '" + type + "'");
}

inline json local_to_json(const LocalObjective& f) {
  if (const auto* q = std::get_if<QuadraticObjective>(&f)) {
    return {{"type", "quadratic"},
            {"A_q", matrix_to_json(q->quad)},
            {"A_l", vector_to_json(q->linear)},
            {"C_t", q->constant}};
  }
  if (const auto* g = std::get_if<NegLogObjective>(&f)) return {{"type", "neglog"}, {"k", g->weight}};
  return {{"type", "zero"}};
}

inline UpdateOrder order_from_string(const std::string& s) {
  if (s == "dual_first") return UpdateOrder::kDualFirst;
  if (s == "simultaneous") return UpdateOrder::kSimultaneous;
  throw ConfigError("config", "unknown update order '" + s + "'");
}

}  // namespace detail

inline Experiment experiment_from_json(const nlohmann::json& j) {
  using detail::reject_unknown_keys;
  reject_unknown_keys(j, {"name", "rho", "c", "d", "agents", "params", "sigma", "x_star"},
                      "problem file");
  Experiment e;
  e.name = j.value("name", std::string("custom"));
  e.spec.rho = j.value("rho", 1.0);
  e.spec.objective_offset = detail::vector_from_json(j.at("c"));
  e.spec.constraint_offset = detail::vector_from_json(j.at("d"));
  for (const auto& a : j.at("agents")) {
    reject_unknown_keys(a, {"A_u", "A_g", "local", "lower", "upper"}, "agent");
    AgentSpec ag;
    ag.objective_coupling = detail::matrix_from_json(a.at("A_u"));
    ag.constraint_coupling = detail::matrix_from_json(a.at("A_g"));
    ag.local = a.contains("local") ? detail::local_from_json(a.at("local")) : ZeroObjective{};
    ag.box.lower = detail::vector_from_json(a.at("lower"), true);
    ag.box.upper = detail::vector_from_json(a.at("upper"), true);
    e.spec.agents.push_back(std::move(ag));
  }
  const auto& p = j.at("params");
  reject_unknown_keys(p, {"alpha", "beta", "tau_x", "tau_lambda", "v", "eps_reg", "lambda_max",
                          "eps0", "k_max", "order"},
                      "params");
  const auto& alpha = p.at("alpha");
  if (alpha.is_array()) {
    for (const auto& a : alpha) e.params.alpha.push_back(a.get<double>());
  } else {
    e.params.alpha.assign(e.spec.num_agents(), alpha.get<double>());
  }
  e.params.beta = p.at("beta").get<double>();
  e.params.tau_x = p.value("tau_x", 1.0);
  e.params.tau_lambda = p.value("tau_lambda", 1.0);
  e.params.v = p.value("v", 0.0);
  e.params.eps_reg = p.value("eps_reg", 0.0);
  e.params.lambda_max = p.value("lambda_max", 1e3);
  e.params.eps0 = p.value("eps0", 1e-4);
  e.params.k_max = p.value("k_max", 1000);
  e.params.order = detail::order_from_string(p.value("order", std::string("dual_first")));
  e.sigma = j.value("sigma", 3U);
  if (j.contains("x_star")) {
    PrimalPoint xs;
    for (const auto& v : j.at("x_star")) xs.push_back(detail::vector_from_json(v));
    e.x_star = std::move(xs);
  }
  e.spec.validate();
  e.params.validate(e.spec.num_agents());
  return e;
}

inline nlohmann::json experiment_to_json(const Experiment& e) {
  using detail::vector_to_json;
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : e.spec.agents) {
    agents.push_back({{"A_u", detail::matrix_to_json(a.objective_coupling)},
                      {"A_g", detail::matrix_to_json(a.constraint_coupling)},
                      {"local", detail::local_to_json(a.local)},
                      {"lower", vector_to_json(a.box.lower, true)},
                      {"upper", vector_to_json(a.box.upper, true)}});
  }
  nlohmann::json j = {
      {"name", e.name},
      {"rho", e.spec.rho},
      {"c", vector_to_json(e.spec.objective_offset)},
      {"d", vector_to_json(e.spec.constraint_offset)},
      {"agents", agents},
      {"params",
       {{"alpha", e.params.alpha},
        {"beta", e.params.beta},
        {"tau_x", e.params.tau_x},
        {"tau_lambda", e.params.tau_lambda},
        {"v", e.params.v},
        {"eps_reg", e.params.eps_reg},
        {"lambda_max", e.params.lambda_max},
        {"eps0", e.params.eps0},
        {"k_max", e.params.k_max},
        {"order", e.params.order == UpdateOrder::kDualFirst ? "dual_first" : "simultaneous"}}},
      {"sigma", e.sigma}};
  if (e.x_star) {
    nlohmann::json xs = nlohmann::json::array();
    for (const auto& v : *e.x_star) xs.push_back(vector_to_json(v));
    j["x_star"] = xs;
  }
  return j;
}

inline Experiment load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open problem file '" + path + "'");
  try {
    return experiment_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", "problem file '" + path + "': " + e.what());
  }
}

}  // namespace ppdo

#endif  // PPDO_PROBLEM_IO_HPP
