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

// In-process simulation of the masked, encrypted primal-dual protocol.
//
// Per iteration k:
//   1. the system operator (SO) draws masks r, s with sum 1 (or 0 when the
//      matching offset is zero) and sends r_i c, s_i d to agent i;
//   2. agent i uploads E(A_ui x_i + r_i c) and E(A_gi x_i + s_i d);
//   3. the SO adds the uploads over ciphertext and broadcasts
//      E(sum A_ui x_i + c) and E(sum A_gi x_i + d);
//   4. every agent decrypts both sums and applies the same primal-dual update
//      as the plaintext solver, keeping its own replica of lambda.
//
// The SO never holds the key; agents never see each other's x_j.

#ifndef PPDO_PROTOCOL_HPP
#define PPDO_PROTOCOL_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ppdo/crypto.hpp"
#include "ppdo/error.hpp"
#include "ppdo/optcore.hpp"

namespace ppdo {

using Rng = std::mt19937_64;

/// Independent stream for one protocol role, derived from the master seed.
inline Rng role_rng(std::uint64_t master_seed, std::uint32_t role_tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32), role_tag, 0x70706430U};
  return Rng(seq);
}

inline constexpr std::uint32_t kKeygenStream = 0;
inline constexpr std::uint32_t kSystemOperatorStream = 1;
inline constexpr std::uint32_t agent_stream(std::size_t i) {
  return 2 + static_cast<std::uint32_t>(i);
}

// ---------------------------------------------------------------------------
// Masks

/// kAffine masks sum to one, kZero masks sum to zero.
enum class MaskMode { kAffine, kZero };

inline double mask_target(MaskMode mode) { return mode == MaskMode::kAffine ? 1.0 : 0.0; }

struct MaskVector {
  std::vector<double> values;
  MaskMode mode = MaskMode::kAffine;

  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

/// One iteration's masks. `objective_offset` / `constraint_offset` are the
/// vectors the shares are built from: c and d themselves, or a fresh random
/// surrogate when the real offset is zero and the mask runs in kZero mode.
struct MaskSet {
  int k = 0;
  MaskVector r;
  MaskVector s;
  Vector objective_offset;
  Vector constraint_offset;
};

/// n - 1 draws uniform on the grid 2^-42 Z within [-1, 1]; the last entry
/// closes the sum. On that grid every partial sum is exact for n <= 1024, so
/// the entries add up to the target exactly in any order.
template <class Gen>
MaskVector generate_mask_vector(std::size_t n, MaskMode mode, Gen& rng) {
  if (n < 2) {
    throw ProtocolError("protocol", "at least two agents are required; a single agent would "
                                    "receive the unmasked offset");
  }
  constexpr std::int64_t kGrid = std::int64_t{1} << 42;
  std::uniform_int_distribution<std::int64_t> unit(-kGrid, kGrid);
  MaskVector mv;
  mv.mode = mode;
  mv.values.resize(n);
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mv.values[i] = std::ldexp(static_cast<double>(unit(rng)), -42);
    partial += mv.values[i];
  }
  mv.values[n - 1] = mask_target(mode) - partial;
  return mv;
}

template <class Gen>
MaskSet generate_masks(std::size_t n, MaskMode r_mode, MaskMode s_mode, Gen& rng) {
  MaskSet ms;
  ms.r = generate_mask_vector(n, r_mode, rng);
  ms.s = generate_mask_vector(n, s_mode, rng);
  return ms;
}

inline MaskMode mode_for_offset(const Vector& offset) {
  return offset.isZero(0.0) ? MaskMode::kZero : MaskMode::kAffine;
}

// ---------------------------------------------------------------------------
// Messages

struct RoleId {
  enum class Kind { kSystemOperator, kAgent };
  Kind kind = Kind::kSystemOperator;
  std::size_t index = 0;  // agent index, zero-based

  static RoleId system_operator() { return {Kind::kSystemOperator, 0}; }
  static RoleId agent(std::size_t i) { return {Kind::kAgent, i}; }

  bool is_agent() const { return kind == Kind::kAgent; }
  bool operator==(const RoleId&) const = default;

  std::string str() const {
    return is_agent() ? "agent:" + std::to_string(index + 1) : std::string("so");
  }
};

struct MaskShare {
  Vector objective_share;   // r_i c
  Vector constraint_share;  // s_i d
};

struct AgentUpload {
  std::vector<Ciphertext> objective;   // E(A_ui x_i + r_i c)
  std::vector<Ciphertext> constraint;  // E(A_gi x_i + s_i d)
};

struct AggregateBroadcast {
  std::vector<Ciphertext> objective;   // E(sum A_ui x_i + c)
  std::vector<Ciphertext> constraint;  // E(sum A_gi x_i + d)
};

using Payload = std::variant<MaskShare, AgentUpload, AggregateBroadcast>;

struct Message {
  int k = 0;
  RoleId sender;
  RoleId receiver;
  Payload payload;

  std::string_view kind() const {
    switch (payload.index()) {
      case 0: return "mask_share";
      case 1: return "agent_upload";
      default: return "aggregate_broadcast";
    }
  }
};

using MessagePtr = std::shared_ptr<const Message>;

// ---------------------------------------------------------------------------
// Adversary taps

enum class ObserverKind { kCuriousAgent, kEavesdropper, kSystemOperator };

/// Append-only view of the wire for one observer. A curious agent wiretaps
/// every link and also holds the shared key; an eavesdropper wiretaps every
/// link without the key; the SO sees only its own links.
struct AdversaryTap {
  ObserverKind observer = ObserverKind::kEavesdropper;
  std::size_t agent_index = 0;  // kCuriousAgent only
  std::vector<MessagePtr> transcript;

  bool observes(const Message& m) const {
    if (observer == ObserverKind::kSystemOperator) {
      return !m.sender.is_agent() || !m.receiver.is_agent();
    }
    return true;
  }

  bool holds_key() const { return observer == ObserverKind::kCuriousAgent; }
};

/// Ordered, lossless in-process bus. Taps only ever read.
class MessageBus {
 public:
  explicit MessageBus(bool keep_log) : keep_log_(keep_log) {}

  void attach(AdversaryTap& tap) { taps_.push_back(&tap); }

  MessagePtr send(Message m) {
    auto ptr = std::make_shared<const Message>(std::move(m));
    for (AdversaryTap* tap : taps_) {
      if (tap->observes(*ptr)) tap->transcript.push_back(ptr);
    }
    if (keep_log_) log_.push_back(ptr);
    return ptr;
  }

  const std::vector<MessagePtr>& log() const { return log_; }

 private:
  bool keep_log_;
  std::vector<AdversaryTap*> taps_;
  std::vector<MessagePtr> log_;
};

// ---------------------------------------------------------------------------
// Roles

/// SO state. Holds the global offsets (and, in this trust model, all
/// coefficients) but no decryption key.
struct SystemOperatorState {
  Vector objective_offset;
  Vector constraint_offset;
  std::size_t num_agents = 0;
  MaskMode r_mode = MaskMode::kAffine;
  MaskMode s_mode = MaskMode::kAffine;
  Rng rng;
};

inline SystemOperatorState make_system_operator(const ProblemSpec& spec, std::uint64_t master_seed) {
  return {spec.objective_offset,
          spec.constraint_offset,
          spec.num_agents(),
          mode_for_offset(spec.objective_offset),
          mode_for_offset(spec.constraint_offset),
          role_rng(master_seed, kSystemOperatorStream)};
}

/// Fresh masks for iteration k. In kZero mode a surrogate offset is drawn
/// uniform on [-1, 1] so the shares are not identically zero.
inline MaskSet so_generate_masks(SystemOperatorState& so, int k) {
  MaskSet ms = generate_masks(so.num_agents, so.r_mode, so.s_mode, so.rng);
  ms.k = k;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto offset_for = [&](MaskMode mode, const Vector& real_offset) {
    if (mode == MaskMode::kAffine) return real_offset;
    Vector surrogate(real_offset.size());
    for (Eigen::Index j = 0; j < surrogate.size(); ++j) surrogate[j] = unit(so.rng);
    return surrogate;
  };
  ms.objective_offset = offset_for(so.r_mode, so.objective_offset);
  ms.constraint_offset = offset_for(so.s_mode, so.constraint_offset);
  return ms;
}

inline MaskShare mask_share_for(const MaskSet& masks, std::size_t i) {
  return {masks.r.values[i] * masks.objective_offset, masks.s.values[i] * masks.constraint_offset};
}

/// Agent i receives exactly r_i c and s_i d.
inline std::vector<Message> so_distribute_masks(const SystemOperatorState& so, const MaskSet& masks) {
  std::vector<Message> out;
  out.reserve(so.num_agents);
  for (std::size_t i = 0; i < so.num_agents; ++i) {
    out.push_back({masks.k, RoleId::system_operator(), RoleId::agent(i), mask_share_for(masks, i)});
  }
  return out;
}

/// Everything an agent needs to run its local update.
struct UpdateRule {
  Method method = Method::kSpds;
  double rho = 1.0;
  SolverParams params;
  double b_max = 1e4;
  std::size_t num_agents = 0;
};

struct AgentState {
  std::size_t index = 0;
  AgentSpec spec;
  Vector x;
  Vector lambda;  // replica
  Rng rng;
};

inline AgentState make_agent(const ProblemSpec& spec, std::size_t i, const PrimalDualState& init,
                             std::uint64_t master_seed) {
  return {i, spec.agents[i], init.x[i], init.lambda, role_rng(master_seed, agent_stream(i))};
}

namespace detail {

inline void check_message_bound(const Vector& v, double b_max, std::size_t agent, int k,
                                std::string_view what) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!(std::fabs(v[j]) <= b_max)) {
      throw OverflowError("protocol", "agent " + std::to_string(agent + 1) + " at k = " +
                                          std::to_string(k) + ": " + std::string(what) +
                                          " component " + std::to_string(j) + " = " +
                                          std::to_string(v[j]) + " exceeds B_max = " +
                                          std::to_string(b_max));
    }
  }
}

}  // namespace detail

/// Plaintext values agent i would encrypt: A_ui x_i + r_i c, A_gi x_i + s_i d.
inline Aggregates masked_local_terms(const AgentSpec& spec, const Vector& x, const MaskShare& share) {
  return {spec.objective_coupling * x + share.objective_share,
          spec.constraint_coupling * x + share.constraint_share};
}

inline Message agent_upload(AgentState& agent, const MaskShare& share, int k,
                            const CryptoContext& ctx, double b_max) {
  const Aggregates terms = masked_local_terms(agent.spec, agent.x, share);
  detail::check_message_bound(terms.objective, b_max, agent.index, k, "objective message");
  detail::check_message_bound(terms.constraint, b_max, agent.index, k, "constraint message");
  AgentUpload up{ctx.encrypt_vector(terms.objective, agent.rng),
                 ctx.encrypt_vector(terms.constraint, agent.rng)};
  return {k, RoleId::agent(agent.index), RoleId::system_operator(), std::move(up)};
}

/// Ciphertext-only sum of the n uploads of iteration k. The SO performs no
/// decryption.
inline AggregateBroadcast so_aggregate(std::span<const MessagePtr> uploads, std::size_t num_agents,
                                       int k) {
  std::vector<const AgentUpload*> by_agent(num_agents, nullptr);
  for (const auto& m : uploads) {
    const auto* up = std::get_if<AgentUpload>(&m->payload);
    if (up == nullptr || m->k != k || !m->sender.is_agent() || m->sender.index >= num_agents) {
      throw ProtocolError("protocol", "unexpected message in aggregation of iteration " +
                                          std::to_string(k));
    }
    if (by_agent[m->sender.index] != nullptr) {
      throw ProtocolError("protocol", "duplicate upload from " + m->sender.str());
    }
    by_agent[m->sender.index] = up;
  }
  for (std::size_t i = 0; i < num_agents; ++i) {
    if (by_agent[i] == nullptr) {
      throw ProtocolError("protocol", "stalled at k = " + std::to_string(k) +
                                          ": no upload from agent " + std::to_string(i + 1));
    }
  }
  AggregateBroadcast agg{by_agent[0]->objective, by_agent[0]->constraint};
  for (std::size_t i = 1; i < num_agents; ++i) {
    agg.objective = cipher_add(std::span<const Ciphertext>(agg.objective),
                               std::span<const Ciphertext>(by_agent[i]->objective));
    agg.constraint = cipher_add(std::span<const Ciphertext>(agg.constraint),
                                std::span<const Ciphertext>(by_agent[i]->constraint));
  }
  return agg;
}

/// Decrypted aggregates, with a plausibility check that catches decryption
/// under the wrong key (the result is then a uniformly random residue).
inline Aggregates decrypt_aggregates(const AggregateBroadcast& b, const CryptoContext& ctx,
                                     const UpdateRule& rule) {
  Aggregates agg{ctx.decrypt_vector(b.objective), ctx.decrypt_vector(b.constraint)};
  const double bound = rule.b_max * static_cast<double>(rule.num_agents);
  const auto plausible = [bound](const Vector& v) {
    return (v.array().abs() <= bound).all();
  };
  if (!plausible(agg.objective) || !plausible(agg.constraint)) {
    throw KeyMismatchError("protocol", "decrypted aggregate exceeds n*B_max; wrong key?");
  }
  return agg;
}

/// Decrypt both aggregates and take one local primal-dual step. The dual
/// replica is updated from the same broadcast by every agent.
inline void agent_apply_update(AgentState& agent, const AggregateBroadcast& broadcast,
                               const CryptoContext& ctx, const UpdateRule& rule) {
  const Aggregates agg = decrypt_aggregates(broadcast, ctx, rule);
  const Vector next_lambda = dual_update(rule.method, rule.params, agent.lambda, agg.constraint);
  const Vector& lambda_for_primal =
      rule.params.order == UpdateOrder::kDualFirst ? next_lambda : agent.lambda;
  agent.x = primal_update(rule.method, agent.spec, rule.rho, rule.params, agent.index, agent.x,
                          agg.objective, lambda_for_primal);
  agent.lambda = next_lambda;
}

// ---------------------------------------------------------------------------
// Whole run

struct CryptoSettings {
  Scheme scheme = Scheme::kSingleMod;
  unsigned sigma = 3;
  unsigned key_bits = 51;
  unsigned m_bits = kDefaultMultiplierBits;
  // Optional fixed key material (decimal). Generated from the master seed
  // when absent.
  std::optional<std::string> singlemod_w;
  std::optional<std::string> paillier_n;
  std::optional<std::string> paillier_g;
  std::optional<std::string> paillier_lambda;
};

inline CryptoContext make_crypto_context(const CryptoSettings& s, std::uint64_t master_seed) {
  if (s.scheme == Scheme::kSingleMod) {
    if (s.singlemod_w) return {singlemod_key_from_decimal(*s.singlemod_w, s.m_bits), s.sigma};
    Rng rng = role_rng(master_seed, kKeygenStream);
    return {keygen_singlemod(s.key_bits, s.m_bits, rng), s.sigma};
  }
  if (s.paillier_n || s.paillier_lambda) {
    if (!s.paillier_n || !s.paillier_lambda) {
      throw ConfigError("crypto", "Paillier key needs both n and lambda");
    }
    BigInt n = from_decimal(*s.paillier_n);
    BigInt g = s.paillier_g ? from_decimal(*s.paillier_g) : BigInt(n + 1);
    if (bit_length(n) < kPaillierMinBits) {
      throw ConfigError("crypto", "Paillier modulus below " + std::to_string(kPaillierMinBits) +
                                      " bits");
    }
    PaillierPublicKey pub = PaillierPublicKey::from_modulus(std::move(n), std::move(g));
    PaillierPrivateKey priv = detail::paillier_private(pub, from_decimal(*s.paillier_lambda));
    return {PaillierKeyPair{std::move(pub), std::move(priv)}, s.sigma};
  }
  Rng rng = role_rng(master_seed, kKeygenStream);
  return {paillier_keygen(s.key_bits, rng), s.sigma};
}

struct ProtocolConfig {
  ProblemSpec spec;
  SolverParams params;
  Method method = Method::kSpds;
  CryptoSettings crypto;
  double b_max = 1e4;
  std::uint64_t master_seed = 0;
  std::optional<PrimalDualState> init;
  bool record_transcripts = true;
  std::size_t curious_agent = 0;
  /// Prebuilt key material; overrides `crypto` when set.
  std::shared_ptr<const CryptoContext> context;
};

struct AdversaryTaps {
  AdversaryTap curious_agent{ObserverKind::kCuriousAgent, 0, {}};
  AdversaryTap eavesdropper{ObserverKind::kEavesdropper, 0, {}};
  AdversaryTap system_operator{ObserverKind::kSystemOperator, 0, {}};
};

struct ProtocolRun {
  Trajectory trajectory;       // agent-side state after every iteration
  std::vector<MaskSet> masks;  // masks[k] used in iteration k + 1
  std::vector<MessagePtr> wire;
  AdversaryTaps taps;
  std::shared_ptr<const CryptoContext> context;
  bool lambda_replicas_consistent = true;
};

inline ProtocolRun run_protocol(const ProtocolConfig& config) {
  const ProblemSpec& spec = config.spec;
  spec.validate();
  config.params.validate(spec.num_agents());
  const std::size_t n = spec.num_agents();
  if (n < 2) throw ProtocolError("protocol", "at least two agents are required");
  if (config.curious_agent >= n) throw ConfigError("protocol", "curious agent index out of range");

  ProtocolRun run;
  run.context = config.context ? config.context
                               : std::make_shared<const CryptoContext>(
                                     make_crypto_context(config.crypto, config.master_seed));
  const CryptoContext& ctx = *run.context;
  check_overflow_budget(ctx.modulus(), ctx.sigma(), config.b_max, n);

  const UpdateRule rule{config.method, spec.rho, config.params, config.b_max, n};
  const PrimalDualState init = config.init ? *config.init : initial_state(spec);

  SystemOperatorState so = make_system_operator(spec, config.master_seed);
  std::vector<AgentState> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) agents.push_back(make_agent(spec, i, init, config.master_seed));

  MessageBus bus(config.record_transcripts);
  run.taps.curious_agent.agent_index = config.curious_agent;
  if (config.record_transcripts) {
    bus.attach(run.taps.curious_agent);
    bus.attach(run.taps.eavesdropper);
    bus.attach(run.taps.system_operator);
  }

  auto snapshot = [&](int k) {
    PrimalDualState s;
    s.k = k;
    for (const auto& a : agents) s.x.push_back(a.x);
    s.lambda = agents[0].lambda;
    for (const auto& a : agents) {
      if (!(a.lambda.array() == s.lambda.array()).all()) run.lambda_replicas_consistent = false;
    }
    return s;
  };

  run.trajectory.states.push_back(snapshot(0));
  for (int k = 1; k <= config.params.k_max; ++k) {
    MaskSet masks = so_generate_masks(so, k);

    std::vector<MessagePtr> uploads;
    uploads.reserve(n);
    for (Message& share_msg : so_distribute_masks(so, masks)) {
      MessagePtr delivered = bus.send(std::move(share_msg));
      AgentState& agent = agents[delivered->receiver.index];
      const auto& share = std::get<MaskShare>(delivered->payload);
      uploads.push_back(bus.send(agent_upload(agent, share, k, ctx, config.b_max)));
    }

    const AggregateBroadcast broadcast = so_aggregate(uploads, n, k);
    for (std::size_t i = 0; i < n; ++i) {
      MessagePtr delivered =
          bus.send({k, RoleId::system_operator(), RoleId::agent(i), broadcast});
      agent_apply_update(agents[i], std::get<AggregateBroadcast>(delivered->payload), ctx, rule);
    }
    run.masks.push_back(std::move(masks));

    PrimalDualState next = snapshot(k);
    if (!detail::all_finite(next)) {
      throw DivergenceError("protocol", "non-finite iterate at k = " + std::to_string(k));
    }
    const double eps = stopping_error(run.trajectory.states.back(), next);
    run.trajectory.states.push_back(std::move(next));
    run.trajectory.eps.push_back(eps);
    if (eps <= config.params.eps0) {
      run.trajectory.converged = true;
      break;
    }
  }
  run.wire = bus.log();
  return run;
}

}  // namespace ppdo

#endif  // PPDO_PROTOCOL_HPP
