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

// Replays adversary transcripts against ground truth and checks what each
// observer can actually learn.

#ifndef PPDO_AUDIT_HPP
#define PPDO_AUDIT_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ppdo/crypto.hpp"
#include "ppdo/error.hpp"
#include "ppdo/optcore.hpp"
#include "ppdo/protocol.hpp"

namespace ppdo {

/// What really happened: the x^k each agent uploaded in round k (index k-1)
/// and the masks the SO drew.
struct GroundTruth {
  const ProblemSpec* spec = nullptr;
  std::vector<PrimalPoint> uploaded_x;
  std::vector<MaskSet> masks;
};

inline GroundTruth ground_truth_of(const ProblemSpec& spec, const ProtocolRun& run) {
  GroundTruth gt{&spec, {}, run.masks};
  for (std::size_t k = 0; k + 1 < run.trajectory.states.size(); ++k) {
    gt.uploaded_x.push_back(run.trajectory.states[k].x);
  }
  return gt;
}

struct AuditReport {
  std::size_t messages_scanned = 0;
  std::size_t curious_views_checked = 0;
  std::size_t eavesdropper_ciphertexts = 0;
  std::size_t eavesdropper_plausible = 0;
  std::vector<int> mask_degenerate_iterations;
  std::vector<std::string> warnings;
};

namespace detail {

[[noreturn]] inline void audit_fail(const std::string& what) {
  throw SecurityRegressionError("audit", what);
}

inline bool same_vector(const Vector& a, const Vector& b, double tol) {
  return a.size() == b.size() && (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

// (a) schema: upload and broadcast payloads are ciphertexts; for SingleMod a
// ciphertext is never a bare residue (m >= 1). Mask shares never coincide
// with a nonzero decision vector.
inline void audit_schema(const Message& m, const GroundTruth& gt, const CryptoContext& ctx) {
  auto check_cts = [&](const std::vector<Ciphertext>& cts) {
    for (const auto& ct : cts) {
      if (ct.scheme != ctx.scheme()) audit_fail("ciphertext of unexpected scheme on the wire");
      if (ct.scheme == Scheme::kSingleMod && ct.value < ctx.modulus()) {
        audit_fail("SingleMod payload at k = " + std::to_string(m.k) +
                   " is a bare residue, not a ciphertext");
      }
    }
  };
  if (const auto* up = std::get_if<AgentUpload>(&m.payload)) {
    if (!m.sender.is_agent() || m.receiver.is_agent()) audit_fail("upload on an unexpected link");
    check_cts(up->objective);
    check_cts(up->constraint);
  } else if (const auto* b = std::get_if<AggregateBroadcast>(&m.payload)) {
    if (m.sender.is_agent()) audit_fail("aggregate broadcast sent by an agent");
    check_cts(b->objective);
    check_cts(b->constraint);
  } else {
    const auto& share = std::get<MaskShare>(m.payload);
    if (m.sender.is_agent()) audit_fail("mask share sent by an agent");
    const std::size_t round = static_cast<std::size_t>(m.k - 1);
    if (round < gt.uploaded_x.size()) {
      for (const auto& xi : gt.uploaded_x[round]) {
        for (const Vector* v : {&share.objective_share, &share.constraint_share}) {
          if (!xi.isZero(0.0) && v->size() == xi.size() && *v == xi) {
            audit_fail("mask share at k = " + std::to_string(m.k) + " equals a decision vector");
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Checks the three observer views against ground truth and throws
/// SecurityRegressionError on the first violation:
///  (a) no plaintext decision variable appears in any message;
///  (b) a curious agent decrypting a peer upload sees A_uj x_j + r_j c, which
///      is off from A_uj x_j by the mask offset (near-zero offsets are
///      reported as mask-degenerate iterations, not failures);
///  (c) the SO view holds only ciphertexts plus the masks it generated;
///  (d) raw ciphertexts read without the key fall outside the plausible
///      message range except with negligible frequency.
inline AuditReport adversary_audit(const AdversaryTaps& taps, const GroundTruth& truth,
                                   const CryptoContext& ctx, double b_max) {
  if (truth.spec == nullptr) throw ContractError("audit", "ground truth lacks a problem spec");
  const ProblemSpec& spec = *truth.spec;
  const std::size_t n = spec.num_agents();
  const double quantum = 0.5 * std::pow(10.0, -static_cast<double>(ctx.sigma()));
  AuditReport report;

  for (const AdversaryTap* tap : {&taps.curious_agent, &taps.eavesdropper, &taps.system_operator}) {
    for (const auto& m : tap->transcript) {
      detail::audit_schema(*m, truth, ctx);
      ++report.messages_scanned;
    }
  }

  // (b)
  const std::size_t j = taps.curious_agent.agent_index;
  std::vector<bool> degenerate(truth.masks.size(), false);
  for (const auto& m : taps.curious_agent.transcript) {
    const auto* up = std::get_if<AgentUpload>(&m->payload);
    if (up == nullptr || m->sender.index == j) continue;
    const std::size_t i = m->sender.index;
    const std::size_t round = static_cast<std::size_t>(m->k - 1);
    if (round >= truth.uploaded_x.size() || i >= n) detail::audit_fail("upload outside the ground truth");
    const MaskShare share = mask_share_for(truth.masks[round], i);
    const AgentSpec& a = spec.agents[i];
    const Vector& xi = truth.uploaded_x[round][i];
    const Vector true_terms[2] = {a.objective_coupling * xi, a.constraint_coupling * xi};
    const Vector offsets[2] = {share.objective_share, share.constraint_share};
    const Vector views[2] = {ctx.decrypt_vector(up->objective), ctx.decrypt_vector(up->constraint)};
    for (int q = 0; q < 2; ++q) {
      const double tol = quantum * (1.0 + 1e-9) + 1e-12 * (1.0 + true_terms[q].lpNorm<Eigen::Infinity>());
      if (!detail::same_vector(views[q], true_terms[q] + offsets[q], tol)) {
        detail::audit_fail("curious-agent view of agent " + std::to_string(i + 1) + " at k = " +
                   std::to_string(m->k) + " is not the masked message");
      }
      const double offset = offsets[q].lpNorm<Eigen::Infinity>();
      if (offset <= 2.0 * quantum) {
        degenerate[round] = true;
        continue;
      }
      const double seen = (views[q] - true_terms[q]).lpNorm<Eigen::Infinity>();
      if (!(seen >= offset - quantum * (1.0 + 1e-9))) {
        detail::audit_fail("curious agent recovers agent " + std::to_string(i + 1) + "'s message at k = " +
                   std::to_string(m->k));
      }
    }
    ++report.curious_views_checked;
  }
  for (std::size_t r = 0; r < degenerate.size(); ++r) {
    if (degenerate[r]) {
      report.mask_degenerate_iterations.push_back(static_cast<int>(r + 1));
      report.warnings.push_back("iteration " + std::to_string(r + 1) +
                                " drew a near-zero mask offset for some agent");
    }
  }

  // (c)
  for (const auto& m : taps.system_operator.transcript) {
    if (m->sender.is_agent() && m->receiver.is_agent()) detail::audit_fail("SO observed an agent-agent link");
    if (const auto* share = std::get_if<MaskShare>(&m->payload)) {
      const std::size_t round = static_cast<std::size_t>(m->k - 1);
      if (round >= truth.masks.size()) detail::audit_fail("mask share outside the ground truth");
      const MaskShare expected = mask_share_for(truth.masks[round], m->receiver.index);
      if (!(share->objective_share.array() == expected.objective_share.array()).all() ||
          !(share->constraint_share.array() == expected.constraint_share.array()).all()) {
        detail::audit_fail("SO view holds a mask share it did not generate");
      }
    } else if (m->receiver == RoleId::system_operator() &&
               !std::holds_alternative<AgentUpload>(m->payload)) {
      detail::audit_fail("SO received a non-ciphertext payload");
    }
  }

  // (d)
  const BigInt scale = pow10_big(ctx.sigma());
  const BigInt plausible = BigInt(std::ceil(b_max)) * n * scale;
  auto scan = [&](const std::vector<Ciphertext>& cts) {
    for (const auto& ct : cts) {
      ++report.eavesdropper_ciphertexts;
      if (ct.value <= plausible) ++report.eavesdropper_plausible;
    }
  };
  for (const auto& m : taps.eavesdropper.transcript) {
    if (const auto* up = std::get_if<AgentUpload>(&m->payload)) {
      scan(up->objective);
      scan(up->constraint);
    } else if (const auto* b = std::get_if<AggregateBroadcast>(&m->payload)) {
      scan(b->objective);
      scan(b->constraint);
    }
  }
  if (report.eavesdropper_ciphertexts > 0 &&
      static_cast<double>(report.eavesdropper_plausible) >
          1e-6 * static_cast<double>(report.eavesdropper_ciphertexts)) {
    detail::audit_fail("eavesdropper reads plausible values straight off " +
               std::to_string(report.eavesdropper_plausible) + " ciphertexts");
  }
  return report;
}

}  // namespace ppdo

#endif  // PPDO_AUDIT_HPP
