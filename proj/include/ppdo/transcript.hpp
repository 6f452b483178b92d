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

// Line-delimited JSON transcripts. One record per message:
//
//   {"k":3,"sender":"agent:1","receiver":"so","kind":"agent_upload",
//    "payload":{"objective":["123...","456..."],"constraint":[...]}}
//
// Ciphertexts are decimal integers; mask shares are reals printed with 17
// significant digits so a replay reproduces them exactly.

#ifndef PPDO_TRANSCRIPT_HPP
#define PPDO_TRANSCRIPT_HPP

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppdo/crypto.hpp"
#include "ppdo/error.hpp"
#include "ppdo/protocol.hpp"

namespace ppdo {

namespace detail {

inline std::string exact_decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json reals_to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) arr.push_back(exact_decimal(v[j]));
  return arr;
}

inline nlohmann::json cts_to_json(const std::vector<Ciphertext>& cts) {
  auto arr = nlohmann::json::array();
  for (const auto& ct : cts) arr.push_back(to_decimal(ct.value));
  return arr;
}

inline Vector reals_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const std::string s = arr[j].get<std::string>();
    char* end = nullptr;
    v[static_cast<Eigen::Index>(j)] = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw ConfigError("protocol", "transcript: malformed real '" + s + "'");
    }
  }
  return v;
}

inline std::vector<Ciphertext> cts_from_json(const nlohmann::json& arr, const CryptoContext& ctx) {
  std::vector<Ciphertext> out;
  for (const auto& s : arr) out.push_back(ctx.ciphertext_from_decimal(s.get<std::string>()));
  return out;
}

inline RoleId role_from_string(const std::string& s) {
  if (s == "so") return RoleId::system_operator();
  if (s.rfind("agent:", 0) == 0) {
    const long idx = std::strtol(s.c_str() + 6, nullptr, 10);
    if (idx >= 1) return RoleId::agent(static_cast<std::size_t>(idx - 1));
  }
  throw ConfigError("protocol", "transcript: unknown role '" + s + "'");
}

}  // namespace detail

inline nlohmann::json message_to_json(const Message& m) {
  nlohmann::json payload;
  if (const auto* share = std::get_if<MaskShare>(&m.payload)) {
    payload = {{"objective", detail::reals_to_json(share->objective_share)},
               {"constraint", detail::reals_to_json(share->constraint_share)}};
  } else if (const auto* up = std::get_if<AgentUpload>(&m.payload)) {
    payload = {{"objective", detail::cts_to_json(up->objective)},
               {"constraint", detail::cts_to_json(up->constraint)}};
  } else {
    const auto& b = std::get<AggregateBroadcast>(m.payload);
    payload = {{"objective", detail::cts_to_json(b.objective)},
               {"constraint", detail::cts_to_json(b.constraint)}};
  }
  return {{"k", m.k},
          {"sender", m.sender.str()},
          {"receiver", m.receiver.str()},
          {"kind", std::string(m.kind())},
          {"payload", std::move(payload)}};
}

inline Message message_from_json(const nlohmann::json& j, const CryptoContext& ctx) {
  Message m;
  m.k = j.at("k").get<int>();
  m.sender = detail::role_from_string(j.at("sender").get<std::string>());
  m.receiver = detail::role_from_string(j.at("receiver").get<std::string>());
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("payload");
  if (kind == "mask_share") {
    m.payload = MaskShare{detail::reals_from_json(p.at("objective")),
                          detail::reals_from_json(p.at("constraint"))};
  } else if (kind == "agent_upload") {
    m.payload = AgentUpload{detail::cts_from_json(p.at("objective"), ctx),
                            detail::cts_from_json(p.at("constraint"), ctx)};
  } else if (kind == "aggregate_broadcast") {
    m.payload = AggregateBroadcast{detail::cts_from_json(p.at("objective"), ctx),
                                   detail::cts_from_json(p.at("constraint"), ctx)};
  } else {
    throw ConfigError("protocol", "transcript: unknown message kind '" + kind + "'");
  }
  return m;
}

inline void write_transcript(std::ostream& out, std::span<const MessagePtr> messages) {
  for (const auto& m : messages) out << message_to_json(*m).dump() << '\n';
}

inline std::vector<MessagePtr> read_transcript(std::istream& in, const CryptoContext& ctx) {
  std::vector<MessagePtr> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(std::make_shared<const Message>(
          message_from_json(nlohmann::json::parse(line), ctx)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("protocol", "transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ppdo

#endif  // PPDO_TRANSCRIPT_HPP
