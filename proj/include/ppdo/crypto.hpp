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

#ifndef PPDO_CRYPTO_HPP
#define PPDO_CRYPTO_HPP

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ppdo/bigint.hpp"
#include "ppdo/ciphertext.hpp"
#include "ppdo/codec.hpp"
#include "ppdo/error.hpp"
#include "ppdo/optcore.hpp"
#include "ppdo/paillier.hpp"
#include "ppdo/singlemod.hpp"

namespace ppdo {

/// Overflow guard: a sum of `num_agents` messages, each bounded by b_max,
/// must stay inside the signed residue range.
inline void check_overflow_budget(const BigInt& modulus, unsigned sigma, double b_max,
                                  std::size_t num_agents) {
  if (!(b_max > 0.0) || !std::isfinite(b_max)) {
    throw ConfigError("crypto", "B_max must be positive and finite");
  }
  const BigInt bound = 2 * pow10_big(sigma) * BigInt(std::ceil(b_max)) * num_agents;
  if (modulus <= bound) {
    throw ConfigError("crypto", "key too small: modulus has " + std::to_string(bit_length(modulus)) +
                                    " bits but 2*10^sigma*B_max*n needs " +
                                    std::to_string(bit_length(bound) + 1));
  }
}

/// Key material plus codec, shared by every agent. Immutable after
/// construction; encryption takes the caller's randomness stream.
class CryptoContext {
 public:
  CryptoContext(SingleModKey key, unsigned sigma)
      : codec_(sigma, key.w), key_(std::move(key)) {}

  CryptoContext(PaillierKeyPair key, unsigned sigma)
      : codec_(sigma, key.pub.n), key_(std::move(key)) {}

  Scheme scheme() const {
    return std::holds_alternative<SingleModKey>(key_) ? Scheme::kSingleMod : Scheme::kPaillier;
  }
  const FixedPointCodec& codec() const { return codec_; }
  unsigned sigma() const { return codec_.sigma(); }
  const BigInt& modulus() const { return codec_.modulus(); }

  const SingleModKey* single_mod_key() const { return std::get_if<SingleModKey>(&key_); }
  const PaillierKeyPair* paillier_key() const { return std::get_if<PaillierKeyPair>(&key_); }

  template <class Rng>
  Ciphertext encrypt_residue(const BigInt& z, Rng& rng) const {
    if (const auto* k = single_mod_key()) return encrypt_singlemod(*k, z, rng);
    return paillier_encrypt(std::get<PaillierKeyPair>(key_), z, rng);
  }

  BigInt decrypt_residue(const Ciphertext& ct) const {
    if (const auto* k = single_mod_key()) return decrypt_singlemod(*k, ct);
    return paillier_decrypt(std::get<PaillierKeyPair>(key_), ct);
  }

  template <class Rng>
  Ciphertext encrypt(double r, Rng& rng) const {
    return encrypt_residue(codec_.encode(r), rng);
  }

  double decrypt(const Ciphertext& ct) const {
    if (ct.scale != 1) {
      throw SchemeMismatchError("crypto", "decrypting a scale-" + std::to_string(ct.scale) +
                                              " ciphertext as a real");
    }
    return codec_.decode(decrypt_residue(ct));
  }

  template <class Rng>
  std::vector<Ciphertext> encrypt_vector(const Vector& v, Rng& rng) const {
    std::vector<Ciphertext> out;
    out.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(encrypt(v[j], rng));
    return out;
  }

  Vector decrypt_vector(std::span<const Ciphertext> cts) const {
    Vector out(static_cast<Eigen::Index>(cts.size()));
    for (std::size_t j = 0; j < cts.size(); ++j) out[static_cast<Eigen::Index>(j)] = decrypt(cts[j]);
    return out;
  }

  /// Reattach scheme metadata to a serialized ciphertext value.
  Ciphertext ciphertext_from_decimal(const std::string& value) const {
    if (const auto* k = paillier_key()) {
      return {from_decimal(value), Scheme::kPaillier, 1, k->pub.n_squared};
    }
    return {from_decimal(value), Scheme::kSingleMod, 1, nullptr};
  }

 private:
  FixedPointCodec codec_;
  std::variant<SingleModKey, PaillierKeyPair> key_;
};

/// Elementwise cipher_add of two equally sized ciphertext vectors.
inline std::vector<Ciphertext> cipher_add(std::span<const Ciphertext> a,
                                          std::span<const Ciphertext> b) {
  if (a.size() != b.size()) {
    throw DimensionError("crypto", "ciphertext vectors of different length");
  }
  std::vector<Ciphertext> out;
  out.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(cipher_add(a[j], b[j]));
  return out;
}

}  // namespace ppdo

#endif  // PPDO_CRYPTO_HPP
