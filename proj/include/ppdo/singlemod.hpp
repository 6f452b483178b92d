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

// SingleMod private-key scheme: E(z) = m*w + z with a large prime w and a
// fresh random multiplier m; D(e) = e mod w. Sums and products of
// ciphertexts decrypt to sums and products of plaintexts mod w. Not
// semantically secure.

#ifndef PPDO_SINGLEMOD_HPP
#define PPDO_SINGLEMOD_HPP

#include <string>

#include "ppdo/bigint.hpp"
#include "ppdo/ciphertext.hpp"
#include "ppdo/error.hpp"

namespace ppdo {

inline constexpr unsigned kSingleModMinBits = 32;
inline constexpr unsigned kDefaultMultiplierBits = 40;

struct SingleModKey {
  BigInt w;
  unsigned m_bits = kDefaultMultiplierBits;
};

template <class Rng>
SingleModKey keygen_singlemod(unsigned bits, unsigned m_bits, Rng& rng) {
  if (bits < kSingleModMinBits) {
    throw ConfigError("crypto", "SingleMod key needs at least " +
                                    std::to_string(kSingleModMinBits) + " bits, got " +
                                    std::to_string(bits));
  }
  if (m_bits < 1) throw ConfigError("crypto", "m_bits must be at least 1");
  return {random_prime(rng, bits), m_bits};
}

/// Rebuild a key from its decimal form, checking primality.
inline SingleModKey singlemod_key_from_decimal(const std::string& w, unsigned m_bits) {
  SingleModKey key{from_decimal(w), m_bits};
  if (!is_probable_prime(key.w)) throw ConfigError("crypto", "SingleMod key w is not prime");
  return key;
}

template <class Rng>
Ciphertext encrypt_singlemod(const SingleModKey& key, const BigInt& z, Rng& rng) {
  if (z < 0 || z >= key.w) throw ContractError("crypto", "SingleMod plaintext outside [0, w)");
  // m uniform on [1, 2^m_bits]
  const BigInt m = random_below(rng, BigInt(1) << key.m_bits) + 1;
  return {m * key.w + z, Scheme::kSingleMod, 1, nullptr};
}

inline BigInt decrypt_singlemod(const SingleModKey& key, const Ciphertext& ct) {
  if (ct.scheme != Scheme::kSingleMod) {
    throw SchemeMismatchError("crypto", "SingleMod key cannot decrypt a Paillier ciphertext");
  }
  BigInt z = ct.value % key.w;
  if (z < 0) z += key.w;
  return z;
}

}  // namespace ppdo

#endif  // PPDO_SINGLEMOD_HPP
