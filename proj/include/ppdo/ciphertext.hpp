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

#ifndef PPDO_CIPHERTEXT_HPP
#define PPDO_CIPHERTEXT_HPP

#include <memory>
#include <string>
#include <string_view>

#include "ppdo/bigint.hpp"
#include "ppdo/error.hpp"

namespace ppdo {

enum class Scheme { kSingleMod, kPaillier };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::kSingleMod ? "singlemod" : "paillier";
}

/// Homomorphic ciphertext.
///
/// `scale` counts the 10^sigma factors carried by the plaintext: 1 after
/// encryption of an encoded real, 2 after one ciphertext product. Paillier
/// ciphertexts also carry the public group modulus n^2 so that addition needs
/// no key; SingleMod ciphertexts are plain integers and leave it null.
struct Ciphertext {
  BigInt value;
  Scheme scheme = Scheme::kSingleMod;
  int scale = 1;
  std::shared_ptr<const BigInt> group_modulus;
};

inline Ciphertext cipher_add(const Ciphertext& a, const Ciphertext& b) {
  if (a.scheme != b.scheme) {
    throw SchemeMismatchError("crypto", "cannot add ciphertexts of different schemes");
  }
  if (a.scale != b.scale) {
    throw SchemeMismatchError("crypto", "cannot add ciphertexts with scale " +
                                            std::to_string(a.scale) + " and " +
                                            std::to_string(b.scale));
  }
  if (a.scheme == Scheme::kSingleMod) {
    return {a.value + b.value, a.scheme, a.scale, nullptr};
  }
  if (!a.group_modulus || !b.group_modulus || *a.group_modulus != *b.group_modulus) {
    throw SchemeMismatchError("crypto", "Paillier ciphertexts under different public keys");
  }
  return {(a.value * b.value) % *a.group_modulus, a.scheme, a.scale, a.group_modulus};
}

/// SingleMod only: product of the underlying plaintexts mod w.
inline Ciphertext cipher_mul(const Ciphertext& a, const Ciphertext& b) {
  if (a.scheme == Scheme::kPaillier || b.scheme == Scheme::kPaillier) {
    throw UnsupportedOperationError("crypto", "Paillier is not multiplicatively homomorphic");
  }
  return {a.value * b.value, Scheme::kSingleMod, a.scale + b.scale, nullptr};
}

}  // namespace ppdo

#endif  // PPDO_CIPHERTEXT_HPP
