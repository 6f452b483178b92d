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

#ifndef PPDO_PAILLIER_HPP
#define PPDO_PAILLIER_HPP

#include <memory>
#include <optional>
#include <string>

#include "ppdo/bigint.hpp"
#include "ppdo/ciphertext.hpp"
#include "ppdo/error.hpp"

namespace ppdo {

inline constexpr unsigned kPaillierMinBits = 512;

struct PaillierPublicKey {
  BigInt n;
  BigInt g;  // always n + 1 for generated keys
  std::shared_ptr<const BigInt> n_squared;

  static PaillierPublicKey from_modulus(BigInt n, BigInt g) {
    auto nn = std::make_shared<const BigInt>(n * n);
    return {std::move(n), std::move(g), std::move(nn)};
  }
};

/// Factors of n, kept when the key was generated locally. Lets powers mod
/// n^2 be taken mod p^2 and q^2 separately.
struct PaillierFactors {
  BigInt p_squared;
  BigInt q_squared;
  BigInt q_squared_inv;  // (q^2)^-1 mod p^2

  static PaillierFactors from_primes(const BigInt& p, const BigInt& q) {
    PaillierFactors f{p * p, q * q, 0};
    f.q_squared_inv = mod_inverse(f.q_squared, f.p_squared);
    return f;
  }

  /// base^exp mod n^2 by CRT.
  BigInt powm(const BigInt& base, const BigInt& exp) const {
    const BigInt a = boost::multiprecision::powm(BigInt(base % p_squared), exp, p_squared);
    const BigInt b = boost::multiprecision::powm(BigInt(base % q_squared), exp, q_squared);
    BigInt t = ((a - b) * q_squared_inv) % p_squared;
    if (t < 0) t += p_squared;
    return b + q_squared * t;
  }
};

struct PaillierPrivateKey {
  BigInt lambda;  // lcm(p - 1, q - 1)
  BigInt mu;      // (L(g^lambda mod n^2))^-1 mod n
  std::optional<PaillierFactors> factors;
};

struct PaillierKeyPair {
  PaillierPublicKey pub;
  PaillierPrivateKey priv;
};

namespace detail {

inline BigInt paillier_l(const BigInt& u, const BigInt& n) { return (u - 1) / n; }

inline PaillierPrivateKey paillier_private(const PaillierPublicKey& pub, const BigInt& lambda) {
  const BigInt u = boost::multiprecision::powm(pub.g, lambda, *pub.n_squared);
  return {lambda, mod_inverse(paillier_l(u, pub.n), pub.n), std::nullopt};
}

}  // namespace detail

template <class Rng>
PaillierKeyPair paillier_keygen(unsigned bits, Rng& rng) {
  if (bits < kPaillierMinBits) {
    throw ConfigError("crypto", "Paillier modulus needs at least " +
                                    std::to_string(kPaillierMinBits) + " bits, got " +
                                    std::to_string(bits));
  }
  const unsigned half = bits / 2;
  for (;;) {
    const BigInt p = random_prime(rng, half, 2);
    const BigInt q = random_prime(rng, bits - half, 2);
    if (p == q) continue;
    BigInt n = p * q;
    const BigInt pm = p - 1, qm = q - 1;
    if (boost::multiprecision::gcd(n, pm * qm) != 1) continue;
    const BigInt lambda = boost::multiprecision::lcm(pm, qm);
    PaillierPublicKey pub = PaillierPublicKey::from_modulus(n, n + 1);
    PaillierPrivateKey priv = detail::paillier_private(pub, lambda);
    priv.factors = PaillierFactors::from_primes(p, q);
    return {std::move(pub), std::move(priv)};
  }
}

namespace detail {

template <class Rng>
Ciphertext paillier_encrypt_with(const PaillierPublicKey& pub, const BigInt& z, Rng& rng,
                                 const PaillierFactors* factors) {
  if (z < 0 || z >= pub.n) throw ContractError("crypto", "Paillier plaintext outside [0, n)");
  const BigInt& nn = *pub.n_squared;
  BigInt r;
  do {
    r = random_below(rng, pub.n);
  } while (r == 0 || boost::multiprecision::gcd(r, pub.n) != 1);
  auto power = [&](const BigInt& base, const BigInt& exp) {
    return factors ? factors->powm(base, exp) : BigInt(boost::multiprecision::powm(base, exp, nn));
  };
  const BigInt gz = pub.g == pub.n + 1 ? BigInt((1 + z * pub.n) % nn) : power(pub.g, z);
  const BigInt rn = power(r, pub.n);
  return {BigInt((gz * rn) % nn), Scheme::kPaillier, 1, pub.n_squared};
}

}  // namespace detail

/// Encryption with the public key alone.
template <class Rng>
Ciphertext paillier_encrypt(const PaillierPublicKey& pub, const BigInt& z, Rng& rng) {
  return detail::paillier_encrypt_with(pub, z, rng, nullptr);
}

/// Same ciphertext as the public-key path, computed faster when the factors
/// of n are known.
template <class Rng>
Ciphertext paillier_encrypt(const PaillierKeyPair& key, const BigInt& z, Rng& rng) {
  return detail::paillier_encrypt_with(key.pub, z, rng,
                                       key.priv.factors ? &*key.priv.factors : nullptr);
}

inline BigInt paillier_decrypt(const PaillierKeyPair& key, const Ciphertext& ct) {
  if (ct.scheme != Scheme::kPaillier) {
    throw SchemeMismatchError("crypto", "Paillier key cannot decrypt a SingleMod ciphertext");
  }
  const BigInt& nn = *key.pub.n_squared;
  if (ct.value <= 0 || ct.value >= nn) {
    throw ContractError("crypto", "Paillier ciphertext outside (0, n^2)");
  }
  const BigInt u = key.priv.factors ? key.priv.factors->powm(ct.value, key.priv.lambda)
                                    : BigInt(boost::multiprecision::powm(ct.value, key.priv.lambda, nn));
  return BigInt((detail::paillier_l(u, key.pub.n) * key.priv.mu) % key.pub.n);
}

}  // namespace ppdo

#endif  // PPDO_PAILLIER_HPP
