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

#ifndef PPDO_BIGINT_HPP
#define PPDO_BIGINT_HPP

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/miller_rabin.hpp>

#include <cstdint>
#include <random>
#include <string>

#include "ppdo/error.hpp"

namespace ppdo {

using BigInt = boost::multiprecision::mpz_int;

inline BigInt pow10_big(unsigned exponent) {
  return boost::multiprecision::pow(BigInt(10), exponent);
}

inline std::string to_decimal(const BigInt& v) { return v.str(); }

inline BigInt from_decimal(const std::string& s) {
  if (s.empty()) throw ConfigError("crypto", "empty integer literal");
  std::size_t start = s[0] == '-' ? 1 : 0;
  if (start == s.size()) throw ConfigError("crypto", "malformed integer literal '" + s + "'");
  for (std::size_t i = start; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') {
      throw ConfigError("crypto", "malformed integer literal '" + s + "'");
    }
  }
  return BigInt(s);
}

/// Uniform integer with exactly the given number of random low bits
/// (top bit not forced). Draws whole 64-bit words from the generator.
template <class Rng>
BigInt random_bits(Rng& rng, unsigned bits) {
  std::uniform_int_distribution<std::uint64_t> word;
  BigInt out = 0;
  unsigned remaining = bits;
  while (remaining > 0) {
    const unsigned take = remaining >= 64 ? 64 : remaining;
    std::uint64_t w = word(rng);
    if (take < 64) w &= (std::uint64_t{1} << take) - 1;
    out <<= take;
    out += w;
    remaining -= take;
  }
  return out;
}

/// Uniform on [0, bound) by rejection.
template <class Rng>
BigInt random_below(Rng& rng, const BigInt& bound) {
  if (bound <= 0) throw ContractError("crypto", "random_below needs a positive bound");
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
  for (;;) {
    BigInt candidate = random_bits(rng, bits);
    if (candidate < bound) return candidate;
  }
}

/// Miller-Rabin with 40 rounds: error probability below 2^-80.
inline bool is_probable_prime(const BigInt& n) {
  if (n < 2) return false;
  std::mt19937_64 bases(0x5eedULL);
  return boost::multiprecision::miller_rabin_test(n, 40, bases);
}

/// Random prime of exactly `bits` bits. `top_bits` leading bits are forced to
/// one so that products of two such primes keep their full length.
template <class Rng>
BigInt random_prime(Rng& rng, unsigned bits, unsigned top_bits = 1) {
  if (bits < 2) throw ConfigError("crypto", "prime bit length must be at least 2");
  for (;;) {
    BigInt candidate = random_bits(rng, bits);
    for (unsigned t = 0; t < top_bits && t < bits; ++t) {
      boost::multiprecision::bit_set(candidate, bits - 1 - t);
    }
    boost::multiprecision::bit_set(candidate, 0);
    if (is_probable_prime(candidate)) return candidate;
  }
}

/// Inverse of a modulo m, or ContractError if gcd(a, m) != 1.
inline BigInt mod_inverse(const BigInt& a, const BigInt& m) {
  BigInt old_r = a % m, r = m;
  if (old_r < 0) old_r += m;
  BigInt old_s = 1, s = 0;
  while (r != 0) {
    const BigInt q = old_r / r;
    BigInt tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) throw ContractError("crypto", "value is not invertible modulo m");
  BigInt inv = old_s % m;
  if (inv < 0) inv += m;
  return inv;
}

inline unsigned bit_length(const BigInt& v) {
  return v == 0 ? 0 : static_cast<unsigned>(boost::multiprecision::msb(v)) + 1;
}

}  // namespace ppdo

#endif  // PPDO_BIGINT_HPP
