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

#ifndef PPDO_CODEC_HPP
#define PPDO_CODEC_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "ppdo/bigint.hpp"
#include "ppdo/error.hpp"

namespace ppdo {

/// Signed fixed-point map between reals and residues mod `modulus`.
///
/// A real r is scaled by 10^sigma and rounded half away from zero. Negative
/// integers live in the upper half of the residue range: residues in
/// [0, (M-1)/2] decode as themselves, residues in [(M+1)/2, M) as z - M.
class FixedPointCodec {
 public:
  FixedPointCodec(unsigned sigma, BigInt modulus)
      : sigma_(sigma), modulus_(std::move(modulus)), scale_(pow10_big(sigma)) {
    if (modulus_ <= 2 * scale_ || (modulus_ % 2) == 0) {
      throw ConfigError("crypto", "codec modulus must be odd and exceed 2*10^sigma");
    }
    half_ = (modulus_ - 1) / 2;
  }

  unsigned sigma() const { return sigma_; }
  const BigInt& modulus() const { return modulus_; }
  /// (M - 1) / 2, the largest representable integer magnitude.
  const BigInt& half_range() const { return half_; }

  /// Largest |r| that encodes without wrapping, as a double (rounded down).
  double max_magnitude() const {
    const BigInt whole = half_ / scale_;
    return whole.convert_to<double>();
  }

  BigInt encode(double r) const {
    if (!std::isfinite(r)) throw OverflowError("crypto", "cannot encode a non-finite value");
    const BigInt rounded = scale_decimal(r, sigma_);
    if (boost::multiprecision::abs(rounded) > half_) {
      throw OverflowError("crypto", "value " + std::to_string(r) +
                                        " exceeds the representable range at sigma = " +
                                        std::to_string(sigma_));
    }
    return rounded < 0 ? BigInt(modulus_ + rounded) : rounded;
  }

  /// Signed integer represented by residue z.
  BigInt to_signed(const BigInt& z) const {
    if (z < 0 || z >= modulus_) {
      throw ContractError("crypto", "residue outside [0, modulus)");
    }
    return z <= half_ ? z : BigInt(z - modulus_);
  }

  double decode(const BigInt& z) const { return signed_to_real(to_signed(z)); }

  /// Signed integer (in 10^-sigma units) back to a real.
  double signed_to_real(const BigInt& v) const {
    constexpr std::int64_t kExact = std::int64_t{1} << 53;
    if (sigma_ <= 22 && boost::multiprecision::abs(v) < kExact) {
      // Both operands exact in double: one correctly rounded division.
      return static_cast<double>(v.convert_to<std::int64_t>()) / pow10d(sigma_);
    }
    return static_cast<double>(v.convert_to<long double>() / pow10l(sigma_));
  }

 private:
  static long double pow10l(unsigned e) {
    long double p = 1.0L;
    for (unsigned i = 0; i < e; ++i) p *= 10.0L;
    return p;
  }

  static double pow10d(unsigned e) {
    double p = 1.0;
    for (unsigned i = 0; i < e; ++i) p *= 10.0;
    return p;
  }

  // round(10^sigma * r) half away from zero, evaluated exactly on the
  // shortest decimal form of r, so 1.2345 at sigma = 3 gives 1235.
  static BigInt scale_decimal(double r, unsigned sigma) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::scientific);
    const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
    const bool negative = text.front() == '-';
    const std::size_t e_pos = text.find('e');
    BigInt digits = 0;
    int num_digits = 0;
    for (char ch : text.substr(negative ? 1 : 0, e_pos - (negative ? 1 : 0))) {
      if (ch == '.') continue;
      digits = digits * 10 + (ch - '0');
      ++num_digits;
    }
    const int exponent = std::stoi(std::string(text.substr(e_pos + 1)));
    const int shift = exponent - (num_digits - 1) + static_cast<int>(sigma);
    BigInt out;
    if (shift >= 0) {
      out = digits * pow10_big(static_cast<unsigned>(shift));
    } else {
      const BigInt div = pow10_big(static_cast<unsigned>(-shift));
      out = digits / div;
      if (2 * (digits % div) >= div) out += 1;
    }
    return negative ? BigInt(-out) : out;
  }

  unsigned sigma_;
  BigInt modulus_;
  BigInt scale_;
  BigInt half_;
};

}  // namespace ppdo

#endif  // PPDO_CODEC_HPP
