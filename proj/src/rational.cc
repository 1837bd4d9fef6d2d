// rational.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The persel Authors. All Rights Reserved.

#include "persel/rational.h"

#include <numeric>

#include "persel/error.h"

namespace persel {
namespace {

using u128 = unsigned __int128;

std::string U128ToString(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return out;
}

u128 Gcd(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::uint64_t Narrow(u128 v) {
  if (v > static_cast<u128>(UINT64_MAX)) {
    throw Error(ErrorCode::kInvalidConfig, "rational overflow");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

Rational::Rational(std::uint64_t numerator, std::uint64_t denominator)
    : num_(numerator), den_(denominator) {
  if (den_ == 0) {
    throw Error(ErrorCode::kUndefinedRate, "zero denominator");
  }
}

double Rational::ToDouble() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::ToDecimal(int places) const {
  if (places < 0 || places > 18) {
    throw Error(ErrorCode::kInvalidConfig,
                "decimal places out of range: " + std::to_string(places));
  }
  u128 scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const u128 scaled = static_cast<u128>(num_) * scale;
  u128 q = scaled / den_;
  const u128 r = scaled % den_;
  const u128 twice = r * 2;
  if (twice > den_ || (twice == den_ && (q & 1) != 0)) ++q;

  std::string digits = U128ToString(q);
  if (places == 0) return digits;
  if (digits.size() <= static_cast<std::size_t>(places)) {
    digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  return digits;
}

Rational Rational::Reduced() const {
  const std::uint64_t g = std::gcd(num_, den_);
  if (g <= 1) return *this;
  return Rational(num_ / g, den_ / g);
}

bool operator==(const Rational &a, const Rational &b) {
  return static_cast<u128>(a.num_) * b.den_ ==
         static_cast<u128>(b.num_) * a.den_;
}

std::strong_ordering operator<=>(const Rational &a, const Rational &b) {
  const u128 lhs = static_cast<u128>(a.num_) * b.den_;
  const u128 rhs = static_cast<u128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational operator+(const Rational &a, const Rational &b) {
  const u128 num = static_cast<u128>(a.num_) * b.den_ +
                   static_cast<u128>(b.num_) * a.den_;
  const u128 den = static_cast<u128>(a.den_) * b.den_;
  const u128 g = Gcd(num, den);
  return Rational(Narrow(num / g), Narrow(den / g));
}

Rational operator*(const Rational &a, const Rational &b) {
  const u128 num = static_cast<u128>(a.num_) * b.num_;
  const u128 den = static_cast<u128>(a.den_) * b.den_;
  const u128 g = num == 0 ? den : Gcd(num, den);
  return Rational(Narrow(num / g), Narrow(den / g));
}

}  // namespace persel
