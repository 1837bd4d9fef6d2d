// rational.h
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

#ifndef PERSEL_RATIONAL_H_
#define PERSEL_RATIONAL_H_

#include <compare>
#include <cstdint>
#include <string>

namespace persel {

// Non-negative exact fraction. The numerator/denominator pair is kept as
// given (not reduced), so an error rate still shows its raw counts;
// comparison and equality are by value.
class Rational {
 public:
  // Throws Error(kUndefinedRate) when denominator is zero.
  Rational(std::uint64_t numerator, std::uint64_t denominator);

  std::uint64_t numerator() const { return num_; }
  std::uint64_t denominator() const { return den_; }

  double ToDouble() const;

  // Fixed-point rendering with `places` decimals, rounding half to even.
  // Computed in integer arithmetic, so it never suffers binary rounding.
  std::string ToDecimal(int places) const;

  // Same value with numerator and denominator divided by their gcd.
  Rational Reduced() const;

  friend bool operator==(const Rational &a, const Rational &b);
  friend std::strong_ordering operator<=>(const Rational &a,
                                          const Rational &b);
  friend Rational operator+(const Rational &a, const Rational &b);
  friend Rational operator*(const Rational &a, const Rational &b);

 private:
  std::uint64_t num_;
  std::uint64_t den_;
};

}  // namespace persel

#endif  // PERSEL_RATIONAL_H_
