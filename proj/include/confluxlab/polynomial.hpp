/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace confluxlab {

/// Exact rational with 128-bit storage, always normalized (den > 0, gcd 1).
class Rational {
public:
    Rational() = default;
    Rational(__int128 num, __int128 den = 1);  // NOLINT(google-explicit-constructor)

    __int128 num() const { return num_; }
    __int128 den() const { return den_; }
    long double to_long_double() const;
    double to_double() const { return static_cast<double>(to_long_double()); }
    bool is_zero() const { return num_ == 0; }
    std::string str() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    __int128 num_ = 0;
    __int128 den_ = 1;
};

/// Univariate polynomial with rational coefficients, coeffs[k] multiplies x^k.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coeffs);

    /// Exact interpolation through (x0 + i, values[i]) for i = 0..n-1.
    static Polynomial interpolate(long long x0, std::span<const long long> values);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Rational>& coeffs() const { return coeffs_; }
    Rational leading() const { return coeffs_.empty() ? Rational{} : coeffs_.back(); }
    Rational eval_exact(long long x) const;
    long double eval(long double x) const;

    /// Human-readable form in the variable `var`, highest power first.
    std::string str(const std::string& var = "N") const;

private:
    void trim();
    std::vector<Rational> coeffs_;
};

/// Best rational approximation of x with denominator at most max_den.
Rational approximate_rational(double x, long long max_den = 1000);

}  // namespace confluxlab
