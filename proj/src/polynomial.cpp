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
#include "confluxlab/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace confluxlab {

namespace {

__int128 abs128(__int128 x) { return x < 0 ? -x : x; }

__int128 gcd128(__int128 a, __int128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::string to_string128(__int128 x) {
    if (x == 0) return "0";
    bool neg = x < 0;
    std::string s;
    while (x != 0) {
        int digit = static_cast<int>(x % 10);
        s.insert(s.begin(), static_cast<char>('0' + (digit < 0 ? -digit : digit)));
        x /= 10;
    }
    return neg ? "-" + s : s;
}

}  // namespace

Rational::Rational(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    num_ = num;
    den_ = den;
}

long double Rational::to_long_double() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
}

std::string Rational::str() const {
    if (den_ == 1) return to_string128(num_);
    return to_string128(num_) + "/" + to_string128(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}

Rational operator-(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
}

Rational operator*(const Rational& a, const Rational& b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
}

Rational operator/(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_, a.den_ * b.num_};
}

Polynomial::Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
    while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

Polynomial Polynomial::interpolate(long long x0, std::span<const long long> values) {
    // Newton forward differences at unit spacing, expanded to monomials.
    std::size_t n = values.size();
    std::vector<Rational> diff(values.begin(), values.end());
    std::vector<Rational> newton;
    newton.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        newton.push_back(diff[0]);
        for (std::size_t i = 0; i + 1 < diff.size(); ++i) diff[i] = diff[i + 1] - diff[i];
        if (!diff.empty()) diff.pop_back();
    }
    // sum_k newton[k] * C(x - x0, k), with C(y, k) = prod_{i<k} (y - i) / k!
    std::vector<Rational> result(n, Rational{0});
    std::vector<Rational> basis{Rational{1}};  // polynomial in x for C(x - x0, k)
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < basis.size(); ++i) result[i] = result[i] + newton[k] * basis[i];
        // basis *= (x - x0 - k) / (k + 1)
        std::vector<Rational> next(basis.size() + 1, Rational{0});
        Rational shift{-static_cast<__int128>(x0) - static_cast<__int128>(k)};
        Rational scale{1, static_cast<__int128>(k + 1)};
        for (std::size_t i = 0; i < basis.size(); ++i) {
            next[i + 1] = next[i + 1] + basis[i] * scale;
            next[i] = next[i] + basis[i] * shift * scale;
        }
        basis = std::move(next);
    }
    return Polynomial(std::move(result));
}

Rational Polynomial::eval_exact(long long x) const {
    Rational acc{0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * Rational{x} + *it;
    return acc;
}

long double Polynomial::eval(long double x) const {
    long double acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + it->to_long_double();
    return acc;
}

std::string Polynomial::str(const std::string& var) const {
    if (coeffs_.empty()) return "0";
    std::string out;
    for (int k = degree(); k >= 0; --k) {
        const Rational& c = coeffs_[static_cast<std::size_t>(k)];
        if (c.is_zero()) continue;
        bool neg = c.num() < 0;
        Rational mag = neg ? Rational{-c.num(), c.den()} : c;
        if (out.empty()) {
            if (neg) out += "-";
        } else {
            out += neg ? " - " : " + ";
        }
        bool unit = mag.num() == 1 && mag.den() == 1;
        if (k == 0 || !unit) out += mag.str();
        if (k > 0) {
            if (!unit) out += "*";
            out += var;
            if (k > 1) out += "^" + std::to_string(k);
        }
    }
    return out;
}

Rational approximate_rational(double x, long long max_den) {
    // Continued-fraction convergents.
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int iter = 0; iter < 64; ++iter) {
        double a = std::floor(r);
        long long ai = static_cast<long long>(a);
        long long h2 = ai * h1 + h0;
        long long k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        double frac = r - a;
        if (std::fabs(frac) < 1e-12) break;
        r = 1.0 / frac;
    }
    if (k1 == 0) return Rational{static_cast<__int128>(std::llround(x))};
    return Rational{h1, k1};
}

}  // namespace confluxlab
