#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <stdexcept>
#include <string>

namespace ngp {

// Exact arbitrary-precision rational, GMP-backed.
using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

// Parses a decimal-free "p/q" (or "p") string into a canonical rational.
// mpq string construction does not reduce, so we go through a division.
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_rat: empty string");
    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/'))
            throw std::invalid_argument("parse_rat: invalid character in \"" + s + "\"");
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rat: zero denominator in \"" + s + "\"");
    return Rat(num) / Rat(den);
}

// Canonical "p/q" rendering; denominator 1 is omitted.
inline std::string rat_str(const Rat& r) { return r.str(); }

inline Int factorial(int n) {
    Int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline Int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Int b = 1;
    for (int j = 0; j < k; ++j) { b *= (n - j); b /= (j + 1); }
    return b;
}

}  // namespace ngp
