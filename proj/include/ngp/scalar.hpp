#pragma once

#include "ngp/rational.hpp"

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace ngp {

// Gaussian rational a + b*i with exact arithmetic. Equality is exact; there is
// no tolerance anywhere in this library.
struct Scalar {
    Rat re{0};
    Rat im{0};

    Scalar() = default;
    Scalar(int n) : re(n) {}  // NOLINT: implicit by design, mirrors numeric literals
    Scalar(Rat r) : re(std::move(r)) {}
    Scalar(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

    static Scalar I() { return Scalar(Rat(0), Rat(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    Scalar conj() const { return Scalar(re, -im); }
    // |s|^2, a nonnegative rational.
    Rat abs2() const { return re * re + im * im; }

    Scalar operator-() const { return Scalar(-re, -im); }

    Scalar& operator+=(const Scalar& o) { re += o.re; im += o.im; return *this; }
    Scalar& operator-=(const Scalar& o) { re -= o.re; im -= o.im; return *this; }
    Scalar& operator*=(const Scalar& o) {
        Rat r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = std::move(r);
        return *this;
    }
    Scalar& operator/=(const Scalar& o) {
        Rat d = o.abs2();
        if (d == 0) throw std::domain_error("Scalar: division by zero");
        Rat r = (re * o.re + im * o.im) / d;
        im = (im * o.re - re * o.im) / d;
        re = std::move(r);
        return *this;
    }

    friend Scalar operator+(Scalar a, const Scalar& b) { a += b; return a; }
    friend Scalar operator-(Scalar a, const Scalar& b) { a -= b; return a; }
    friend Scalar operator*(Scalar a, const Scalar& b) { a *= b; return a; }
    friend Scalar operator/(Scalar a, const Scalar& b) { a /= b; return a; }
    friend bool operator==(const Scalar& a, const Scalar& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    std::string str() const {
        if (im == 0) return rat_str(re);
        std::string s = rat_str(re);
        s += (im > 0 ? "+" : "-");
        Rat a = im > 0 ? im : Rat(-im);
        s += rat_str(a);
        s += "i";
        return s;
    }
};

inline Scalar conj(const Scalar& s) { return s.conj(); }
inline Rat real(const Scalar& s) { return s.re; }
inline Rat imag(const Scalar& s) { return s.im; }
inline Rat abs2(const Scalar& s) { return s.abs2(); }

inline std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

inline Scalar rat_pow(const Scalar& base, int e) {
    Scalar r(1);
    Scalar b = base;
    int k = e;
    if (k < 0) { b = Scalar(1) / b; k = -k; }
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

}  // namespace ngp

namespace Eigen {

// Just enough numeric-trait glue for dense Matrix<ngp::Scalar> containers;
// all elimination is done by ngp::linalg with exact pivots.
template <>
struct NumTraits<ngp::Scalar> {
    using Real = ngp::Rat;
    using NonInteger = ngp::Scalar;
    using Literal = ngp::Scalar;
    using Nested = ngp::Scalar;
    enum {
        IsComplex = 1,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 4,
        AddCost = 20,
        MulCost = 40,
    };
    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }
};

}  // namespace Eigen
