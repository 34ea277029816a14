#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "waring/errors.hpp"

namespace waring {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline Integer ceil_rational(const Rational& q) {
    Integer num = numerator(q);
    Integer den = denominator(q); // canonical: den > 0
    Integer t = num / den;        // truncated toward zero
    if (num > 0 && num % den != 0) ++t;
    return t;
}

inline Integer floor_rational(const Rational& q) {
    Integer num = numerator(q);
    Integer den = denominator(q);
    Integer t = num / den;
    if (num < 0 && num % den != 0) --t;
    return t;
}

/// Exact complex scalar over the rationals: re + im*i. Equality is exact,
/// components are kept in lowest terms by the underlying mpq representation.
struct GaussianRational {
    Rational re;
    Rational im;

    GaussianRational() = default;
    GaussianRational(long r) : re(r) {}
    GaussianRational(Rational r) : re(std::move(r)) {}
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    GaussianRational conj() const { return {re, -im}; }

    /// |z|^2 = re^2 + im^2, exact.
    Rational norm() const { return re * re + im * im; }

    /// |re| + |im|; an exactly computable magnitude with
    /// |z| <= mag(z) <= sqrt(2)|z|, used for pivot selection and norms.
    Rational mag() const { return abs(re) + abs(im); }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        Rational n = b.norm();
        if (n == 0) throw Singular("division by zero GaussianRational");
        GaussianRational p = a * b.conj();
        return {p.re / n, p.im / n};
    }
    GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
    GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
    GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
    GaussianRational& operator/=(const GaussianRational& b) { return *this = *this / b; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
};

inline GaussianRational gaussian_i() { return {Rational(0), Rational(1)}; }

namespace detail {

inline std::string rational_to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) {
        s += "/";
        s += denominator(q).str();
    }
    return s;
}

struct RatScanner {
    std::string_view text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("invalid scalar '" + std::string(text) + "': " + what, 1, pos + 1);
    }

    int take_sign() {
        if (!done() && (peek() == '+' || peek() == '-')) {
            int s = peek() == '-' ? -1 : 1;
            ++pos;
            return s;
        }
        return 1;
    }

    Integer take_digits() {
        std::size_t start = pos;
        while (!done() && peek() >= '0' && peek() <= '9') ++pos;
        if (pos == start) fail("expected digits");
        return Integer(std::string(text.substr(start, pos - start)));
    }

    // digits[/digits], no sign
    Rational take_rational() {
        Integer num = take_digits();
        if (!done() && peek() == '/') {
            ++pos;
            Integer den = take_digits();
            if (den == 0) fail("zero denominator");
            return Rational(num, den);
        }
        return Rational(num);
    }
};

} // namespace detail

/// Text format: `a/b+c/di` with optional signs and omitted parts defaulting
/// to zero, e.g. `3`, `-1/2i`, `2+1i`, `1/2+3i`. A bare `i` (with optional
/// sign) is accepted as coefficient 1. Printing is canonical and parse/print
/// round-trips bit-exactly.
inline GaussianRational parse_gaussian_rational(std::string_view text) {
    detail::RatScanner sc{text};
    if (sc.done()) sc.fail("empty");

    auto take_term = [&](bool sign_required) -> std::pair<Rational, bool> {
        int sign = 1;
        if (sign_required) {
            if (sc.done() || (sc.peek() != '+' && sc.peek() != '-')) sc.fail("expected sign");
            sign = sc.take_sign();
        } else {
            sign = sc.take_sign();
        }
        if (!sc.done() && sc.peek() == 'i') {
            ++sc.pos;
            return {Rational(sign), true};
        }
        Rational q = sc.take_rational();
        bool imag = false;
        if (!sc.done() && sc.peek() == 'i') {
            ++sc.pos;
            imag = true;
        }
        if (sign < 0) q = -q;
        return {q, imag};
    };

    auto [first, first_imag] = take_term(false);
    if (sc.done()) {
        return first_imag ? GaussianRational(Rational(0), first) : GaussianRational(first);
    }
    if (first_imag) sc.fail("real part must precede imaginary part");
    auto [second, second_imag] = take_term(true);
    if (!second_imag) sc.fail("second term must be imaginary");
    if (!sc.done()) sc.fail("trailing characters");
    return {first, second};
}

inline std::string to_string(const GaussianRational& z) {
    if (z.im == 0) return detail::rational_to_string(z.re);
    std::string imag = detail::rational_to_string(abs(z.im)) + "i";
    if (z.re == 0) return (z.im < 0 ? "-" : "") + imag;
    return detail::rational_to_string(z.re) + (z.im < 0 ? "-" : "+") + imag;
}

} // namespace waring
