#pragma once

#include <string>
#include <utility>

#include "waring/rational.hpp"
#include "waring/real.hpp"

namespace waring {

/// Arbitrary-precision complex value. Both components share one precision.
class Complex {
  public:
    explicit Complex(mpfr_prec_t prec = 64) : re_(prec), im_(prec) {}
    Complex(Real re, Real im) : re_(std::move(re)), im_(std::move(im)) {}
    Complex(long value, mpfr_prec_t prec) : re_(value, prec), im_(prec) {}
    Complex(const Rational& q, mpfr_prec_t prec) : re_(q, prec), im_(prec) {}
    Complex(const GaussianRational& q, mpfr_prec_t prec) : re_(q.re, prec), im_(q.im, prec) {}
    Complex(const Integer& z, mpfr_prec_t prec) : re_(z, prec), im_(prec) {}

    const Real& real() const { return re_; }
    const Real& imag() const { return im_; }
    mpfr_prec_t prec() const { return std::max(re_.prec(), im_.prec()); }

    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

    Complex conj() const { return {re_, -im_}; }
    Real abs() const { return hypot(re_, im_); }
    /// |re| + |im|; cheap magnitude used alongside abs() for bounds.
    Real mag1() const { return re_.abs() + im_.abs(); }

    friend Complex operator+(const Complex& a, const Complex& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend Complex operator-(const Complex& a, const Complex& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend Complex operator-(const Complex& a) { return {-a.re_, -a.im_}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        Real n = b.re_ * b.re_ + b.im_ * b.im_;
        Complex p = a * b.conj();
        return {p.re_ / n, p.im_ / n};
    }
    Complex& operator+=(const Complex& b) { return *this = *this + b; }
    Complex& operator-=(const Complex& b) { return *this = *this - b; }
    Complex& operator*=(const Complex& b) { return *this = *this * b; }
    Complex& operator/=(const Complex& b) { return *this = *this / b; }

    friend bool operator==(const Complex& a, const Complex& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    Complex pow_ui(unsigned long e) const {
        Complex acc(1, prec());
        Complex base = *this;
        while (e > 0) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }

    std::string to_string(std::size_t digits = 0) const {
        std::string r = re_.to_decimal_string(digits);
        std::string i = im_.abs().to_decimal_string(digits);
        if (im_.is_zero()) return r;
        if (re_.is_zero()) return (im_.sign() < 0 ? "-" : "") + i + "i";
        return r + (im_.sign() < 0 ? "-" : "+") + i + "i";
    }

  private:
    Real re_;
    Real im_;
};

/// Principal k-th root: for z = r e^{i t} with t in (-pi, pi], returns
/// r^{1/k} e^{i t/k}, so the argument of the result lies in (-pi/k, pi/k].
/// The root of 0 is 0.
inline Complex kth_root_scalar(const Complex& z, unsigned long k) {
    if (k == 0) throw PreconditionViolated("kth_root_scalar: k must be >= 1");
    if (z.is_zero()) return Complex(z.prec());
    if (k == 1) return z;
    mpfr_prec_t p = z.prec();
    Real r = z.abs().rootn(k);
    // Normalize a signed zero imaginary part so that negative reals take the
    // upper branch: atan2(+0, x<0) = +pi.
    Real im = z.imag();
    if (im.is_zero()) im = Real(0, p);
    Real theta = atan2(im, z.real()) / Real(static_cast<long>(k), p);
    return {r * cos(theta), r * sin(theta)};
}

} // namespace waring
