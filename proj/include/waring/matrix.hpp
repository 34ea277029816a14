#pragma once

#include <initializer_list>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "waring/complex.hpp"
#include "waring/errors.hpp"
#include "waring/rational.hpp"
#include "waring/tolerance.hpp"

namespace waring {

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<GaussianRational> {
    static constexpr bool exact = true;
    using Mag = Rational;
    static Mag mag(const GaussianRational& z) { return z.mag(); }
    static GaussianRational make(const GaussianRational&, long v) { return GaussianRational(v); }
    static GaussianRational from_rational(const GaussianRational&, const Rational& q) {
        return GaussianRational(q);
    }
};

template <>
struct scalar_traits<Complex> {
    static constexpr bool exact = false;
    using Mag = Real;
    static Mag mag(const Complex& z) { return z.abs(); }
    static Complex make(const Complex& proto, long v) { return Complex(v, proto.prec()); }
    static Complex from_rational(const Complex& proto, const Rational& q) {
        return Complex(q, proto.prec());
    }
};

/// Dense matrix over an exact (GaussianRational) or approximate (Complex)
/// scalar. Square in all public contracts; rectangular blocks are supported
/// for internal partitioning.
template <class S>
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const S& fill)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix zeros(std::size_t rows, std::size_t cols, const S& proto) {
        return Matrix(rows, cols, scalar_traits<S>::make(proto, 0));
    }
    static Matrix identity(std::size_t n, const S& proto) {
        Matrix m = zeros(n, n, proto);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = scalar_traits<S>::make(proto, 1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t n() const {
        if (rows_ != cols_) throw DimensionMismatch("matrix is not square");
        return rows_;
    }
    bool is_square() const { return rows_ == cols_; }

    S& at(std::size_t i, std::size_t j) {
        check(i, j);
        return data_[i * cols_ + j];
    }
    const S& at(std::size_t i, std::size_t j) const {
        check(i, j);
        return data_[i * cols_ + j];
    }

    const S& proto() const {
        if (data_.empty()) throw InternalError("proto() on empty matrix");
        return data_[0];
    }

    std::vector<S> row(std::size_t i) const {
        std::vector<S> r;
        r.reserve(cols_);
        for (std::size_t j = 0; j < cols_; ++j) r.push_back(at(i, j));
        return r;
    }
    void set_row(std::size_t i, const std::vector<S>& v) {
        if (v.size() != cols_) throw DimensionMismatch("set_row size");
        for (std::size_t j = 0; j < cols_; ++j) at(i, j) = v[j];
    }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
        if (r0 + h > rows_ || c0 + w > cols_) throw IndexOutOfRange("block out of range");
        Matrix b(h, w, scalar_traits<S>::make(proto(), 0));
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) b.at(i, j) = at(r0 + i, c0 + j);
        return b;
    }
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
        if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw IndexOutOfRange("set_block");
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) at(r0 + i, c0 + j) = b.at(i, j);
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        a.same_shape(b);
        Matrix r = a;
        for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] += b.data_[i];
        return r;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        a.same_shape(b);
        Matrix r = a;
        for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] -= b.data_[i];
        return r;
    }
    friend Matrix operator-(const Matrix& a) {
        Matrix r = a;
        for (auto& x : r.data_) x = -x;
        return r;
    }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape");
        Matrix r = zeros(a.rows_, b.cols_, a.data_.empty() ? b.proto() : a.proto());
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const S& aik = a.at(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) r.at(i, j) += aik * b.at(k, j);
            }
        return r;
    }
    friend Matrix operator*(const S& s, const Matrix& a) {
        Matrix r = a;
        for (auto& x : r.data_) x = s * x;
        return r;
    }

    Matrix pow(unsigned long e) const {
        std::size_t nn = n();
        Matrix acc = identity(nn, proto());
        Matrix base = *this;
        while (e > 0) {
            if (e & 1) acc = acc * base;
            base = (e >>= 1) ? base * base : base;
        }
        return acc;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            if (!(a.data_[i] == b.data_[i])) return false;
        return true;
    }

    /// Largest entry magnitude.
    typename scalar_traits<S>::Mag max_abs() const {
        using T = scalar_traits<S>;
        typename T::Mag m = T::mag(scalar_traits<S>::make(proto(), 0));
        for (const auto& x : data_) {
            auto v = T::mag(x);
            if (m < v) m = v;
        }
        return m;
    }

    /// Operator infinity norm: max absolute row sum.
    typename scalar_traits<S>::Mag norm_inf() const {
        using T = scalar_traits<S>;
        typename T::Mag m = T::mag(scalar_traits<S>::make(proto(), 0));
        for (std::size_t i = 0; i < rows_; ++i) {
            auto s = T::mag(scalar_traits<S>::make(proto(), 0));
            for (std::size_t j = 0; j < cols_; ++j) s += T::mag(at(i, j));
            if (m < s) m = s;
        }
        return m;
    }

  private:
    void check(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw IndexOutOfRange("matrix index out of range");
    }
    void same_shape(const Matrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_) throw DimensionMismatch("matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<S> data_;
};

using QMat = Matrix<GaussianRational>;
using CMat = Matrix<Complex>;

inline Complex to_complex(const GaussianRational& q, mpfr_prec_t prec) { return Complex(q, prec); }

inline CMat to_complex(const QMat& m, mpfr_prec_t prec) {
    CMat r(m.rows(), m.cols(), Complex(prec));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r.at(i, j) = Complex(m.at(i, j), prec);
    return r;
}

/// Builds a QMat from integer entries written row-major.
inline QMat qmat_from_ints(std::size_t n, std::initializer_list<long> entries) {
    if (entries.size() != n * n) throw DimensionMismatch("qmat_from_ints size");
    QMat m(n, n, GaussianRational(0));
    auto it = entries.begin();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m.at(i, j) = GaussianRational(*it++);
    return m;
}

} // namespace waring
