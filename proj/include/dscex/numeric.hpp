#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dscex {

using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

/// Complex number with exact rational parts.
struct ExactComplex {
    Rational re{0};
    Rational im{0};

    ExactComplex() = default;
    ExactComplex(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
    ExactComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    ExactComplex(int r) : re(r) {}  // NOLINT(google-explicit-constructor)

    /// Exact conversion; every finite double is a dyadic rational.
    static ExactComplex from(Complex z);

    [[nodiscard]] Complex to_complex() const;
    [[nodiscard]] bool is_zero() const { return re == 0 && im == 0; }
    [[nodiscard]] ExactComplex conj() const { return {re, -im}; }
    [[nodiscard]] Rational norm_squared() const { return re * re + im * im; }

    ExactComplex& operator+=(const ExactComplex& o);
    ExactComplex& operator-=(const ExactComplex& o);
    ExactComplex& operator*=(const ExactComplex& o);
    ExactComplex& operator*=(const Rational& s);
    ExactComplex& operator/=(const Rational& s);

    friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
    friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
    friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
    friend ExactComplex operator*(ExactComplex a, const Rational& s) { return a *= s; }
    friend ExactComplex operator/(ExactComplex a, const Rational& s) { return a /= s; }
    friend ExactComplex operator-(const ExactComplex& a) { return {-a.re, -a.im}; }
    friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
        return a.re == b.re && a.im == b.im;
    }
};

/// Real part of a / b; b must be nonzero.
Rational real_of_quotient(const ExactComplex& a, const ExactComplex& b);
ExactComplex divide(const ExactComplex& a, const ExactComplex& b);

/// Exact conversion of a finite double. Throws std::domain_error on NaN/inf.
Rational exact_rational(double x);

/// Parses "3", "-2/7", "0.125", "1e-3", "2.5E2". Decimal input is read exactly.
Rational parse_rational(std::string_view text);

/// Parses "1", "i", "-i", "2i", "1+2i", "3/4-1/2i", "0.5+0.25i".
ExactComplex parse_complex(std::string_view text);

/// "p/q", or "p" for integers.
std::string format_rational(const Rational& r);
/// "re", "re+imi" or "re-imi" using format_rational.
std::string format_complex(const ExactComplex& z);
/// 17 significant digits, round-trippable; "inf" for +infinity.
std::string format_double(double x);

inline std::ostream& operator<<(std::ostream& os, const ExactComplex& z) { return os << format_complex(z); }

/// Neumaier compensated accumulator (ascending order of add() calls is the summation order).
class CompensatedSum {
public:
    void add(double x);
    [[nodiscard]] double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(Complex z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    [[nodiscard]] Complex value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

}  // namespace dscex
