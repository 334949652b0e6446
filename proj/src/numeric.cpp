#include "dscex/numeric.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dscex {

Rational exact_rational(double x) {
    if (!std::isfinite(x)) throw std::domain_error("cannot represent non-finite value as a rational");
    return Rational(x);
}

ExactComplex ExactComplex::from(Complex z) {
    return {exact_rational(z.real()), exact_rational(z.imag())};
}

Complex ExactComplex::to_complex() const {
    return {re.convert_to<double>(), im.convert_to<double>()};
}

ExactComplex& ExactComplex::operator+=(const ExactComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
}

ExactComplex& ExactComplex::operator-=(const ExactComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
}

ExactComplex& ExactComplex::operator*=(const ExactComplex& o) {
    if (o.im == 0) return *this *= o.re;
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

ExactComplex& ExactComplex::operator*=(const Rational& s) {
    re *= s;
    if (im != 0) im *= s;
    return *this;
}

ExactComplex& ExactComplex::operator/=(const Rational& s) {
    if (s == 0) throw std::domain_error("division by zero");
    re /= s;
    if (im != 0) im /= s;
    return *this;
}

ExactComplex divide(const ExactComplex& a, const ExactComplex& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    if (b.im == 0) return a / b.re;
    return (a * b.conj()) / b.norm_squared();
}

Rational real_of_quotient(const ExactComplex& a, const ExactComplex& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    if (b.im == 0) return a.re / b.re;
    return (a.re * b.re + a.im * b.im) / b.norm_squared();
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_number(std::string_view text) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view text) {
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    boost::multiprecision::cpp_int digits = 0;
    long long scale = 0;
    bool any_digit = false;
    bool seen_point = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = digits * 10 + (c - '0');
            if (seen_point) --scale;
            any_digit = true;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) bad_number(text);
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') bad_number(text);
        std::string exponent(s.substr(i + 1));
        if (exponent.empty()) bad_number(text);
        std::size_t used = 0;
        long long e = 0;
        try {
            e = std::stoll(exponent, &used);
        } catch (const std::exception&) {
            bad_number(text);
        }
        if (used != exponent.size() || e > 4000 || e < -4000) bad_number(text);
        scale += e;
    }
    Rational value(digits);
    boost::multiprecision::cpp_int ten_power = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                          static_cast<unsigned>(scale < 0 ? -scale : scale));
    if (scale < 0) {
        value /= Rational(ten_power);
    } else {
        value *= Rational(ten_power);
    }
    return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) bad_number(text);
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return parse_decimal(s);
    Rational num = parse_decimal(trim(s.substr(0, slash)));
    Rational den = parse_decimal(trim(s.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
    return num / den;
}

ExactComplex parse_complex(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) bad_number(text);
    if (s.back() != 'i') return {parse_rational(s), 0};
    std::string_view body = s.substr(0, s.size() - 1);
    // split at the last sign that is not at the start and not part of an exponent
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        char c = body[k];
        if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string_view real_part = split == std::string_view::npos ? std::string_view{} : body.substr(0, split);
    std::string_view imag_part = split == std::string_view::npos ? body : body.substr(split);
    imag_part = trim(imag_part);
    Rational imag;
    if (imag_part.empty() || imag_part == "+") {
        imag = 1;
    } else if (imag_part == "-") {
        imag = -1;
    } else {
        imag = parse_rational(imag_part);
    }
    Rational real = real_part.empty() ? Rational(0) : parse_rational(real_part);
    return {real, imag};
}

std::string format_rational(const Rational& r) { return r.str(); }

std::string format_complex(const ExactComplex& z) {
    if (z.im == 0) return format_rational(z.re);
    std::string out;
    if (z.re != 0) out = format_rational(z.re);
    if (z.im > 0 && !out.empty()) out += '+';
    out += format_rational(z.im);
    out += 'i';
    return out;
}

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";  // avoids "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CompensatedSum::add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

}  // namespace dscex
