#pragma once

// Reference implementations for the tests. They follow the definitions
// literally (repeated shifting, sign products, brute-force minimization) and
// share no code with the library beyond reading function values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "dscex/core_space.hpp"

namespace oracle {

using dscex::Complex;
using dscex::ExactComplex;
using dscex::Rational;

inline bool is_power_of_3(std::uint64_t x) {
    if (x == 0) return false;
    while (x % 3 == 0) x /= 3;
    return x == 1;
}

inline int psi(std::uint64_t n) { return is_power_of_3(n) ? -1 : 1; }

/// Number of powers of three in (n, n + m], by enumeration.
inline std::uint64_t flips(std::uint64_t n, std::uint64_t m) {
    std::uint64_t count = 0;
    for (std::uint64_t x = n + 1; x <= n + m; ++x) count += is_power_of_3(x) ? 1 : 0;
    return count;
}

/// Values v(j, 0..len-1) of one chain.
inline std::vector<Complex> dense(const dscex::CellFunction& v, dscex::ChainId j, std::uint64_t len) {
    std::vector<Complex> out(len);
    for (std::uint64_t n = 0; n < len; ++n) out[n] = v.value({j, n});
    return out;
}

inline std::vector<ExactComplex> dense_exact(const dscex::CellFunction& v, dscex::ChainId j, std::uint64_t len) {
    std::vector<ExactComplex> out(len);
    for (std::uint64_t n = 0; n < len; ++n) out[n] = v.exact_value({j, n});
    return out;
}

/// One literal application of S to a finite window; the last cell is dropped.
template <class T>
std::vector<T> shift_once(const std::vector<T>& u) {
    std::vector<T> out;
    for (std::uint64_t n = 0; n + 1 < u.size(); ++n) out.push_back(psi(n + 1) == 1 ? u[n + 1] : T(-u[n + 1]));
    return out;
}

/// (S^k v)(n) by applying S k times.
template <class T>
T iterate_by_shifting(std::vector<T> u, std::uint64_t n, std::uint64_t k) {
    for (std::uint64_t i = 0; i < k; ++i) u = shift_once(u);
    return u.at(n);
}

/// (1/N) sum_{k<=N} (S^k v)(n), with the sign kept as a running product of psi.
inline Complex average(const std::vector<Complex>& u, std::uint64_t n, std::uint64_t N) {
    std::complex<long double> sum = 0;
    int sign = 1;
    for (std::uint64_t k = 1; k <= N; ++k) {
        sign *= psi(n + k);
        sum += std::complex<long double>(u.at(n + k)) * static_cast<long double>(sign);
    }
    sum /= static_cast<long double>(N);
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

inline ExactComplex average_exact(const std::vector<ExactComplex>& u, std::uint64_t n, std::uint64_t N) {
    ExactComplex sum;
    int sign = 1;
    for (std::uint64_t k = 1; k <= N; ++k) {
        sign *= psi(n + k);
        if (sign == 1) {
            sum += u.at(n + k);
        } else {
            sum -= u.at(n + k);
        }
    }
    return sum / Rational(N);
}

struct WeightedValue {
    double weight;  // infinity for a tail level
    double modulus;
};

/// min over thresholds tau of sum weight * max(|v| - tau, 0) + tau. The cost is
/// convex and piecewise linear in tau with breaks at the moduli, so scanning
/// 0, every modulus, and a fine grid between them finds the minimum.
inline double l1_plus_linf_brute(const std::vector<WeightedValue>& cells) {
    std::vector<double> taus{0.0};
    double top = 0.0;
    for (const auto& c : cells) {
        taus.push_back(c.modulus);
        top = std::max(top, c.modulus);
    }
    for (int i = 1; i < 200; ++i) taus.push_back(top * i / 200.0);
    double best = std::numeric_limits<double>::infinity();
    for (double tau : taus) {
        long double cost = tau;
        for (const auto& c : cells) {
            const double excess = std::max(c.modulus - tau, 0.0);
            if (excess > 0) cost += std::isinf(c.weight) ? std::numeric_limits<long double>::infinity() : c.weight * excess;
        }
        best = std::min(best, static_cast<double>(cost));
    }
    return best;
}

}  // namespace oracle
