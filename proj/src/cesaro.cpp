#include "dscex/cesaro.hpp"

#include <algorithm>
#include <cmath>

#include "dscex/errors.hpp"
#include "dscex/operator.hpp"

namespace dscex {

namespace {

struct FloatArith {
    using Value = Complex;
    using Accumulator = CompensatedComplexSum;

    static Value read(const CellFunction& v, CellIndex idx) { return v.value(idx); }
    static Value tail(const CellFunction& v, ChainId j) { return v.tail_value(j); }
    static Value times_count(const Value& x, std::uint64_t count) { return x * static_cast<double>(count); }
    static Value finish(const Accumulator& acc, std::uint64_t N) { return acc.value() / static_cast<double>(N); }
};

struct ExactArith {
    using Value = ExactComplex;

    struct Accumulator {
        ExactComplex total;
        void add(const ExactComplex& x) { total += x; }
        [[nodiscard]] const ExactComplex& value() const { return total; }
    };

    static const Value& read(const CellFunction& v, CellIndex idx) { return v.exact_value(idx); }
    static const Value& tail(const CellFunction& v, ChainId j) { return v.chain(j).tail.value; }
    static Value times_count(const Value& x, std::uint64_t count) { return x * Rational(count); }
    static Value finish(const Accumulator& acc, std::uint64_t N) { return acc.value() / Rational(N); }
};

void require_positive(std::uint64_t N) {
    if (N == 0) throw InvalidArgument("Cesaro averages need N >= 1");
}

template <class Arith>
typename Arith::Value naive(const CellFunction& v, CellIndex idx, std::uint64_t N) {
    require_positive(N);
    (void)checked_add(idx.n, N);
    v.require_chain(idx.chain);
    typename Arith::Accumulator acc;
    for (std::uint64_t k = 1; k <= N; ++k) {
        const auto& x = Arith::read(v, {idx.chain, idx.n + k});
        if (sigma(idx.n, k) == 1) {
            acc.add(x);
        } else {
            acc.add(-x);
        }
    }
    return Arith::finish(acc, N);
}

template <class Arith>
std::vector<typename Arith::Value> naive_series(const CellFunction& v, CellIndex idx, std::uint64_t N_max) {
    require_positive(N_max);
    (void)checked_add(idx.n, N_max);
    v.require_chain(idx.chain);
    std::vector<typename Arith::Value> out;
    out.reserve(N_max);
    typename Arith::Accumulator acc;
    for (std::uint64_t k = 1; k <= N_max; ++k) {
        const auto& x = Arith::read(v, {idx.chain, idx.n + k});
        if (sigma(idx.n, k) == 1) {
            acc.add(x);
        } else {
            acc.add(-x);
        }
        out.push_back(Arith::finish(acc, k));
    }
    return out;
}

// Groups m = n + k by d = floor_log3(m); on each block the sign
// (-1)^{#powers of 3 in (n, m]} is constant. Blocks are reduced in ascending d.
template <class Arith>
typename Arith::Value block(const CellFunction& v, CellIndex idx, std::uint64_t N) {
    require_positive(N);
    const std::uint64_t first = checked_add(idx.n, 1);
    const std::uint64_t last = checked_add(idx.n, N);
    const std::uint64_t prefix_len = v.prefix_length(idx.chain);
    const std::uint64_t flips_before = powers_of_3_up_to(idx.n);

    typename Arith::Accumulator total;
    std::uint64_t lo = first;
    while (true) {
        const unsigned d = floor_log3(lo);
        const std::uint64_t block_end = d >= 40 ? last : std::min(last, pow3(d + 1) - 1);
        const bool negative = ((d + 1 - flips_before) % 2) == 1;

        typename Arith::Accumulator part;
        const std::uint64_t prefix_end = std::min(block_end, prefix_len ? prefix_len - 1 : 0);
        if (prefix_len > 0 && lo <= prefix_end) {
            for (std::uint64_t m = lo; m <= prefix_end; ++m) part.add(Arith::read(v, {idx.chain, m}));
        }
        const std::uint64_t tail_start = std::max(lo, prefix_len);
        if (tail_start <= block_end) {
            part.add(Arith::times_count(Arith::tail(v, idx.chain), block_end - tail_start + 1));
        }
        if (negative) {
            total.add(-part.value());
        } else {
            total.add(part.value());
        }
        if (block_end == last) break;
        lo = block_end + 1;
    }
    return Arith::finish(total, N);
}

}  // namespace

Complex cesaro_naive(const CellFunction& v, CellIndex idx, std::uint64_t N) { return naive<FloatArith>(v, idx, N); }

ExactComplex cesaro_naive_exact(const CellFunction& v, CellIndex idx, std::uint64_t N) {
    return naive<ExactArith>(v, idx, N);
}

std::vector<Complex> cesaro_naive_series(const CellFunction& v, CellIndex idx, std::uint64_t N_max) {
    return naive_series<FloatArith>(v, idx, N_max);
}

std::vector<ExactComplex> cesaro_naive_series_exact(const CellFunction& v, CellIndex idx, std::uint64_t N_max) {
    return naive_series<ExactArith>(v, idx, N_max);
}

Complex cesaro_block(const CellFunction& v, CellIndex idx, std::uint64_t N) { return block<FloatArith>(v, idx, N); }

ExactComplex cesaro_block_exact(const CellFunction& v, CellIndex idx, std::uint64_t N) {
    return block<ExactArith>(v, idx, N);
}

std::vector<Checkpoint> checkpoint_set(std::uint64_t n, unsigned t_min, unsigned t_max) {
    if (t_min > t_max) throw InvalidArgument("empty checkpoint range");
    if (t_max > 40) throw IndexOverflow("checkpoint exponent above 40");
    if (pow3(t_min) < checked_add(n, 2)) {
        throw InvalidArgument("checkpoint 3^" + std::to_string(t_min) + " must be at least n + 2 = " +
                              std::to_string(n + 2));
    }
    const unsigned b = floor_log3(std::max<std::uint64_t>(n, 1));
    std::vector<Checkpoint> out;
    for (unsigned t = t_min; t <= t_max; ++t) out.push_back({t, pow3(t) - n - 1, (t - b) % 2 == 0});
    return out;
}

CesaroReport cesaro_report(const CellFunction& v, CellIndex start, unsigned t_min, unsigned t_max,
                           const ExactComplex& z0, bool exact) {
    if (z0.is_zero()) throw InvalidArgument("z0 must be nonzero");
    CesaroReport report{start, z0, {}, 0.0, 0.0};
    const Complex z0d = z0.to_complex();
    for (const Checkpoint& cp : checkpoint_set(start.n, t_min, t_max)) {
        CesaroEntry e{cp, cesaro_block(v, start, cp.N), std::nullopt, 0.0, std::nullopt};
        e.re_over_z0 = (e.average / z0d).real();
        if (exact) {
            e.exact_average = cesaro_block_exact(v, start, cp.N);
            e.exact_re_over_z0 = real_of_quotient(*e.exact_average, z0);
        }
        report.entries.push_back(std::move(e));
    }
    const auto [lo, hi] = std::minmax_element(report.entries.begin(), report.entries.end(),
                                              [](const auto& a, const auto& b) { return a.re_over_z0 < b.re_over_z0; });
    report.min_re_over_z0 = lo->re_over_z0;
    report.max_re_over_z0 = hi->re_over_z0;
    return report;
}

std::string csv_header() { return "chain,n,N,re,im,re_over_z0\n"; }

std::string csv_rows(const CesaroReport& report) {
    std::string out;
    for (const CesaroEntry& e : report.entries) {
        out += std::to_string(report.start.chain) + ',' + std::to_string(report.start.n) + ',' +
               std::to_string(e.checkpoint.N) + ',';
        if (e.exact_average) {
            out += format_rational(e.exact_average->re) + ',' + format_rational(e.exact_average->im) + ',' +
                   format_rational(*e.exact_re_over_z0);
        } else {
            out += format_double(e.average.real()) + ',' + format_double(e.average.imag()) + ',' +
                   format_double(e.re_over_z0);
        }
        out += '\n';
    }
    return out;
}

NonconvergenceReport verify_nonconvergence_bounds(const CellFunction& v, const ExactComplex& z0, ChainId j,
                                                  std::uint64_t n, unsigned l_max) {
    if (z0.is_zero()) throw InvalidArgument("z0 must be nonzero");
    if (n == 0) throw InvalidArgument("the bound families need a start cell n >= 1");
    if (l_max == 0) throw InvalidArgument("l_max must be at least 1");
    NonconvergenceReport report{{j, n}, z0, {}, {}, false};

    const auto& chain = v.chain(j);
    const Rational half(1, 2);
    auto in_strip = [&](const ExactComplex& value) {
        const Rational re = real_of_quotient(value, z0);
        return re >= half && re <= 1;
    };
    for (std::uint64_t m = 1; m < chain.prefix.size(); ++m) {
        if (!in_strip(chain.prefix[m])) {
            report.precondition_violations.push_back("Re(v(" + std::to_string(j) + "," + std::to_string(m) +
                                                     ")/z0) outside [1/2,1]");
        }
    }
    if (chain.tail.kind == ValueTail::Kind::Zero || !in_strip(chain.tail.value)) {
        report.precondition_violations.push_back("Re(tail/z0) on chain " + std::to_string(j) + " outside [1/2,1]");
    }

    const unsigned b = floor_log3(n);
    const Complex z0d = z0.to_complex();
    bool all = true;
    for (unsigned ell = 1; ell <= l_max; ++ell) {
        for (unsigned t : {b + 2 * ell, b + 2 * ell + 1}) {
            const Checkpoint cp{t, pow3(t) - n - 1, (t - b) % 2 == 0};
            const double re = (cesaro_block(v, {j, n}, cp.N) / z0d).real();
            const double bound = cp.even ? -1.0 / 9.0 : 1.0 / 9.0;
            const bool pass = cp.even ? re <= bound + kBoundSlack : re >= bound - kBoundSlack;
            all = all && pass;
            report.entries.push_back({ell, cp, re, bound, pass});
        }
    }
    report.pass = all && report.precondition_violations.empty();
    return report;
}

std::vector<Complex> checkpoint_averages(const CellFunction& v, CellIndex start, unsigned t_min, unsigned t_max) {
    std::vector<Complex> out;
    for (const Checkpoint& cp : checkpoint_set(start.n, t_min, t_max)) out.push_back(cesaro_block(v, start, cp.N));
    return out;
}

double finite_diameter(std::span<const Complex> points) {
    double d = 0.0;
    for (std::size_t a = 0; a < points.size(); ++a) {
        for (std::size_t b = a + 1; b < points.size(); ++b) d = std::max(d, std::abs(points[a] - points[b]));
    }
    return d;
}

DiameterEstimate diameter_estimate(const CellFunction& v, ChainId j, unsigned t_min, unsigned t_max) {
    const auto points = checkpoint_averages(v, {j, 0}, t_min, t_max);
    return {j, finite_diameter(points), t_min, t_max};
}

bool boundedness_check(const CellFunction& v, CellIndex idx, std::span<const std::uint64_t> Ns) {
    const double sup = v.chain_sup(idx.chain);
    const double slack = 1e-12 * std::max(sup, 1.0);
    return std::all_of(Ns.begin(), Ns.end(),
                       [&](std::uint64_t N) { return std::abs(cesaro_block(v, idx, N)) <= sup + slack; });
}

}  // namespace dscex
