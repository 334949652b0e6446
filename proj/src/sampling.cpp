#include "dscex/sampling.hpp"

#include <algorithm>

namespace dscex {

Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

ExactComplex random_dyadic_complex(Rng& rng, int scale) {
    const std::int64_t bound = 64LL * scale;
    const std::int64_t re = uniform_int(rng, -bound, bound);
    const std::int64_t im = uniform_int(rng, -bound, bound);
    return {Rational(re, 64), Rational(im, 64)};
}

FactorSpace random_monotone_space(Rng& rng, std::size_t chains, std::size_t max_prefix) {
    std::vector<FactorSpace::Chain> out(chains);
    for (auto& chain : out) {
        const auto len = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(max_prefix)));
        Rational w(uniform_int(rng, 1, 8), 4);
        for (std::size_t n = 0; n < len; ++n) {
            chain.weight_prefix.push_back(w);
            w += Rational(uniform_int(rng, 0, 4), 4);
        }
        if (uniform_int(rng, 0, 1) == 0) {
            chain.weight_tail = WeightTail::constant(w);
        } else {
            // base * ratio^len equals the last weight, so the seam stays monotone
            const Rational ratio(uniform_int(rng, 5, 8), 4);
            Rational power = 1;
            for (std::size_t n = 0; n < len; ++n) power *= ratio;
            chain.weight_tail = WeightTail::geometric(chain.weight_prefix.back() / power, ratio);
        }
    }
    return FactorSpace(std::move(out));
}

CellFunction random_finite_support(Rng& rng, std::size_t chains, std::size_t max_len) {
    std::vector<CellFunction::Chain> out(chains);
    for (auto& chain : out) {
        const auto len = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(max_len)));
        for (std::size_t n = 0; n < len; ++n) chain.prefix.push_back(random_dyadic_complex(rng));
    }
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(chains) - 1));
    auto& chain = out[j];
    if (chain.prefix.empty()) chain.prefix.resize(static_cast<std::size_t>(uniform_int(rng, 1, 4)));
    chain.prefix[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(chain.prefix.size()) - 1))] =
        ExactComplex(Rational(uniform_int(rng, 1, 64), 64), Rational(uniform_int(rng, -64, 64), 64));
    return CellFunction(std::move(out));
}

CellFunction random_cell_function(Rng& rng, std::size_t chains, std::size_t max_len) {
    std::vector<CellFunction::Chain> out(chains);
    for (auto& chain : out) {
        const auto len = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(max_len)));
        for (std::size_t n = 0; n < len; ++n) chain.prefix.push_back(random_dyadic_complex(rng));
        if (uniform_int(rng, 0, 2) != 0) chain.tail = ValueTail::constant(random_dyadic_complex(rng));
    }
    return CellFunction(std::move(out));
}

PiecewiseFunction random_finite_piecewise(Rng& rng, const BaseSpace& space) {
    std::vector<ExactComplex> atoms;
    std::vector<ExactComplex> segments;
    for (std::size_t i = 0; i < space.atoms().size(); ++i) atoms.push_back(random_dyadic_complex(rng));
    for (std::size_t i = 0; i < space.segments().size(); ++i) segments.push_back(random_dyadic_complex(rng));
    const std::size_t motif = space.motif() ? space.motif()->pattern.size() : 0;
    return PiecewiseFunction(space, std::move(atoms), std::move(segments), std::vector<ExactComplex>(motif));
}

}  // namespace dscex
