#include "dscex/operator.hpp"

#include <algorithm>

#include "dscex/errors.hpp"

namespace dscex {

std::uint64_t pow3(unsigned t) {
    if (t > 40) throw IndexOverflow("3^" + std::to_string(t) + " does not fit in 64 bits");
    std::uint64_t p = 1;
    for (unsigned i = 0; i < t; ++i) p *= 3;
    return p;
}

unsigned floor_log3(std::uint64_t x) {
    if (x == 0) throw InvalidArgument("floor_log3(0) is undefined");
    unsigned t = 0;
    std::uint64_t p = 1;
    while (p <= x / 3) {
        p *= 3;
        ++t;
    }
    return t;
}

bool is_power_of_3(std::uint64_t m) {
    if (m == 0) throw InvalidArgument("is_power_of_3(0) is undefined");
    return pow3(floor_log3(m)) == m;
}

std::uint64_t powers_of_3_up_to(std::uint64_t x) { return x == 0 ? 0 : floor_log3(x) + 1u; }

std::uint64_t checked_add(std::uint64_t n, std::uint64_t k) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(n, k, &out)) throw IndexOverflow("cell index n + k overflows 64 bits");
    return out;
}

std::uint64_t sign_flip_count(std::uint64_t n, std::uint64_t m) {
    return powers_of_3_up_to(checked_add(n, m)) - powers_of_3_up_to(n);
}

int sigma(std::uint64_t n, std::uint64_t m) { return sign_flip_count(n, m) % 2 == 0 ? 1 : -1; }

int psi(std::uint64_t n) { return n >= 1 && is_power_of_3(n) ? -1 : 1; }

Complex iterate_value(const CellFunction& v, CellIndex idx, std::uint64_t k) {
    if (k == 0) throw InvalidArgument("iterate_value needs k >= 1");
    const std::uint64_t target = checked_add(idx.n, k);
    const Complex value = v.value({idx.chain, target});
    return sigma(idx.n, k) == 1 ? value : -value;
}

ExactComplex iterate_value_exact(const CellFunction& v, CellIndex idx, std::uint64_t k) {
    if (k == 0) throw InvalidArgument("iterate_value needs k >= 1");
    const std::uint64_t target = checked_add(idx.n, k);
    const ExactComplex& value = v.exact_value({idx.chain, target});
    return sigma(idx.n, k) == 1 ? value : -value;
}

WindowedFunction apply_S(const FactorSpace& space, const WindowedFunction& in, std::uint64_t min_prefix) {
    const CellFunction& v = in.function;
    require_same_shape(space, v);
    if (in.valid_below == 0) throw InvalidArgument("apply_S: input has an empty validity window");

    std::uint64_t window = in.bounded() ? in.valid_below - 1 : WindowedFunction::kUnbounded;
    std::vector<CellFunction::Chain> out(v.chain_count());
    for (ChainId j = 0; j < v.chain_count(); ++j) {
        const auto& chain = v.chain(j);
        std::uint64_t explicit_len = std::max<std::uint64_t>(chain.prefix.size() ? chain.prefix.size() - 1 : 0,
                                                             min_prefix);
        if (!chain.tail.is_zero()) {
            // run the prefix through the next flip (3 at least) so the tail sign is +1 up to 3p
            std::uint64_t p = 3;
            while (p < explicit_len + 1) p *= 3;
            explicit_len = p;
            window = std::min(window, 3 * p - 1);
            out[j].tail = chain.tail;
        }
        out[j].prefix.reserve(explicit_len);
        for (std::uint64_t n = 0; n < explicit_len; ++n) {
            const ExactComplex& next = v.exact_value({j, n + 1});
            out[j].prefix.push_back(psi(n + 1) == 1 ? next : -next);
        }
    }
    return {CellFunction(std::move(out)), window};
}

WindowedFunction apply_S(const FactorSpace& space, const CellFunction& v, std::uint64_t min_prefix) {
    return apply_S(space, WindowedFunction{v}, min_prefix);
}

WindowedFunction sign_pattern_function(std::size_t chains, std::uint64_t horizon) {
    std::vector<ExactComplex> prefix;
    prefix.reserve(horizon);
    for (std::uint64_t n = 0; n < horizon; ++n) prefix.emplace_back(psi(n));
    std::vector<CellFunction::Chain> out(chains, CellFunction::Chain{prefix, ValueTail::constant(1)});
    return {CellFunction(std::move(out)), horizon};
}

}  // namespace dscex
