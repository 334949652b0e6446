#include "dscex/core_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dscex/errors.hpp"

namespace dscex {

namespace {

// Exponents beyond this are refused in exact arithmetic; the numbers would have
// millions of digits.
constexpr std::uint64_t kMaxExactExponent = 1u << 16;

Rational rational_power(const Rational& base, std::uint64_t exponent) {
    if (exponent > kMaxExactExponent) throw IndexOverflow("exact geometric weight exponent too large");
    Rational result = 1;
    Rational factor = base;
    while (exponent) {
        if (exponent & 1u) result *= factor;
        exponent >>= 1u;
        if (exponent) factor *= factor;
    }
    return result;
}

Rational tail_weight_exact(const WeightTail& tail, std::uint64_t n) {
    if (tail.kind == WeightTail::Kind::Constant) return tail.base;
    return tail.base * rational_power(tail.ratio, n);
}

}  // namespace

FactorSpace::FactorSpace(std::vector<Chain> chains) : FactorSpace(std::move(chains), true) {}

FactorSpace FactorSpace::without_monotonicity_check(std::vector<Chain> chains) {
    return FactorSpace(std::move(chains), false);
}

FactorSpace FactorSpace::uniform(std::size_t chains, const Rational& weight) {
    std::vector<Chain> c(chains, Chain{{}, WeightTail::constant(weight)});
    return FactorSpace(std::move(c));
}

FactorSpace::FactorSpace(std::vector<Chain> chains, bool check_monotone) : chains_(std::move(chains)) {
    if (chains_.empty()) throw InvalidSpace("a factor space needs at least one chain");
    for (std::size_t j = 0; j < chains_.size(); ++j) {
        const Chain& c = chains_[j];
        const std::string where = "chain " + std::to_string(j) + ": ";
        for (const Rational& w : c.weight_prefix) {
            if (w <= 0) throw InvalidSpace(where + "weights must be positive");
        }
        if (c.weight_tail.base <= 0) throw InvalidSpace(where + "tail base must be positive");
        if (c.weight_tail.kind == WeightTail::Kind::Geometric && c.weight_tail.ratio < 1) {
            throw InvalidSpace(where + "geometric tail ratio must be >= 1");
        }
        if (!check_monotone) continue;
        for (std::size_t n = 1; n < c.weight_prefix.size(); ++n) {
            if (c.weight_prefix[n] < c.weight_prefix[n - 1]) {
                throw InvalidSpace(where + "weights decrease at n=" + std::to_string(n));
            }
        }
        if (!c.weight_prefix.empty()) {
            const Rational seam = tail_weight_exact(c.weight_tail, c.weight_prefix.size());
            if (seam < c.weight_prefix.back()) {
                throw InvalidSpace(where + "weights decrease across the prefix/tail seam");
            }
        }
    }
}

const FactorSpace::Chain& FactorSpace::chain(ChainId j) const {
    if (j >= chains_.size()) throw InvalidChain("invalid chain id " + std::to_string(j));
    return chains_[j];
}

void FactorSpace::require_chain(ChainId j) const {
    if (j >= chains_.size()) throw InvalidChain("invalid chain id " + std::to_string(j));
}

Rational FactorSpace::weight_exact(CellIndex idx) const {
    const Chain& c = chain(idx.chain);
    if (idx.n < c.weight_prefix.size()) return c.weight_prefix[idx.n];
    return tail_weight_exact(c.weight_tail, idx.n);
}

double FactorSpace::weight(CellIndex idx) const {
    const Chain& c = chain(idx.chain);
    if (idx.n < c.weight_prefix.size()) return c.weight_prefix[idx.n].convert_to<double>();
    const double base = c.weight_tail.base.convert_to<double>();
    if (c.weight_tail.kind == WeightTail::Kind::Constant) return base;
    const double w = base * std::pow(c.weight_tail.ratio.convert_to<double>(), static_cast<double>(idx.n));
    if (!std::isfinite(w)) throw IndexOverflow("weight at n=" + std::to_string(idx.n) + " overflows a double");
    return w;
}

bool FactorSpace::is_monotone() const {
    for (const Chain& c : chains_) {
        for (std::size_t n = 1; n < c.weight_prefix.size(); ++n) {
            if (c.weight_prefix[n] < c.weight_prefix[n - 1]) return false;
        }
        if (!c.weight_prefix.empty() &&
            tail_weight_exact(c.weight_tail, c.weight_prefix.size()) < c.weight_prefix.back()) {
            return false;
        }
    }
    return true;
}

CellFunction::CellFunction(std::vector<Chain> chains) : chains_(std::move(chains)) {
    if (chains_.empty()) throw InvalidSpace("a cell function needs at least one chain");
    prefix_cache_.reserve(chains_.size());
    tail_cache_.reserve(chains_.size());
    for (Chain& c : chains_) {
        if (c.tail.kind == ValueTail::Kind::Constant && c.tail.value.is_zero()) c.tail = ValueTail::zero();
        if (c.tail.kind == ValueTail::Kind::Zero) c.tail.value = ExactComplex{};
        std::vector<Complex> cached;
        cached.reserve(c.prefix.size());
        for (const ExactComplex& z : c.prefix) cached.push_back(z.to_complex());
        prefix_cache_.push_back(std::move(cached));
        tail_cache_.push_back(c.tail.value.to_complex());
    }
}

CellFunction CellFunction::zero(std::size_t chains) {
    return CellFunction(std::vector<Chain>(chains, Chain{{}, ValueTail::zero()}));
}

CellFunction CellFunction::constant(std::size_t chains, const ExactComplex& value) {
    return CellFunction(std::vector<Chain>(chains, Chain{{}, ValueTail::constant(value)}));
}

const CellFunction::Chain& CellFunction::chain(ChainId j) const {
    if (j >= chains_.size()) throw InvalidChain("invalid chain id " + std::to_string(j));
    return chains_[j];
}

void CellFunction::require_chain(ChainId j) const {
    if (j >= chains_.size()) throw InvalidChain("invalid chain id " + std::to_string(j));
}

std::size_t CellFunction::max_prefix_length() const {
    std::size_t m = 0;
    for (const Chain& c : chains_) m = std::max(m, c.prefix.size());
    return m;
}

const ExactComplex& CellFunction::exact_value(CellIndex idx) const {
    const Chain& c = chain(idx.chain);
    if (idx.n < c.prefix.size()) return c.prefix[idx.n];
    return c.tail.value;
}

Complex CellFunction::value(CellIndex idx) const {
    require_chain(idx.chain);
    const auto& prefix = prefix_cache_[idx.chain];
    if (idx.n < prefix.size()) return prefix[idx.n];
    return tail_cache_[idx.chain];
}

std::span<const Complex> CellFunction::prefix_values(ChainId j) const {
    require_chain(j);
    return prefix_cache_[j];
}

Complex CellFunction::tail_value(ChainId j) const {
    require_chain(j);
    return tail_cache_[j];
}

double CellFunction::chain_sup(ChainId j) const {
    require_chain(j);
    double sup = std::abs(tail_cache_[j]);
    for (const Complex& z : prefix_cache_[j]) sup = std::max(sup, std::abs(z));
    return sup;
}

bool CellFunction::has_zero_tails() const {
    return std::all_of(chains_.begin(), chains_.end(), [](const Chain& c) { return c.tail.is_zero(); });
}

bool operator==(const CellFunction& a, const CellFunction& b) {
    if (a.chain_count() != b.chain_count()) return false;
    for (ChainId j = 0; j < a.chain_count(); ++j) {
        const std::size_t len = std::max(a.prefix_length(j), b.prefix_length(j));
        for (std::uint64_t n = 0; n < len; ++n) {
            if (!(a.exact_value({j, n}) == b.exact_value({j, n}))) return false;
        }
        if (!(a.chain(j).tail.value == b.chain(j).tail.value)) return false;
    }
    return true;
}

double cell_weight(const FactorSpace& space, CellIndex idx) { return space.weight(idx); }

Complex cell_value(const CellFunction& v, CellIndex idx) { return v.value(idx); }

void require_same_shape(const FactorSpace& space, const CellFunction& v) {
    if (space.chain_count() != v.chain_count()) {
        throw MismatchedSpaces("function has " + std::to_string(v.chain_count()) + " chains, space has " +
                               std::to_string(space.chain_count()));
    }
}

CellFunction make_indicator(const FactorSpace& space, const std::set<ChainId>& chains) {
    std::vector<CellFunction::Chain> out(space.chain_count());
    for (ChainId j : chains) {
        space.require_chain(j);
        out[j].tail = ValueTail::constant(1);
    }
    return CellFunction(std::move(out));
}

CellFunction combine(const CellFunction& v, const CellFunction& w, const ExactComplex& a, const ExactComplex& b) {
    if (v.chain_count() != w.chain_count()) throw MismatchedSpaces("combine: functions live on different spaces");
    std::vector<CellFunction::Chain> out(v.chain_count());
    for (ChainId j = 0; j < v.chain_count(); ++j) {
        const std::size_t len = std::max(v.prefix_length(j), w.prefix_length(j));
        out[j].prefix.reserve(len);
        for (std::uint64_t n = 0; n < len; ++n) {
            out[j].prefix.push_back(a * v.exact_value({j, n}) + b * w.exact_value({j, n}));
        }
        const ValueTail& tv = v.chain(j).tail;
        const ValueTail& tw = w.chain(j).tail;
        if (tv.kind == ValueTail::Kind::Zero && tw.kind == ValueTail::Kind::Zero) {
            out[j].tail = ValueTail::zero();
        } else {
            out[j].tail = ValueTail::constant(a * tv.value + b * tw.value);
        }
    }
    return CellFunction(std::move(out));
}

CellFunction combine(const CellFunction& v, const CellFunction& w, Complex a, Complex b) {
    return combine(v, w, ExactComplex::from(a), ExactComplex::from(b));
}

CellFunction scale(const CellFunction& v, const ExactComplex& a) {
    return combine(v, CellFunction::zero(v.chain_count()), a, ExactComplex{});
}

namespace {

std::string trimmed(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trimmed(field));
    return fields;
}

struct ChainLine {
    std::size_t line_no;
    std::vector<std::string> prefix;
    std::string kind;
    std::vector<std::string> params;
};

bool is_tail_keyword(const std::string& s) { return s == "constant" || s == "geometric" || s == "zero"; }

std::vector<ChainLine> split_chain_lines(std::string_view text) {
    std::vector<ChainLine> lines;
    std::stringstream ss{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        raw = trimmed(raw);
        if (raw.empty()) continue;
        auto fields = split_fields(raw);
        std::size_t chain = 0;
        try {
            std::size_t used = 0;
            chain = std::stoul(fields.at(0), &used);
            if (used != fields[0].size()) throw std::invalid_argument("chain");
        } catch (const std::exception&) {
            throw ParseError("expected a chain id as first field", line_no);
        }
        if (chain != lines.size()) throw ParseError("chains must be listed in order 0, 1, 2, ...", line_no);
        auto kind = std::find_if(fields.begin() + 1, fields.end(), is_tail_keyword);
        if (kind == fields.end()) throw ParseError("missing tail kind (constant, geometric or zero)", line_no);
        lines.push_back({line_no, {fields.begin() + 1, kind}, *kind, {kind + 1, fields.end()}});
    }
    if (lines.empty()) throw ParseError("no chains given", 0);
    return lines;
}

}  // namespace

std::string serialize(const FactorSpace& space) {
    std::string out;
    for (ChainId j = 0; j < space.chain_count(); ++j) {
        const auto& c = space.chain(j);
        out += std::to_string(j);
        for (const Rational& w : c.weight_prefix) out += ", " + format_rational(w);
        if (c.weight_tail.kind == WeightTail::Kind::Constant) {
            out += ", constant, " + format_rational(c.weight_tail.base);
        } else {
            out += ", geometric, " + format_rational(c.weight_tail.base) + ", " +
                   format_rational(c.weight_tail.ratio);
        }
        out += '\n';
    }
    return out;
}

std::string serialize(const CellFunction& v) {
    std::string out;
    for (ChainId j = 0; j < v.chain_count(); ++j) {
        const auto& c = v.chain(j);
        out += std::to_string(j);
        for (const ExactComplex& z : c.prefix) out += ", " + format_complex(z);
        if (c.tail.kind == ValueTail::Kind::Zero) {
            out += ", zero";
        } else {
            out += ", constant, " + format_complex(c.tail.value);
        }
        out += '\n';
    }
    return out;
}

FactorSpace parse_factor_space(std::string_view text, bool check_monotone) {
    std::vector<FactorSpace::Chain> chains;
    for (const ChainLine& line : split_chain_lines(text)) {
        FactorSpace::Chain c;
        try {
            for (const auto& f : line.prefix) c.weight_prefix.push_back(parse_rational(f));
            if (line.kind == "constant" && line.params.size() == 1) {
                c.weight_tail = WeightTail::constant(parse_rational(line.params[0]));
            } else if (line.kind == "geometric" && line.params.size() == 2) {
                c.weight_tail = WeightTail::geometric(parse_rational(line.params[0]), parse_rational(line.params[1]));
            } else {
                throw std::invalid_argument("weight tail must be 'constant, b' or 'geometric, b, r'");
            }
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line.line_no);
        }
        chains.push_back(std::move(c));
    }
    return check_monotone ? FactorSpace(std::move(chains)) : FactorSpace::without_monotonicity_check(std::move(chains));
}

CellFunction parse_cell_function(std::string_view text) {
    std::vector<CellFunction::Chain> chains;
    for (const ChainLine& line : split_chain_lines(text)) {
        CellFunction::Chain c;
        try {
            for (const auto& f : line.prefix) c.prefix.push_back(parse_complex(f));
            if (line.kind == "zero" && line.params.empty()) {
                c.tail = ValueTail::zero();
            } else if (line.kind == "constant" && line.params.size() == 1) {
                c.tail = ValueTail::constant(parse_complex(line.params[0]));
            } else {
                throw std::invalid_argument("value tail must be 'zero' or 'constant, c'");
            }
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line.line_no);
        }
        chains.push_back(std::move(c));
    }
    return CellFunction(std::move(chains));
}

}  // namespace dscex
