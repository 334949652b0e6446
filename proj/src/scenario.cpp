#include "dscex/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dscex/errors.hpp"
#include "dscex/operator.hpp"

namespace dscex {

namespace {

constexpr ChainId kAllChains = std::numeric_limits<ChainId>::max();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

// Every key of every section, in file order; repeated keys keep all entries.
using Section = std::multimap<std::string, Entry>;

const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> keys{
        {"scenario", {"name", "seed", "samples"}},
        {"space", {"chains", "weight", "chain", "check_monotone"}},
        {"function", {"source", "value", "chain"}},
        {"cesaro", {"t_min", "t_max", "z0", "start", "exact", "l_max"}},
        {"base",
         {"atoms", "atom_values", "segments", "segment_values", "motif_start", "motif_period", "motif_pattern",
          "motif_values", "epsilon", "chains", "cell_measure", "schedule", "directions", "radii"}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

    [[nodiscard]] bool has_section(const std::string& s) const { return sections_.contains(s); }
    [[nodiscard]] std::size_t section_line(const std::string& s) const { return header_lines_.at(s); }
    void set_header_line(const std::string& s, std::size_t line) { header_lines_[s] = line; }

    [[nodiscard]] const Entry* get(const std::string& section, const std::string& key) const {
        const auto it = sections_.find(section);
        if (it == sections_.end()) return nullptr;
        const auto [lo, hi] = it->second.equal_range(key);
        if (lo == hi) return nullptr;
        if (std::next(lo) != hi) throw ParseError("key '" + key + "' given more than once", std::next(lo)->second.line);
        return &lo->second;
    }

    [[nodiscard]] std::vector<Entry> all(const std::string& section, const std::string& key) const {
        std::vector<Entry> out;
        const auto it = sections_.find(section);
        if (it == sections_.end()) return out;
        const auto [lo, hi] = it->second.equal_range(key);
        for (auto e = lo; e != hi; ++e) out.push_back(e->second);
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.line < b.line; });
        return out;
    }

private:
    std::map<std::string, Section> sections_;
    std::map<std::string, std::size_t> header_lines_;
};

template <class F>
auto converted(const Entry& e, const std::string& key, F&& convert) {
    try {
        return convert(e.value);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ParseError("invalid value for '" + key + "': " + ex.what(), e.line);
    }
}

std::uint64_t parse_u64(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw InvalidArgument("expected a nonnegative integer, got '" + s + "'");
    }
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw InvalidArgument("expected true or false, got '" + s + "'");
}

std::vector<Rational> parse_rationals(const std::string& s) {
    std::vector<Rational> out;
    for (const auto& item : split_list(s)) out.push_back(parse_rational(item));
    return out;
}

std::vector<ExactComplex> parse_complexes(const std::string& s) {
    std::vector<ExactComplex> out;
    for (const auto& item : split_list(s)) out.push_back(parse_complex(item));
    return out;
}

std::vector<Interval> parse_intervals(const std::string& s) {
    std::vector<Interval> out;
    for (const auto& item : split_list(s)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvalidArgument("interval '" + item + "' must be written lo:hi");
        out.push_back({parse_rational(trim(std::string_view(item).substr(0, colon))),
                       parse_rational(trim(std::string_view(item).substr(colon + 1)))});
    }
    return out;
}

// Rebuilds a multi-line block with every line at its original position, so
// parse errors from the core-space parser report file line numbers.
std::string padded_block(const std::vector<Entry>& entries) {
    std::string text;
    std::size_t at = 1;
    for (const Entry& e : entries) {
        while (at < e.line) {
            text += '\n';
            ++at;
        }
        text += e.value + '\n';
        ++at;
    }
    return text;
}

std::map<std::string, Section> tokenize(std::string_view text, std::map<std::string, std::size_t>& headers) {
    std::map<std::string, Section> sections;
    std::string current;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("malformed section header", line_no);
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_keys().contains(current)) throw ParseError("unknown section [" + current + "]", line_no);
            if (sections.contains(current)) throw ParseError("section [" + current + "] given twice", line_no);
            sections[current];
            headers[current] = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
        if (current.empty()) throw ParseError("key outside of any section", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const auto& allowed = known_keys().at(current);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown key '" + key + "' in [" + current + "]", line_no);
        }
        sections[current].insert({key, Entry{std::string(trim(line.substr(eq + 1))), line_no}});
    }
    return sections;
}

}  // namespace

const FactorSpace& Scenario::factor_space() const {
    if (!space) throw InvalidArgument("scenario has no factor space; call realize() first");
    return *space;
}

const CellFunction& Scenario::v() const {
    if (!function) throw InvalidArgument("scenario has no function; call realize() first");
    return *function;
}

ExactComplex Scenario::z0_or_default() const {
    if (z0) return *z0;
    if (scan) return scan->z0;
    return ExactComplex(1);
}

Scenario parse_scenario(std::string_view text) {
    std::map<std::string, std::size_t> headers;
    Reader r(tokenize(text, headers));
    for (const auto& [s, line] : headers) r.set_header_line(s, line);

    Scenario sc;
    if (const Entry* e = r.get("scenario", "name")) sc.name = e->value;
    if (const Entry* e = r.get("scenario", "seed")) sc.seed = converted(*e, "seed", parse_u64);
    if (const Entry* e = r.get("scenario", "samples")) sc.samples = converted(*e, "samples", parse_u64);

    // [space]
    bool check_monotone = true;
    if (const Entry* e = r.get("space", "check_monotone")) check_monotone = converted(*e, "check_monotone", parse_bool);
    const auto chain_lines = r.all("space", "chain");
    const Entry* chains_entry = r.get("space", "chains");
    const Entry* weight_entry = r.get("space", "weight");
    if (!chain_lines.empty()) {
        if (chains_entry || weight_entry) {
            throw ParseError("give either chain lines or chains/weight in [space], not both",
                             (chains_entry ? chains_entry : weight_entry)->line);
        }
        try {
            sc.space = parse_factor_space(padded_block(chain_lines), check_monotone);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ParseError(ex.what(), chain_lines.front().line);
        }
    } else if (r.has_section("space")) {
        const std::uint64_t chains = chains_entry ? converted(*chains_entry, "chains", parse_u64) : 1;
        const Rational weight = weight_entry ? converted(*weight_entry, "weight", parse_rational) : Rational(1);
        if (chains == 0) throw ParseError("chains must be at least 1", chains_entry->line);
        if (weight <= 0) throw ParseError("weight must be positive", weight_entry->line);
        sc.space = FactorSpace::uniform(chains, weight);
    }

    // [function]
    if (const Entry* e = r.get("function", "source")) {
        if (e->value == "base") {
            sc.function_from_base = true;
        } else if (e->value != "cells") {
            throw ParseError("source must be 'cells' or 'base'", e->line);
        }
    }
    const auto fn_lines = r.all("function", "chain");
    const Entry* value_entry = r.get("function", "value");
    if (sc.function_from_base) {
        if (!fn_lines.empty() || value_entry) {
            throw ParseError("source = base derives v from the partition; remove value/chain",
                             (value_entry ? *value_entry : fn_lines.front()).line);
        }
        if (r.has_section("space")) {
            throw ParseError("source = base derives the space from the partition; remove [space]",
                             r.section_line("space"));
        }
        if (!r.has_section("base")) throw ParseError("source = base needs a [base] section", r.section_line("function"));
    } else {
        const std::size_t chains = sc.space ? sc.space->chain_count() : 1;
        if (!fn_lines.empty()) {
            if (value_entry) throw ParseError("give either chain lines or value in [function]", value_entry->line);
            try {
                sc.function = parse_cell_function(padded_block(fn_lines));
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& ex) {
                throw ParseError(ex.what(), fn_lines.front().line);
            }
            if (sc.function->chain_count() != chains) {
                throw ParseError("[function] has " + std::to_string(sc.function->chain_count()) +
                                     " chains but the space has " + std::to_string(chains),
                                 fn_lines.back().line);
            }
        } else {
            const ExactComplex value = value_entry ? converted(*value_entry, "value", parse_complex) : ExactComplex(1);
            sc.function = CellFunction::constant(chains, value);
        }
        if (!sc.space) sc.space = FactorSpace::uniform(chains, 1);
    }

    // [cesaro]
    const Entry* t_min = r.get("cesaro", "t_min");
    const Entry* t_max = r.get("cesaro", "t_max");
    if (t_min) sc.t_min = static_cast<unsigned>(converted(*t_min, "t_min", parse_u64));
    if (t_max) sc.t_max = static_cast<unsigned>(converted(*t_max, "t_max", parse_u64));
    const std::size_t range_line = t_max ? t_max->line : (t_min ? t_min->line : 0);
    if (sc.t_min > sc.t_max) throw ParseError("empty checkpoint range t_min > t_max", range_line);
    if (sc.t_max > 38) throw ParseError("t_max must be at most 38", range_line);
    if (const Entry* e = r.get("cesaro", "z0")) {
        sc.z0 = converted(*e, "z0", parse_complex);
        if (sc.z0->is_zero()) throw ParseError("z0 must be nonzero", e->line);
    }
    if (const Entry* e = r.get("cesaro", "exact")) sc.exact = converted(*e, "exact", parse_bool);
    if (const Entry* e = r.get("cesaro", "l_max")) {
        sc.l_max = static_cast<unsigned>(converted(*e, "l_max", parse_u64));
        if (sc.l_max == 0 || sc.l_max > 17) throw ParseError("l_max must be in [1, 17]", e->line);
    }
    for (const Entry& e : r.all("cesaro", "start")) {
        for (const auto& item : split_list(e.value)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ParseError("start must be written chain:n or *:n", e.line);
            const std::string chain(trim(std::string_view(item).substr(0, colon)));
            const std::string n(trim(std::string_view(item).substr(colon + 1)));
            CellIndex idx;
            idx.chain = chain == "*" ? kAllChains : static_cast<ChainId>(converted(Entry{chain, e.line}, "start", parse_u64));
            idx.n = converted(Entry{n, e.line}, "start", parse_u64);
            if (idx.chain != kAllChains && sc.space && idx.chain >= sc.space->chain_count()) {
                throw ParseError("start chain " + chain + " does not exist", e.line);
            }
            if (pow3(sc.t_min) < idx.n + 2) {
                throw ParseError("checkpoint 3^t_min must be at least n + 2 for start n = " + n, e.line);
            }
            sc.starts.push_back(idx);
        }
    }
    if (sc.starts.empty()) {
        if (pow3(sc.t_min) < 3) throw ParseError("checkpoint 3^t_min must be at least 3 for the default start n = 1", range_line);
        sc.starts.push_back({kAllChains, 1});
    }

    // [base]
    if (r.has_section("base")) {
        auto required = [&](const std::string& key) -> const Entry& {
            const Entry* e = r.get("base", key);
            if (!e) throw ParseError("[base] needs '" + key + "'", r.section_line("base"));
            return *e;
        };
        auto optional_list = [&](const std::string& key, auto convert) {
            const Entry* e = r.get("base", key);
            return e ? converted(*e, key, convert) : decltype(convert(std::string{})){};
        };
        try {
            auto atoms = optional_list("atoms", parse_rationals);
            auto segments = optional_list("segments", parse_intervals);
            std::optional<TailMotif> motif;
            if (r.get("base", "motif_pattern") || r.get("base", "motif_period")) {
                motif = TailMotif{
                    r.get("base", "motif_start") ? converted(*r.get("base", "motif_start"), "motif_start", parse_rational)
                                                 : Rational(0),
                    converted(required("motif_period"), "motif_period", parse_rational),
                    converted(required("motif_pattern"), "motif_pattern", parse_intervals)};
            }
            BaseSpace space(std::move(atoms), std::move(segments), std::move(motif));
            auto atom_values = optional_list("atom_values", parse_complexes);
            auto segment_values = optional_list("segment_values", parse_complexes);
            auto motif_values = optional_list("motif_values", parse_complexes);
            PiecewiseFunction f(space, std::move(atom_values), std::move(segment_values), std::move(motif_values));
            BaseScenario base{std::move(space), std::move(f), Rational(1, 2), {}, kDefaultDirections, kDefaultRadii};
            if (const Entry* e = r.get("base", "epsilon")) base.epsilon = converted(*e, "epsilon", parse_rational);
            if (const Entry* e = r.get("base", "chains")) base.options.chain_count = converted(*e, "chains", parse_u64);
            if (const Entry* e = r.get("base", "cell_measure")) {
                base.options.cell_measure = converted(*e, "cell_measure", parse_rational);
            }
            if (const Entry* e = r.get("base", "schedule")) {
                if (e->value == "doubling") {
                    base.options.schedule = CellSchedule::Doubling;
                } else if (e->value != "constant") {
                    throw ParseError("schedule must be 'constant' or 'doubling'", e->line);
                }
            }
            if (const Entry* e = r.get("base", "directions")) {
                base.directions = static_cast<unsigned>(converted(*e, "directions", parse_u64));
            }
            if (const Entry* e = r.get("base", "radii")) base.radii = static_cast<unsigned>(converted(*e, "radii", parse_u64));
            if (base.epsilon <= 0 || base.options.chain_count == 0 || base.options.cell_measure <= 0 ||
                base.directions == 0 || base.radii == 0) {
                throw ParseError("epsilon, chains, cell_measure, directions and radii must be positive",
                                 r.section_line("base"));
            }
            sc.base = std::move(base);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ParseError(ex.what(), r.section_line("base"));
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read scenario file '" + path + "'", 0);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

void realize(Scenario& sc) {
    if (sc.base && !sc.partition) {
        const BaseScenario& b = *sc.base;
        sc.scan = choose_z0(b.space, b.f, b.epsilon, b.directions, b.radii);
        sc.partition = build_partition(b.space, b.f, *sc.scan, b.options);
    }
    if (sc.function_from_base) {
        sc.space = sc.partition->factor_space();
        sc.function = project_P(*sc.partition, sc.base->f);
    }
    std::vector<CellIndex> expanded;
    for (const CellIndex& s : sc.starts) {
        if (s.chain == kAllChains) {
            for (ChainId j = 0; j < sc.space->chain_count(); ++j) expanded.push_back({j, s.n});
        } else {
            if (s.chain >= sc.space->chain_count()) {
                throw InvalidArgument("start chain " + std::to_string(s.chain) + " does not exist");
            }
            expanded.push_back(s);
        }
    }
    std::sort(expanded.begin(), expanded.end());
    expanded.erase(std::unique(expanded.begin(), expanded.end()), expanded.end());
    sc.starts = std::move(expanded);
}

Scenario canonical_scenario() {
    Scenario sc = parse_scenario(
        "[scenario]\nname = canonical\n"
        "[base]\nmotif_start = 0\nmotif_period = 1\nmotif_pattern = 0:1\nmotif_values = 1\n"
        "[function]\nsource = base\n"
        "[cesaro]\nt_min = 2\nt_max = 8\nz0 = 1\nstart = 0:1\n");
    realize(sc);
    return sc;
}

}  // namespace dscex
