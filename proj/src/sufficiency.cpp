#include "fallingballs/sufficiency.hpp"

#include "fallingballs/errors.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace fallingballs {

namespace {

void check_labels(std::size_t n, const std::vector<Label>& labels) {
    if (n < 2) {
        throw DomainError("sequences need n >= 2");
    }
    for (Label l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= n) {
            throw DomainError("label " + std::to_string(l) + " out of range for n=" + std::to_string(n));
        }
    }
}

int parse_index(std::string_view s, std::string_view token) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError("malformed collision label '" + std::string(token) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

// Left multiplication by R_i^T acts on two coordinates of a column vector.
void apply_reflection_transpose(RationalVector& x, Label label, const Rational& g) {
    const std::size_t a = static_cast<std::size_t>(label) - 1;
    const std::size_t b = a + 1;
    const Rational xa = x[a];
    const Rational xb = x[b];
    x[a] = g * xa + (1 + g) * xb;
    x[b] = (1 - g) * xa - g * xb;
}

std::vector<Rational> gammas_of(const ExactMasses& masses) {
    std::vector<Rational> g(masses.size(), Rational(0));
    for (std::size_t l = 1; l < masses.size(); ++l) g[l] = masses.gamma(static_cast<Label>(l));
    return g;
}

} // namespace

SymbolicSequence::SymbolicSequence(std::size_t n_, std::vector<Label> labels_) : n(n_), labels(std::move(labels_)) {
    check_labels(n, labels);
}

bool SymbolicSequence::has_floor() const noexcept {
    return std::find(labels.begin(), labels.end(), floor_label) != labels.end();
}

SymbolicSequence parse_sequence(std::string_view text, std::optional<std::size_t> n) {
    std::vector<Label> labels;
    std::size_t largest = 0;
    text = trim(text);
    std::size_t start = 0;
    while (!text.empty() && start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto token = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        const auto dash = token.find('-');
        if (dash == std::string_view::npos) {
            throw ParseError("collision label '" + std::string(token) + "' is not of the form i-j");
        }
        const int i = parse_index(trim(token.substr(0, dash)), token);
        const int j = parse_index(trim(token.substr(dash + 1)), token);
        if (i < 0 || j != i + 1) {
            throw ParseError("collision label '" + std::string(token) + "' must be i-(i+1)");
        }
        labels.push_back(i);
        largest = std::max(largest, static_cast<std::size_t>(j));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    const std::size_t count = n.value_or(largest);
    if (count < largest) {
        throw ParseError("sequence mentions ball " + std::to_string(largest) + " but n=" + std::to_string(count));
    }
    try {
        return SymbolicSequence(count, std::move(labels));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

std::string format_sequence(const SymbolicSequence& seq) {
    std::string out;
    for (std::size_t k = 0; k < seq.labels.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(seq.labels[k]) + "-" + std::to_string(seq.labels[k] + 1);
    }
    return out;
}

ExtendedSequence::ExtendedSequence(std::size_t n_, std::vector<ExtendedEntry> entries_)
    : n(n_), entries(std::move(entries_)) {
    std::vector<Label> labels;
    for (const auto& e : entries) {
        if (!(e.rho > 0.0)) throw DomainError("extended sequence needs rho > 0");
        labels.push_back(e.label);
    }
    check_labels(n, labels);
}

ExtendedSequence ExtendedSequence::from_events(std::span<const CollisionEvent> events, std::size_t n) {
    std::vector<ExtendedEntry> entries;
    entries.reserve(events.size());
    for (const auto& e : events) entries.push_back({e.label, e.rho});
    return {n, std::move(entries)};
}

SymbolicSequence ExtendedSequence::symbols() const {
    std::vector<Label> labels;
    labels.reserve(entries.size());
    for (const auto& e : entries) labels.push_back(e.label);
    return {n, std::move(labels)};
}

std::size_t CollisionGraph::edge_count() const noexcept {
    return static_cast<std::size_t>(std::count(has_label.begin(), has_label.end(), true));
}

CollisionGraph collision_graph(const SymbolicSequence& seq) {
    CollisionGraph g;
    g.n = seq.n;
    g.has_label.assign(seq.n, false);
    for (Label l : seq.labels) g.has_label[static_cast<std::size_t>(l)] = true;
    // Balls form a path; each missing pair label splits one more component off.
    g.ball_components = 1;
    for (std::size_t l = 1; l < seq.n; ++l) {
        if (!g.has_label[l]) ++g.ball_components;
    }
    return g;
}

std::size_t neutral_velocity_space(const SymbolicSequence& seq) {
    return collision_graph(seq).ball_components - 1;
}

RationalMatrix homogeneous_system(const SymbolicSequence& seq, const ExactMasses& masses) {
    if (masses.size() != seq.n) {
        throw DomainError("mass count does not match the sequence");
    }
    const std::size_t n = seq.n;
    const auto gammas = gammas_of(masses);
    // Rows of P = R^T_{i_k} ... R^T_{i_1}; left multiplication mixes two rows.
    RationalMatrix p(n, RationalVector(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) p[i][i] = 1;

    RationalMatrix rows;
    for (Label l : seq.labels) {
        if (l == floor_label) {
            rows.push_back(p[0]);
            continue;
        }
        const std::size_t a = static_cast<std::size_t>(l) - 1;
        const std::size_t b = a + 1;
        const Rational& g = gammas[static_cast<std::size_t>(l)];
        for (std::size_t j = 0; j < n; ++j) {
            const Rational pa = p[a][j];
            const Rational pb = p[b][j];
            p[a][j] = g * pa + (1 + g) * pb;
            p[b][j] = (1 - g) * pa - g * pb;
        }
    }
    return rows;
}

NeutralSpaceReport neutral_space_unchecked(const SymbolicSequence& seq, const ExactMasses& masses) {
    RationalMatrix rows = homogeneous_system(seq, masses);
    rows.emplace_back(seq.n, Rational(1)); // sum dh = 0
    NeutralSpaceReport report;
    report.basis = nullspace(std::move(rows), seq.n);
    report.dimension = report.basis.size();
    report.sufficient = report.dimension == 0;
    return report;
}

NeutralSpaceReport neutral_space(const SymbolicSequence& seq, const ExactMasses& masses) {
    if (!collision_graph(seq).balls_connected()) {
        throw PreconditionViolated("ball-collision graph of '" + format_sequence(seq) +
                                   "' is disconnected; the homogeneous system does not describe the neutral space");
    }
    return neutral_space_unchecked(seq, masses);
}

bool is_sufficient(const SymbolicSequence& seq, const ExactMasses& masses) {
    return neutral_space(seq, masses).sufficient;
}

NeutralTracker::NeutralTracker(ExactMasses masses)
    : masses_(std::move(masses)), gammas_(gammas_of(masses_)), components_(masses_.size()) {
    const std::size_t n = masses_.size();
    for (std::size_t j = 1; j < n; ++j) {
        RationalVector v(n, Rational(0));
        v[0] = 1;
        v[j] = -1;
        pairs_.push_back({v, v});
    }
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t NeutralTracker::find(std::size_t ball) {
    while (parent_[ball] != ball) {
        parent_[ball] = parent_[parent_[ball]];
        ball = parent_[ball];
    }
    return ball;
}

void NeutralTracker::push(Label label) {
    const std::size_t n = masses_.size();
    if (label < 0 || static_cast<std::size_t>(label) >= n) {
        throw DomainError("label out of range");
    }
    ++pushed_;
    if (label != floor_label) {
        const auto a = find(static_cast<std::size_t>(label) - 1);
        const auto b = find(static_cast<std::size_t>(label));
        if (a != b) {
            parent_[a] = b;
            --components_;
        }
        for (auto& p : pairs_) apply_reflection_transpose(p.image, label, gammas_[static_cast<std::size_t>(label)]);
        return;
    }
    // Floor: restrict to vectors whose current image has dh_1 = 0.
    const auto pivot = std::find_if(pairs_.begin(), pairs_.end(), [](const Pair& p) { return sgn(p.image[0]) != 0; });
    if (pivot == pairs_.end()) return;
    const Pair piv = *pivot;
    pairs_.erase(pivot);
    for (auto& p : pairs_) {
        if (sgn(p.image[0]) == 0) continue;
        const Rational f = p.image[0] / piv.image[0];
        for (std::size_t j = 0; j < n; ++j) {
            p.initial[j] -= f * piv.initial[j];
            p.image[j] -= f * piv.image[j];
        }
    }
    // Joint scaling keeps initial and image consistent while controlling coefficient growth.
    for (auto& p : pairs_) {
        RationalVector joint = p.initial;
        joint.insert(joint.end(), p.image.begin(), p.image.end());
        make_primitive(joint);
        std::copy(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(n), p.initial.begin());
        std::copy(joint.begin() + static_cast<std::ptrdiff_t>(n), joint.end(), p.image.begin());
    }
}

std::vector<RationalVector> NeutralTracker::basis() const {
    std::vector<RationalVector> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.initial);
    return out;
}

ExactMasses random_strict_masses(std::size_t n, std::uint64_t seed, std::uint64_t stream, const MassSampling& sampling) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d617373u};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::int64_t> draw(1, sampling.bound);
    while (true) {
        std::vector<Rational> values;
        values.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const mpz_class num(static_cast<long>(draw(rng)));
            const mpz_class den(static_cast<long>(draw(rng)));
            Rational r(num, den);
            r.canonicalize();
            values.push_back(r);
        }
        std::sort(values.begin(), values.end(), [](const Rational& a, const Rational& b) { return a > b; });
        if (std::adjacent_find(values.begin(), values.end()) == values.end()) {
            return ExactMasses(std::move(values), MassOrdering::strictly_decreasing);
        }
    }
}

Classification classify_sequence(const SymbolicSequence& seq, std::size_t trials, std::uint64_t seed,
                                 const MassSampling& sampling) {
    if (!collision_graph(seq).balls_connected()) {
        throw PreconditionViolated("cannot classify '" + format_sequence(seq) + "': ball-collision graph disconnected");
    }
    Classification c;
    if (!seq.has_floor()) {
        // No equations for any mass vector.
        c.verdict = Dichotomy::D2;
        c.certified = true;
        return c;
    }
    for (std::size_t t = 0; t < trials; ++t) {
        ExactMasses masses = random_strict_masses(seq.n, seed, t, sampling);
        ++c.trials_run;
        if (neutral_space(seq, masses).sufficient) {
            c.verdict = Dichotomy::D1;
            c.certified = true;
            c.witness = std::move(masses);
            c.witness_trial = t;
            return c;
        }
    }
    c.verdict = Dichotomy::D2;
    c.certified = false;
    return c;
}

std::string to_string(Dichotomy d) { return d == Dichotomy::D1 ? "D1" : "D2"; }

bool is_dynamically_admissible(const SymbolicSequence& seq) {
    // last[l]: index of the previous occurrence of pair l; seen_since[l]: a neighbour pair
    // collided after it.
    std::vector<std::ptrdiff_t> last(seq.n, -1);
    std::vector<bool> touched(seq.n, false);
    for (std::size_t k = 0; k < seq.labels.size(); ++k) {
        const auto l = static_cast<std::size_t>(seq.labels[k]);
        if (l != 0 && last[l] >= 0 && !touched[l]) {
            return false;
        }
        last[l] = static_cast<std::ptrdiff_t>(k);
        touched[l] = false;
        if (l >= 1) touched[l - 1] = true;
        if (l + 1 < seq.n) touched[l + 1] = true;
    }
    return true;
}

ExtendedSequence insert(const ExtendedSequence& seq, const Insertion& insertion) {
    if (insertion.position > seq.entries.size()) {
        throw DomainError("insertion position past the end");
    }
    auto entries = seq.entries;
    entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(insertion.position), {insertion.label, insertion.rho});
    return {seq.n, std::move(entries)};
}

bool cmp_check(const ExtendedSequence& seq, const Insertion& insertion, const ExactMasses& masses) {
    if (!is_sufficient(seq.symbols(), masses)) {
        throw PreconditionViolated("cmp_check needs a sufficient base sequence");
    }
    return is_sufficient(insert(seq, insertion).symbols(), masses);
}

SymbolicSequence masked(const SymbolicSequence& seq, const std::vector<bool>& mask) {
    if (mask.size() != seq.labels.size()) {
        throw DomainError("mask length differs from the sequence length");
    }
    std::vector<Label> labels;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) labels.push_back(seq.labels[k]);
    }
    return {seq.n, std::move(labels)};
}

bool subsequence_monotonicity_check(const SymbolicSequence& seq, const std::vector<bool>& mask,
                                    const ExactMasses& masses) {
    const SymbolicSequence sub = masked(seq, mask);
    if (!collision_graph(sub).balls_connected() || !is_sufficient(sub, masses)) {
        throw PreconditionViolated("subsequence '" + format_sequence(sub) + "' is not sufficient");
    }
    return is_sufficient(seq, masses);
}

} // namespace fallingballs
