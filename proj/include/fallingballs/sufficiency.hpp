#pragma once

// Symbolic collision sequences and their neutral spaces.
//
// A neutral vector keeps Q1 = 0 along the whole segment. Such a vector has dv = 0 throughout,
// dh evolves by dh -> R_i^T dh at ball collisions and must satisfy dh_1 = 0 at every floor
// collision. The neutral space is therefore the solution set of the homogeneous system
//
//     e_1^T R^T_{i_k} ... R^T_{i_1} dh = 0   for every floor position k,   sum dh = 0,
//
// valid when the ball-collision graph on {1..n} is connected. All of it runs in exact rational
// arithmetic.

#include "fallingballs/dynamics.hpp"
#include "fallingballs/rational.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fallingballs {

struct SymbolicSequence {
    std::size_t n = 0;
    std::vector<Label> labels;

    SymbolicSequence() = default;
    SymbolicSequence(std::size_t n_, std::vector<Label> labels_);

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] bool has_floor() const noexcept;

    friend bool operator==(const SymbolicSequence&, const SymbolicSequence&) = default;
};

// "0-1,1-2,0-1". Without `n` the particle count is the largest right index.
[[nodiscard]] SymbolicSequence parse_sequence(std::string_view text, std::optional<std::size_t> n = std::nullopt);
[[nodiscard]] std::string format_sequence(const SymbolicSequence& seq);

struct ExtendedEntry {
    Label label = floor_label;
    double rho = 0.0;
};

struct ExtendedSequence {
    std::size_t n = 0;
    std::vector<ExtendedEntry> entries;

    ExtendedSequence() = default;
    ExtendedSequence(std::size_t n_, std::vector<ExtendedEntry> entries_);

    [[nodiscard]] static ExtendedSequence from_events(std::span<const CollisionEvent> events, std::size_t n);
    [[nodiscard]] SymbolicSequence symbols() const;
};

struct CollisionGraph {
    std::size_t n = 0;
    std::vector<bool> has_label; // indexed by label 0..n-1; edge {i, i+1}
    std::size_t ball_components = 0;

    [[nodiscard]] bool balls_connected() const noexcept { return ball_components == 1; }
    [[nodiscard]] std::size_t edge_count() const noexcept;
};

[[nodiscard]] CollisionGraph collision_graph(const SymbolicSequence& seq);

// Dimension of the (0, dv)-neutral space: dv constant on ball components, sum dv = 0.
[[nodiscard]] std::size_t neutral_velocity_space(const SymbolicSequence& seq);

struct NeutralSpaceReport {
    std::size_t dimension = 0;
    std::vector<RationalVector> basis; // dh(0) vectors, primitive integer scaling
    bool sufficient = false;
};

// Floor rows e_1^T R^T_{i_k} ... R^T_{i_1}, one per floor collision, in sequence order.
[[nodiscard]] RationalMatrix homogeneous_system(const SymbolicSequence& seq, const ExactMasses& masses);

// Throws PreconditionViolated when the ball-collision graph is disconnected.
[[nodiscard]] NeutralSpaceReport neutral_space(const SymbolicSequence& seq, const ExactMasses& masses);

// Kernel of the homogeneous system without the connectivity precondition.
[[nodiscard]] NeutralSpaceReport neutral_space_unchecked(const SymbolicSequence& seq, const ExactMasses& masses);

[[nodiscard]] bool is_sufficient(const SymbolicSequence& seq, const ExactMasses& masses);

// Prefix-incremental neutral space. Both the dh kernel dimension and connectivity are
// monotone in the prefix, so this finds sufficiency onsets in one pass.
class NeutralTracker {
public:
    explicit NeutralTracker(ExactMasses masses);

    void push(Label label);

    [[nodiscard]] std::size_t dimension() const noexcept { return pairs_.size(); }
    [[nodiscard]] std::size_t ball_components() const noexcept { return components_; }
    [[nodiscard]] bool balls_connected() const noexcept { return components_ == 1; }
    [[nodiscard]] bool sufficient() const noexcept { return balls_connected() && pairs_.empty(); }
    [[nodiscard]] std::size_t pushed() const noexcept { return pushed_; }
    [[nodiscard]] std::vector<RationalVector> basis() const;

private:
    struct Pair {
        RationalVector initial; // dh(0)
        RationalVector image;   // dh at the current instant
    };

    std::size_t find(std::size_t ball);

    ExactMasses masses_;
    std::vector<Rational> gammas_; // by label
    std::vector<Pair> pairs_;
    std::vector<std::size_t> parent_;
    std::size_t components_;
    std::size_t pushed_ = 0;
};

enum class Dichotomy { D1, D2 };

struct Classification {
    Dichotomy verdict = Dichotomy::D2;
    // D1 is always certified by its witness; D2 only for structural reasons (no floor collision).
    bool certified = false;
    std::optional<ExactMasses> witness;
    std::size_t witness_trial = 0;
    std::size_t trials_run = 0;
};

struct MassSampling {
    std::int64_t bound = 10000; // numerators and denominators drawn from [1, bound]
};

// Random strictly decreasing rational masses; deterministic in (seed, stream).
[[nodiscard]] ExactMasses random_strict_masses(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                                               const MassSampling& sampling = {});

// D1 with the first sufficient trial as witness, else D2 ("presumed" unless certified).
// Throws PreconditionViolated for a disconnected ball-collision graph.
[[nodiscard]] Classification classify_sequence(const SymbolicSequence& seq, std::size_t trials, std::uint64_t seed,
                                               const MassSampling& sampling = {});

[[nodiscard]] std::string to_string(Dichotomy d);

// Necessary condition for a sequence to come from an actual trajectory: between two
// collisions of pair i there is a collision of pair i-1 or i+1 (pair 0 is the floor).
[[nodiscard]] bool is_dynamically_admissible(const SymbolicSequence& seq);

struct Insertion {
    std::size_t position = 0; // new entry lands at this index
    Label label = floor_label;
    double rho = 1.0;
};

[[nodiscard]] ExtendedSequence insert(const ExtendedSequence& seq, const Insertion& insertion);

// Whether the sequence with the extra collision is still sufficient. Throws
// PreconditionViolated unless `seq` is sufficient. The answer can be false: an insertion maps
// the cone into itself but not necessarily the image cone of the prefix into itself. Repeating
// a pair with nothing in between is the simplest case; dynamically admissible failures exist too.
[[nodiscard]] bool cmp_check(const ExtendedSequence& seq, const Insertion& insertion, const ExactMasses& masses);

// Whether seq is sufficient, given that the masked subsequence is (PreconditionViolated otherwise).
[[nodiscard]] bool subsequence_monotonicity_check(const SymbolicSequence& seq, const std::vector<bool>& mask,
                                                  const ExactMasses& masses);

[[nodiscard]] SymbolicSequence masked(const SymbolicSequence& seq, const std::vector<bool>& mask);

} // namespace fallingballs
