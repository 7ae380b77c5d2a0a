#pragma once

#include "fallingballs/masses.hpp"

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace fallingballs {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>; // row-major

// Parses "p/q", "p" or a plain decimal ("0.25"), canonicalized.
[[nodiscard]] Rational parse_rational(std::string_view text);

// "p/q" (always with a denominator, "3/1" for integers).
[[nodiscard]] std::string format_rational(const Rational& value);

// Exact value of a finite double.
[[nodiscard]] Rational exact_rational(double value);

// Masses as exact rationals, for the neutral-space linear algebra.
class ExactMasses {
public:
    explicit ExactMasses(std::vector<Rational> values, MassOrdering ordering = MassOrdering::non_increasing);

    // Exact rationalization of a floating-point mass vector.
    [[nodiscard]] static ExactMasses from(const MassVector& masses);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const Rational& operator[](std::size_t ball) const { return values_[ball]; }
    [[nodiscard]] const std::vector<Rational>& values() const noexcept { return values_; }

    // gamma_i as an exact rational for the ball pair `label`.
    [[nodiscard]] Rational gamma(Label label) const;

    [[nodiscard]] MassVector to_mass_vector() const;
    [[nodiscard]] std::string to_string() const; // comma-separated p/q list

    friend bool operator==(const ExactMasses& a, const ExactMasses& b) { return a.values_ == b.values_; }

private:
    std::vector<Rational> values_;
    MassOrdering ordering_;
};

// Parses a comma-separated list of rationals ("2/1,1/1").
[[nodiscard]] ExactMasses parse_exact_masses(std::string_view text, MassOrdering ordering = MassOrdering::non_increasing);

// Row-reduces `rows` (each of length `columns`) and returns a basis of {x : rows * x = 0}.
// Basis vectors are scaled to primitive integer vectors.
[[nodiscard]] std::vector<RationalVector> nullspace(RationalMatrix rows, std::size_t columns);

[[nodiscard]] std::size_t rank(RationalMatrix rows, std::size_t columns);

// Scales v by a positive rational so that it becomes a primitive integer vector. Zero stays zero.
void make_primitive(RationalVector& v);

} // namespace fallingballs
