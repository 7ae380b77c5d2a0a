#include "fallingballs/rational.hpp"

#include "fallingballs/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fallingballs {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) {
        throw ParseError("malformed rational '" + std::string(whole) + "'");
    }
    mpz_class z(std::string(s), 10);
    return negative ? mpz_class(-z) : z;
}

} // namespace

Rational parse_rational(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.empty()) {
        throw ParseError("empty rational");
    }
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const mpz_class num = parse_integer(trim(s.substr(0, slash)), s);
        const mpz_class den = parse_integer(trim(s.substr(slash + 1)), s);
        if (den == 0) {
            throw ParseError("zero denominator in '" + std::string(s) + "'");
        }
        Rational r(num, den);
        r.canonicalize();
        return r;
    }
    if (const auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = s.substr(0, dot);
        std::string_view frac_part = s.substr(dot + 1);
        bool negative = false;
        if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
            negative = int_part.front() == '-';
            int_part.remove_prefix(1);
        }
        if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
            (int_part.empty() && frac_part.empty())) {
            throw ParseError("malformed rational '" + std::string(s) + "'");
        }
        mpz_class digits(std::string(int_part) + std::string(frac_part), 10);
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
        Rational r(negative ? mpz_class(-digits) : digits, scale);
        r.canonicalize();
        return r;
    }
    return Rational(parse_integer(s, s));
}

std::string format_rational(const Rational& value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational exact_rational(double value) {
    if (!std::isfinite(value)) {
        throw DomainError("cannot rationalize a non-finite value");
    }
    Rational r(value); // mpq_set_d is exact
    r.canonicalize();
    return r;
}

ExactMasses::ExactMasses(std::vector<Rational> values, MassOrdering ordering)
    : values_(std::move(values)), ordering_(ordering) {
    if (values_.size() < 2) {
        throw DomainError("mass vector needs at least two balls");
    }
    for (auto& m : values_) {
        m.canonicalize();
        if (sgn(m) <= 0) {
            throw DomainError("masses must be positive");
        }
    }
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        if (ordering_ == MassOrdering::non_increasing && values_[i] < values_[i + 1]) {
            throw DomainError("masses must be non-increasing: " + to_string());
        }
        if (ordering_ == MassOrdering::strictly_decreasing && !(values_[i] > values_[i + 1])) {
            throw DomainError("masses must be strictly decreasing: " + to_string());
        }
    }
}

ExactMasses ExactMasses::from(const MassVector& masses) {
    std::vector<Rational> values;
    values.reserve(masses.size());
    for (double m : masses.values()) {
        values.push_back(exact_rational(m));
    }
    return ExactMasses(std::move(values), masses.ordering());
}

Rational ExactMasses::gamma(Label label) const {
    check_ball_label(label, size());
    const Rational& a = values_[label - 1];
    const Rational& b = values_[label];
    Rational g = (a - b) / (a + b);
    g.canonicalize();
    return g;
}

MassVector ExactMasses::to_mass_vector() const {
    std::vector<double> values;
    values.reserve(values_.size());
    for (const auto& m : values_) {
        values.push_back(m.get_d());
    }
    // Rounding may merge distinct rationals, so only keep the weak ordering requirement.
    const auto ordering = ordering_ == MassOrdering::strictly_decreasing ? MassOrdering::non_increasing : ordering_;
    return MassVector(std::move(values), ordering);
}

std::string ExactMasses::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out += ',';
        out += format_rational(values_[i]);
    }
    return out;
}

ExactMasses parse_exact_masses(std::string_view text, MassOrdering ordering) {
    std::vector<Rational> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        values.push_back(parse_rational(piece));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    try {
        return ExactMasses(std::move(values), ordering);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

namespace {

// In-place Gauss-Jordan elimination; returns pivot columns.
std::vector<std::size_t> reduce(RationalMatrix& rows, std::size_t columns) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < columns && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && sgn(rows[p][c]) == 0) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[r], rows[p]);
        const Rational inv = 1 / rows[r][c];
        for (std::size_t j = c; j < columns; ++j) rows[r][j] *= inv;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (k == r || sgn(rows[k][c]) == 0) continue;
            const Rational f = rows[k][c];
            for (std::size_t j = c; j < columns; ++j) rows[k][j] -= f * rows[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace

std::vector<RationalVector> nullspace(RationalMatrix rows, std::size_t columns) {
    for (const auto& row : rows) {
        if (row.size() != columns) throw DomainError("ragged matrix in nullspace");
    }
    const auto pivots = reduce(rows, columns);
    std::vector<bool> is_pivot(columns, false);
    for (auto c : pivots) is_pivot[c] = true;

    std::vector<RationalVector> basis;
    for (std::size_t f = 0; f < columns; ++f) {
        if (is_pivot[f]) continue;
        RationalVector x(columns, Rational(0));
        x[f] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            x[pivots[r]] = -rows[r][f];
        }
        make_primitive(x);
        basis.push_back(std::move(x));
    }
    return basis;
}

std::size_t rank(RationalMatrix rows, std::size_t columns) {
    return reduce(rows, columns).size();
}

void make_primitive(RationalVector& v) {
    mpz_class den_lcm = 1;
    for (const auto& x : v) {
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), x.get_den_mpz_t());
    }
    mpz_class num_gcd = 0;
    for (const auto& x : v) {
        const mpz_class scaled = x.get_num() * (den_lcm / x.get_den());
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
    }
    if (num_gcd == 0) return;
    const Rational factor(den_lcm, num_gcd);
    for (auto& x : v) {
        x *= factor;
        x.canonicalize();
    }
}

} // namespace fallingballs
