#include "fallingballs/masses.hpp"

#include "fallingballs/errors.hpp"

#include <algorithm>
#include <sstream>

namespace fallingballs {

MassVector::MassVector(std::vector<double> values, MassOrdering ordering)
    : values_(std::move(values)), ordering_(ordering) {
    if (values_.size() < 2) {
        throw DomainError("mass vector needs at least two balls");
    }
    for (double m : values_) {
        if (!(m > 0.0)) {
            throw DomainError("masses must be positive");
        }
    }
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        const double a = values_[i];
        const double b = values_[i + 1];
        if (ordering_ == MassOrdering::non_increasing && a < b) {
            throw DomainError("masses must be non-increasing: " + to_string());
        }
        if (ordering_ == MassOrdering::strictly_decreasing && !(a > b)) {
            throw DomainError("masses must be strictly decreasing: " + to_string());
        }
    }
}

double MassVector::gamma(Label label) const {
    check_ball_label(label, size());
    const double a = values_[label - 1];
    const double b = values_[label];
    return (a - b) / (a + b);
}

double MassVector::alpha_factor(Label label) const {
    check_ball_label(label, size());
    const double a = values_[label - 1];
    const double b = values_[label];
    const double s = a + b;
    return 2.0 * a * b * (a - b) / (s * s);
}

bool MassVector::all_equal() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [&](double m) { return m == values_.front(); });
}

std::string MassVector::to_string() const {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < values_.size(); ++i) {
        out << (i ? ", " : "") << values_[i];
    }
    out << ')';
    return out.str();
}

void check_ball_label(Label label, std::size_t n) {
    if (label < 1 || static_cast<std::size_t>(label) >= n) {
        throw DomainError("ball pair label " + std::to_string(label) + " out of range for n=" + std::to_string(n));
    }
}

} // namespace fallingballs
