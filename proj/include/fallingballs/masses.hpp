#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fallingballs {

// Collision label: 0 is the floor collision (0,1); i >= 1 is the ball pair (i, i+1),
// i.e. zero-based balls i-1 and i.
using Label = int;

inline constexpr Label floor_label = 0;

enum class MassOrdering {
    non_increasing,      // m1 >= m2 >= ... >= mn
    strictly_decreasing, // m1 > m2 > ... > mn
    unordered,           // any positive masses (e.g. the m1 < m2 stability experiment)
};

// The ordered mass tuple of an n-ball system.
class MassVector {
public:
    explicit MassVector(std::vector<double> values, MassOrdering ordering = MassOrdering::non_increasing);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t ball) const { return values_[ball]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] MassOrdering ordering() const noexcept { return ordering_; }

    // gamma_i = (m_i - m_{i+1}) / (m_i + m_{i+1}) for the ball pair `label`.
    [[nodiscard]] double gamma(Label label) const;

    // 2 m_i m_{i+1} (m_i - m_{i+1}) / (m_i + m_{i+1})^2; alpha_i is this times the impact speed.
    [[nodiscard]] double alpha_factor(Label label) const;

    [[nodiscard]] bool all_equal() const noexcept;

    [[nodiscard]] std::string to_string() const;

private:
    std::vector<double> values_;
    MassOrdering ordering_;
};

// Throws DomainError unless 1 <= label <= n-1.
void check_ball_label(Label label, std::size_t n);

} // namespace fallingballs
