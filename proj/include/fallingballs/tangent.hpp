#pragma once

// Derivative cocycle of the flow in (dh, dv) coordinates, dh_i = m_i dq_i + m_i v_i dv_i.
// Between collisions the cocycle is the identity, so DS^T is the ordered product of the
// per-collision maps below.

#include "fallingballs/dynamics.hpp"
#include "fallingballs/masses.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace fallingballs {

struct TangentVector {
    std::vector<double> dh;
    std::vector<double> dv;

    TangentVector() = default;
    TangentVector(std::vector<double> dh_, std::vector<double> dv_);

    [[nodiscard]] static TangentVector zero(std::size_t n);

    // Tangent to the energy surface: throws DomainError unless |sum dh| <= 1e-12 |u|.
    [[nodiscard]] static TangentVector on_energy_surface(std::vector<double> dh, std::vector<double> dv);

    // From configuration-space variations (dq, dv) at `state`.
    [[nodiscard]] static TangentVector from_configuration(std::span<const double> dq, std::span<const double> dv,
                                                          const PhaseState& state, const MassVector& masses);

    [[nodiscard]] std::size_t size() const noexcept { return dh.size(); }
    [[nodiscard]] double sum_dh() const noexcept;
    [[nodiscard]] double sum_dv() const noexcept;
    [[nodiscard]] double norm() const noexcept;

    // dq_i = (dh_i - m_i v_i dv_i) / m_i
    [[nodiscard]] std::vector<double> dq(const PhaseState& state, const MassVector& masses) const;
    // dp_i = m_i dv_i
    [[nodiscard]] std::vector<double> dp(const MassVector& masses) const;

    // Stacked (dh, dv).
    [[nodiscard]] Eigen::VectorXd stacked() const;
    [[nodiscard]] static TangentVector unstack(const Eigen::Ref<const Eigen::VectorXd>& x);
};

// Q1 = sum dh_i dv_i.
[[nodiscard]] double q_form(const TangentVector& u);

// omega(u, w) = sum (u.dh_i w.dv_i - u.dv_i w.dh_i).
[[nodiscard]] double symplectic_form(const TangentVector& u, const TangentVector& w);

// Canonical 2n x 2n matrix J with omega(u, w) = u^T J w in stacked coordinates.
[[nodiscard]] Eigen::MatrixXd symplectic_matrix(std::size_t n);

// Structured per-collision map. Ball pair i:
//   dh+ = R_i^T (dh + S_i dv),  dv+ = R_i dv,
// where R_i is the identity except the block [[g, 1-g], [1+g, -g]] and S_i is zero except
// alpha [[1, -1], [-1, 1]]. Floor: dv_1 += 2 dh_1 / (m_1 v_1^+).
class CollisionDerivative {
public:
    enum class Kind { ball, floor };

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] Label label() const noexcept { return label_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    // 2 / (m_1 v_1^+) for a floor map.
    [[nodiscard]] double shear() const noexcept { return shear_; }

    void apply(TangentVector& u) const;
    // Applies the map to every column of a stacked 2n x k frame.
    void apply(Eigen::Ref<Eigen::MatrixXd> frame) const;

    // Increment of Q1 predicted for a vector just before the collision:
    // alpha (dv_i - dv_{i+1})^2 for a ball pair, 2 dh_1^2 / (m_1 v_1^+) at the floor.
    [[nodiscard]] double q_increment(const TangentVector& before) const;

    [[nodiscard]] Eigen::MatrixXd dense() const;

private:
    friend CollisionDerivative ball_derivative(Label, double, const MassVector&);
    friend CollisionDerivative floor_derivative(double, const MassVector&);

    Kind kind_ = Kind::floor;
    Label label_ = floor_label;
    std::size_t n_ = 0;
    double gamma_ = 0.0;
    double alpha_ = 0.0;
    double shear_ = 0.0;
};

// Throws DomainError for rho <= 0 or an invalid label.
[[nodiscard]] CollisionDerivative ball_derivative(Label label, double rho, const MassVector& masses);

// Throws DomainError for v1_plus <= 0.
[[nodiscard]] CollisionDerivative floor_derivative(double v1_plus, const MassVector& masses);

[[nodiscard]] CollisionDerivative derivative_of(const CollisionEvent& event, const MassVector& masses);

// Called after each event with the event index and the updated frame.
using FrameObserver = std::function<void(std::size_t, const std::vector<TangentVector>&)>;

// Maps each vector through the product of collision derivatives of `events`, in order.
[[nodiscard]] std::vector<TangentVector> push_frame(std::vector<TangentVector> frame,
                                                    std::span<const CollisionEvent> events,
                                                    const MassVector& masses, const FrameObserver& observer = {});

// Dense 2n x 2n product D_N ... D_1.
[[nodiscard]] Eigen::MatrixXd cocycle_matrix(std::span<const CollisionEvent> events, const MassVector& masses);

} // namespace fallingballs
