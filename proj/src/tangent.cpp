#include "fallingballs/tangent.hpp"

#include "fallingballs/errors.hpp"

#include <cmath>
#include <numeric>

namespace fallingballs {

TangentVector::TangentVector(std::vector<double> dh_, std::vector<double> dv_)
    : dh(std::move(dh_)), dv(std::move(dv_)) {
    if (dh.size() != dv.size()) {
        throw DomainError("tangent vector halves differ in size");
    }
}

TangentVector TangentVector::zero(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

TangentVector TangentVector::on_energy_surface(std::vector<double> dh, std::vector<double> dv) {
    TangentVector u(std::move(dh), std::move(dv));
    if (std::abs(u.sum_dh()) > 1e-12 * u.norm()) {
        throw DomainError("tangent vector is not tangent to the energy surface (sum dh != 0)");
    }
    return u;
}

TangentVector TangentVector::from_configuration(std::span<const double> dq, std::span<const double> dv,
                                                const PhaseState& state, const MassVector& masses) {
    const std::size_t n = masses.size();
    TangentVector u = zero(n);
    for (std::size_t i = 0; i < n; ++i) {
        u.dh[i] = masses[i] * dq[i] + masses[i] * state.v[i] * dv[i];
        u.dv[i] = dv[i];
    }
    return u;
}

double TangentVector::sum_dh() const noexcept { return std::accumulate(dh.begin(), dh.end(), 0.0); }
double TangentVector::sum_dv() const noexcept { return std::accumulate(dv.begin(), dv.end(), 0.0); }

double TangentVector::norm() const noexcept {
    double s = 0.0;
    for (double x : dh) s += x * x;
    for (double x : dv) s += x * x;
    return std::sqrt(s);
}

std::vector<double> TangentVector::dq(const PhaseState& state, const MassVector& masses) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out[i] = (dh[i] - masses[i] * state.v[i] * dv[i]) / masses[i];
    }
    return out;
}

std::vector<double> TangentVector::dp(const MassVector& masses) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = masses[i] * dv[i];
    return out;
}

Eigen::VectorXd TangentVector::stacked() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::VectorXd x(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = dh[static_cast<std::size_t>(i)];
        x[n + i] = dv[static_cast<std::size_t>(i)];
    }
    return x;
}

TangentVector TangentVector::unstack(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const auto n = x.size() / 2;
    TangentVector u = zero(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        u.dh[static_cast<std::size_t>(i)] = x[i];
        u.dv[static_cast<std::size_t>(i)] = x[n + i];
    }
    return u;
}

double q_form(const TangentVector& u) {
    double q = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) q += u.dh[i] * u.dv[i];
    return q;
}

double symplectic_form(const TangentVector& u, const TangentVector& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u.dh[i] * w.dv[i] - u.dv[i] * w.dh[i];
    return s;
}

Eigen::MatrixXd symplectic_matrix(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    j.topRightCorner(k, k).setIdentity();
    j.bottomLeftCorner(k, k) = -Eigen::MatrixXd::Identity(k, k);
    return j;
}

void CollisionDerivative::apply(TangentVector& u) const {
    if (kind_ == Kind::floor) {
        u.dv[0] += shear_ * u.dh[0];
        return;
    }
    const std::size_t a = static_cast<std::size_t>(label_) - 1;
    const std::size_t b = a + 1;
    const double g = gamma_;
    const double d = alpha_ * (u.dv[a] - u.dv[b]);
    const double x = u.dh[a] + d;
    const double y = u.dh[b] - d;
    u.dh[a] = g * x + (1.0 + g) * y;
    u.dh[b] = (1.0 - g) * x - g * y;
    const double va = u.dv[a];
    const double vb = u.dv[b];
    u.dv[a] = g * va + (1.0 - g) * vb;
    u.dv[b] = (1.0 + g) * va - g * vb;
}

void CollisionDerivative::apply(Eigen::Ref<Eigen::MatrixXd> frame) const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (kind_ == Kind::floor) {
        frame.row(n) += shear_ * frame.row(0);
        return;
    }
    const auto a = static_cast<Eigen::Index>(label_) - 1;
    const auto b = a + 1;
    const double g = gamma_;
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
        const double d = alpha_ * (frame(n + a, c) - frame(n + b, c));
        const double x = frame(a, c) + d;
        const double y = frame(b, c) - d;
        frame(a, c) = g * x + (1.0 + g) * y;
        frame(b, c) = (1.0 - g) * x - g * y;
        const double va = frame(n + a, c);
        const double vb = frame(n + b, c);
        frame(n + a, c) = g * va + (1.0 - g) * vb;
        frame(n + b, c) = (1.0 + g) * va - g * vb;
    }
}

double CollisionDerivative::q_increment(const TangentVector& before) const {
    if (kind_ == Kind::floor) {
        return shear_ * before.dh[0] * before.dh[0];
    }
    const std::size_t a = static_cast<std::size_t>(label_) - 1;
    const double d = before.dv[a] - before.dv[a + 1];
    return alpha_ * d * d;
}

Eigen::MatrixXd CollisionDerivative::dense() const {
    const auto k = static_cast<Eigen::Index>(2 * n_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
    apply(m);
    return m;
}

CollisionDerivative ball_derivative(Label label, double rho, const MassVector& masses) {
    check_ball_label(label, masses.size());
    if (!(rho > 0.0)) {
        throw DomainError("ball collision derivative needs rho > 0");
    }
    CollisionDerivative d;
    d.kind_ = CollisionDerivative::Kind::ball;
    d.label_ = label;
    d.n_ = masses.size();
    d.gamma_ = masses.gamma(label);
    d.alpha_ = masses.alpha_factor(label) * rho;
    return d;
}

CollisionDerivative floor_derivative(double v1_plus, const MassVector& masses) {
    if (!(v1_plus > 0.0)) {
        throw DomainError("floor collision derivative needs v1+ > 0");
    }
    CollisionDerivative d;
    d.kind_ = CollisionDerivative::Kind::floor;
    d.label_ = floor_label;
    d.n_ = masses.size();
    d.shear_ = 2.0 / (masses[0] * v1_plus);
    return d;
}

CollisionDerivative derivative_of(const CollisionEvent& event, const MassVector& masses) {
    return event.label == floor_label ? floor_derivative(event.rho, masses)
                                      : ball_derivative(event.label, event.rho, masses);
}

std::vector<TangentVector> push_frame(std::vector<TangentVector> frame, std::span<const CollisionEvent> events,
                                      const MassVector& masses, const FrameObserver& observer) {
    for (const auto& u : frame) {
        if (u.size() != masses.size()) throw DomainError("tangent vector size does not match the masses");
    }
    for (std::size_t k = 0; k < events.size(); ++k) {
        const CollisionDerivative d = derivative_of(events[k], masses);
        for (auto& u : frame) d.apply(u);
        if (observer) observer(k, frame);
    }
    return frame;
}

Eigen::MatrixXd cocycle_matrix(std::span<const CollisionEvent> events, const MassVector& masses) {
    const auto k = static_cast<Eigen::Index>(2 * masses.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
    for (const auto& e : events) derivative_of(e, masses).apply(m);
    return m;
}

} // namespace fallingballs
