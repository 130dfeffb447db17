#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ibcwave/measures.hpp"

namespace ibcwave {

/// Admissible energy-weight interval for the delay realization,
/// [z0 - sqrt(z0^2 - z_tau^2), z0 + sqrt(z0^2 - z_tau^2)], valid for
/// z0 >= |z_tau|. The weight k makes the quadratic form with matrix
/// [[z0 - k/2, z_tau/2], [z_tau/2, k/2]] positive semidefinite exactly when
/// k lies inside the interval.
struct KRange {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double k) const { return k >= lo && k <= hi; }
};

inline KRange admissible_k_range(double z0, double z_tau) {
    if (z0 < 0.0) throw std::invalid_argument("admissible_k_range: z0 must be >= 0");
    if (std::abs(z_tau) > z0)
        throw std::invalid_argument("admissible_k_range: require |z_tau| <= z0");
    double root = std::sqrt(z0 * z0 - z_tau * z_tau);
    return {z0 - root, z0 + root};
}

/// The 2x2 dissipation test matrix acting on (inflow, delayed trace).
inline std::array<std::array<double, 2>, 2> delay_form_matrix(double z0, double z_tau,
                                                              double k) {
    return {{{z0 - 0.5 * k, 0.5 * z_tau}, {0.5 * z_tau, 0.5 * k}}};
}

/// Value of the dissipation form at (a, c): form >= 0 for all inputs means
/// every step of the coupled system is nonexpansive.
inline double delay_form_value(double z0, double z_tau, double k, double a, double c) {
    return (z0 - 0.5 * k) * a * a + z_tau * a * c + 0.5 * k * c * c;
}

/// Exact-shift transport realization of a pure delay: a ring of M+1 samples
/// of chi on theta_j = -j*tau/M. Advancing by dt = tau/M shifts the ring one
/// cell and injects the inflow at theta = 0, so the discrete energy balance
/// has zero numerical dissipation.
class DelayLine {
public:
    DelayLine(double tau, int cells, double k)
        : tau_(tau), m_(cells), k_(k), ring_(static_cast<std::size_t>(cells) + 1, 0.0) {
        if (!(tau > 0.0)) throw std::invalid_argument("DelayLine: tau must be > 0");
        if (cells < 1) throw std::invalid_argument("DelayLine: need at least one cell");
        if (!(k > 0.0)) throw std::invalid_argument("DelayLine: weight k must be > 0");
    }

    int cells() const { return m_; }
    double dtheta() const { return tau_ / m_; }
    double tau() const { return tau_; }
    double weight() const { return k_; }

    /// chi(-tau) after the next shift, i.e. the delayed value the coupled
    /// step will see. Known before the inflow of that step.
    double delayed_value() const { return ring_[static_cast<std::size_t>(m_) - 1]; }

    /// chi(theta_j); j in [0, M].
    double sample(int j) const { return ring_[static_cast<std::size_t>(j)]; }

    struct StepResult {
        double out = 0.0;           // chi(-tau) at the new time level
        double energy_delta = 0.0;  // (k/2)(|in|^2 - |out|^2)
    };

    /// Shift one cell and inject u_in at theta = 0. An impulse re-emerges
    /// exactly M steps later.
    StepResult step(double u_in) {
        StepResult r;
        r.out = ring_[static_cast<std::size_t>(m_) - 1];
        for (int j = m_; j >= 1; --j)
            ring_[static_cast<std::size_t>(j)] = ring_[static_cast<std::size_t>(j) - 1];
        ring_[0] = u_in;
        r.energy_delta = 0.5 * k_ * (u_in * u_in - r.out * r.out);
        return r;
    }

    /// (k/2) dtheta sum_{j=0}^{M-1} chi_j^2. Telescopes exactly:
    /// E_after - E_before = dtheta * (k/2)(|in|^2 - |out|^2) per step.
    double energy() const {
        double acc = 0.0;
        for (int j = 0; j < m_; ++j) {
            double c = ring_[static_cast<std::size_t>(j)];
            acc += c * c;
        }
        return 0.5 * k_ * dtheta() * acc;
    }

private:
    double tau_;
    int m_;
    double k_;
    std::vector<double> ring_;
};

enum class DiffusiveMode { Standard, Extended };

/// First-order relaxation bank phi_k' = -xi_k phi_k + u, advanced by implicit
/// midpoint. Standard and extended realizations share the state update; they
/// differ in the output map and in the energy weight (1 vs xi).
class DiffusiveBank {
public:
    DiffusiveBank(DiscreteMeasure measure, DiffusiveMode mode)
        : mu_(std::move(measure)), mode_(mode), phi_(mu_.size(), 0.0) {
        mu_.validate();
    }

    const DiscreteMeasure& measure() const { return mu_; }
    DiffusiveMode mode() const { return mode_; }
    const std::vector<double>& state() const { return phi_; }
    void set_state(std::vector<double> phi) {
        if (phi.size() != mu_.size())
            throw std::invalid_argument("DiffusiveBank: state size mismatch");
        phi_ = std::move(phi);
    }

    /// phi_k <- ((1 - xi dt/2) phi_k + dt u_mid) / (1 + xi dt/2).
    void step(double u_mid, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("DiffusiveBank: dt must be > 0");
        for (std::size_t k = 0; k < phi_.size(); ++k) {
            double half = 0.5 * mu_.nodes[k] * dt;
            phi_[k] = ((1.0 - half) * phi_[k] + dt * u_mid) / (1.0 + half);
        }
    }

    /// sum w_k phi_k (standard output).
    double output_standard() const {
        if (mode_ != DiffusiveMode::Standard)
            throw std::logic_error("output_standard: bank is in extended mode");
        double acc = 0.0;
        for (std::size_t k = 0; k < phi_.size(); ++k) acc += mu_.weights[k] * phi_[k];
        return acc;
    }

    /// sum w_k (-xi_k phi_k + u) (extended output).
    double output_extended(double u) const {
        if (mode_ != DiffusiveMode::Extended)
            throw std::logic_error("output_extended: bank is in standard mode");
        double acc = 0.0;
        for (std::size_t k = 0; k < phi_.size(); ++k)
            acc += mu_.weights[k] * (-mu_.nodes[k] * phi_[k] + u);
        return acc;
    }

    /// Right-hand side of the passivity identity:
    ///   standard: -sum w_k xi_k |phi_k|^2
    ///   extended: -sum w_k |-xi_k phi_k + u|^2.
    double dissipation_residual(double u) const {
        double acc = 0.0;
        if (mode_ == DiffusiveMode::Standard) {
            for (std::size_t k = 0; k < phi_.size(); ++k)
                acc -= mu_.weights[k] * mu_.nodes[k] * phi_[k] * phi_[k];
        } else {
            for (std::size_t k = 0; k < phi_.size(); ++k) {
                double r = -mu_.nodes[k] * phi_[k] + u;
                acc -= mu_.weights[k] * r * r;
            }
        }
        return acc;
    }

    /// (1/2) ||phi||^2 in the mode's energy weight.
    double energy() const {
        double acc = 0.0;
        for (std::size_t k = 0; k < phi_.size(); ++k) {
            double w = mu_.weights[k];
            if (mode_ == DiffusiveMode::Extended) w *= mu_.nodes[k];
            acc += w * phi_[k] * phi_[k];
        }
        return 0.5 * acc;
    }

private:
    DiscreteMeasure mu_;
    DiffusiveMode mode_;
    std::vector<double> phi_;
};

/// Auxiliary state for the derivative impedance term z1 s; eta tracks the
/// boundary velocity trace and stores energy (z1/2)|eta|^2.
struct DerivativeState {
    double z1 = 0.0;
    double eta = 0.0;

    double energy() const { return 0.5 * z1 * eta * eta; }
};

}  // namespace ibcwave
