#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibcwave/io.hpp"

namespace ibcwave {

using Complex = std::complex<double>;

/// Positive pole/weight bank {(xi_k, w_k)} approximating a diffusive measure.
/// Nodes are strictly increasing and strictly positive; weights strictly
/// positive. A finite bank always satisfies sum w_k/(1+xi_k) < inf, the
/// discrete counterpart of the measure well-posedness condition.
struct DiscreteMeasure {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

    void validate() const {
        if (nodes.size() != weights.size())
            throw std::invalid_argument("DiscreteMeasure: nodes/weights size mismatch");
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (!(nodes[k] > 0.0))
                throw std::invalid_argument("DiscreteMeasure: node must be > 0");
            if (!(weights[k] > 0.0))
                throw std::invalid_argument("DiscreteMeasure: weight must be > 0");
            if (k > 0 && !(nodes[k] > nodes[k - 1]))
                throw std::invalid_argument("DiscreteMeasure: nodes must be strictly increasing");
        }
    }
};

/// Symbolic description of a diffusive measure. Three flavours:
///  - analytic_fractional: density sin(a*pi)/pi * xi^-a, whose standard
///    transform is s^-a and extended transform is s^(1-a), a in (0,1);
///  - tabulated: nonnegative density samples, piecewise-linear in between;
///  - discrete: an explicit pole/weight bank.
struct DiffusiveDescriptor {
    enum class Kind { AnalyticFractional, Tabulated, Discrete };

    Kind kind = Kind::Discrete;
    double alpha = 0.0;               // AnalyticFractional only
    std::vector<double> tab_xi;       // Tabulated only
    std::vector<double> tab_density;  // Tabulated only
    DiscreteMeasure bank;             // Discrete only

    // Discretization preferences used when a bank must be synthesized.
    int n_poles = 100;
    double xi_min = 1e-6;
    double xi_max = 1e6;

    friend bool operator==(const DiffusiveDescriptor&, const DiffusiveDescriptor&) = default;

    bool is_analytic() const { return kind == Kind::AnalyticFractional; }

    /// Density value at xi > 0 (AnalyticFractional or Tabulated).
    double density_at(double xi) const {
        if (kind == Kind::AnalyticFractional)
            return std::sin(alpha * M_PI) / M_PI * std::pow(xi, -alpha);
        if (kind == Kind::Tabulated) {
            if (tab_xi.empty()) return 0.0;
            if (xi <= tab_xi.front()) return tab_density.front();
            if (xi >= tab_xi.back()) return tab_density.back();
            auto it = std::upper_bound(tab_xi.begin(), tab_xi.end(), xi);
            std::size_t i = static_cast<std::size_t>(it - tab_xi.begin());
            double t = (xi - tab_xi[i - 1]) / (tab_xi[i] - tab_xi[i - 1]);
            return (1.0 - t) * tab_density[i - 1] + t * tab_density[i];
        }
        throw std::logic_error("density_at: discrete descriptor has no density");
    }
};

/// Analytic fractional-weight descriptor, density sin(a*pi)/pi * xi^-a.
inline DiffusiveDescriptor fractional_density(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("fractional_density: alpha must lie in (0,1)");
    DiffusiveDescriptor d;
    d.kind = DiffusiveDescriptor::Kind::AnalyticFractional;
    d.alpha = alpha;
    return d;
}

/// Quadrature of the density into a positive pole/weight bank.
///
/// Nodes are placed geometrically, xi_k = xi_min * r^(k-1) with
/// r = (xi_max/xi_min)^(1/(N-1)), and weights come from the midpoint rule in
/// log xi (cell width log r centered on each node). For the analytic
/// fractional density the mass outside [xi_min, xi_max] is lumped into the
/// end poles: the lower tail as plain measure mass, the upper tail as
/// 1/xi-weighted mass. Without the tail lump the truncation error dominates
/// the quadrature error by orders of magnitude for alpha away from 1/2.
/// Deterministic: identical inputs give bit-identical banks.
inline DiscreteMeasure discretize(const DiffusiveDescriptor& desc, int N,
                                  double xi_min, double xi_max) {
    if (desc.kind == DiffusiveDescriptor::Kind::Discrete) {
        desc.bank.validate();
        return desc.bank;
    }
    if (N < 1) throw std::invalid_argument("discretize: N must be >= 1");
    if (!(xi_min > 0.0) || !(xi_max >= xi_min))
        throw std::invalid_argument("discretize: require 0 < xi_min <= xi_max");

    DiscreteMeasure mu;
    mu.nodes.resize(static_cast<std::size_t>(N));
    mu.weights.resize(static_cast<std::size_t>(N));

    double log_ratio = std::log(xi_max / xi_min);
    double cell = (N > 1) ? log_ratio / (N - 1) : std::max(log_ratio, 1.0);
    for (int k = 0; k < N; ++k) {
        double xi = (N > 1) ? xi_min * std::exp(cell * k) : std::sqrt(xi_min * xi_max);
        mu.nodes[static_cast<std::size_t>(k)] = xi;
        mu.weights[static_cast<std::size_t>(k)] = desc.density_at(xi) * xi * cell;
    }

    if (desc.kind == DiffusiveDescriptor::Kind::AnalyticFractional && N > 1) {
        double a = desc.alpha;
        double c = std::sin(a * M_PI) / M_PI;
        double lo_edge = xi_min * std::exp(-0.5 * cell);
        double hi_edge = xi_max * std::exp(0.5 * cell);
        // int_0^lo c xi^-a dxi, attached to the first pole
        mu.weights.front() += c * std::pow(lo_edge, 1.0 - a) / (1.0 - a);
        // int_hi^inf c xi^-(a+1) dxi, attached 1/xi-weighted to the last pole
        mu.weights.back() += mu.nodes.back() * c * std::pow(hi_edge, -a) / a;
    }

    mu.validate();
    return mu;
}

inline DiscreteMeasure discretize(const DiffusiveDescriptor& desc) {
    return discretize(desc, desc.n_poles, desc.xi_min, desc.xi_max);
}

namespace detail {
inline void require_right_halfplane(Complex s, const char* who) {
    if (s.real() < 0.0)
        throw std::invalid_argument(std::string(who) + ": Re(s) must be >= 0");
}
}  // namespace detail

/// sum w_k / (s + xi_k); defined for Re(s) >= 0 (nodes are positive, so s=0
/// is harmless for a bank).
inline Complex eval_standard(const DiscreteMeasure& mu, Complex s) {
    detail::require_right_halfplane(s, "eval_standard");
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < mu.size(); ++k) acc += mu.weights[k] / (s + mu.nodes[k]);
    return acc;
}

/// sum w_k * s / (s + xi_k).
inline Complex eval_extended(const DiscreteMeasure& mu, Complex s) {
    detail::require_right_halfplane(s, "eval_extended");
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < mu.size(); ++k)
        acc += mu.weights[k] * s / (s + mu.nodes[k]);
    return acc;
}

/// The two integrability sums of a bank: sum w/(1+xi) (well-posedness) and
/// sum w/xi. For a finite bank the latter is always finite; divergence of the
/// continuum integral shows up as growth of sum_inv_xi under refinement, a
/// proxy this report leaves to the caller to track.
struct IntegrabilityReport {
    double sum_wellposed = 0.0;
    double sum_inv_xi = 0.0;
};

inline IntegrabilityReport integrability_report(const DiscreteMeasure& mu) {
    IntegrabilityReport r;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        r.sum_wellposed += mu.weights[k] / (1.0 + mu.nodes[k]);
        r.sum_inv_xi += mu.weights[k] / mu.nodes[k];
    }
    return r;
}

/// CSV with columns xi,w; 17-digit decimals round-trip the doubles exactly.
inline std::string measure_to_csv(const DiscreteMeasure& mu) {
    CsvWriter w({"xi", "w"});
    for (std::size_t k = 0; k < mu.size(); ++k) w.row({mu.nodes[k], mu.weights[k]});
    return w.str();
}

inline DiscreteMeasure measure_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "xi,w")
        throw std::invalid_argument("measure_from_csv: expected header 'xi,w'");
    DiscreteMeasure mu;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("measure_from_csv: malformed row: " + line);
        mu.nodes.push_back(std::strtod(line.substr(0, comma).c_str(), nullptr));
        mu.weights.push_back(std::strtod(line.substr(comma + 1).c_str(), nullptr));
    }
    mu.validate();
    return mu;
}

}  // namespace ibcwave
