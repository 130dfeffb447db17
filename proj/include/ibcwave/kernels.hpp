#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ibcwave/measures.hpp"

namespace ibcwave {

/// Exact positive-real condition of the delay kernel z0 + z_tau e^(-tau s):
/// z0 >= |z_tau| and tau >= 0.
inline bool delay_pr_condition(double z0, double z_tau, double tau) {
    return z0 >= std::abs(z_tau) && tau >= 0.0;
}

/// Delayed square-root kernel term z_tau_d * e^(-tau_d s) / sqrt(s).
/// Laplace-domain only; it has no realization in the time-domain solver.
struct DelayedDiffusiveTerm {
    double z_tau_d = 0.0;
    double tau_d = 0.0;
    friend bool operator==(const DelayedDiffusiveTerm&, const DelayedDiffusiveTerm&) = default;
};

/// Composite impedance kernel
///   z0 + z_tau e^(-tau s) + z1 s + [standard diffusive] + s [extended diffusive]
///   (+ optional delayed square-root term).
/// Diffusive terms are either analytic fractional (closed-form transform) or
/// pole/weight banks.
struct KernelSpec {
    double z0 = 0.0;
    double z_tau = 0.0;
    double tau = 0.0;
    double z1 = 0.0;
    std::optional<DiffusiveDescriptor> diff_standard;
    std::optional<DiffusiveDescriptor> diff_extended;
    std::optional<DelayedDiffusiveTerm> delayed_diffusive;

    /// When set, the delay coefficients are required to satisfy the exact
    /// positive-real condition at construction/validation time.
    bool certified_pr = false;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

    bool has_delay() const { return z_tau != 0.0; }
    bool has_derivative() const { return z1 != 0.0; }

    void validate() const {
        if (z0 < 0.0) throw std::invalid_argument("kernel: z0 must be >= 0");
        if (tau < 0.0) throw std::invalid_argument("kernel: tau must be >= 0");
        if (z1 < 0.0) throw std::invalid_argument("kernel: z1 must be >= 0");
        if (has_delay() && tau == 0.0)
            throw std::invalid_argument("kernel: delay term requires tau > 0");
        if (certified_pr && has_delay() && !delay_pr_condition(z0, z_tau, tau))
            throw std::invalid_argument(
                "kernel: certified_pr requires z0 >= |z_tau| for the delay term");
        auto check_bank = [](const std::optional<DiffusiveDescriptor>& d) {
            if (d && d->kind == DiffusiveDescriptor::Kind::Discrete) d->bank.validate();
        };
        check_bank(diff_standard);
        check_bank(diff_extended);
        if (delayed_diffusive && !(delayed_diffusive->tau_d > 0.0))
            throw std::invalid_argument("kernel: delayed sqrt term requires tau_d > 0");
    }

    /// z(0+) of the evaluable terms; infinite for a singular-at-zero term.
    /// The injectivity of the coupled generator hinges on this being nonzero.
    double value_at_zero() const {
        double v = z0 + z_tau;
        if (diff_standard) {
            if (diff_standard->is_analytic()) return std::numeric_limits<double>::infinity();
            if (diff_standard->kind == DiffusiveDescriptor::Kind::Discrete)
                v += integrability_report(diff_standard->bank).sum_inv_xi;
        }
        if (delayed_diffusive && delayed_diffusive->z_tau_d != 0.0)
            return std::numeric_limits<double>::infinity();
        return v;  // z1*s and extended terms vanish at 0
    }

    bool singular_at_zero() const {
        if (diff_standard && diff_standard->is_analytic()) return true;
        if (delayed_diffusive && delayed_diffusive->z_tau_d != 0.0) return true;
        return false;
    }
};

/// Laplace-domain evaluation on Re(s) >= 0. s = 0 is rejected when a term is
/// singular there (analytic fractional integral, delayed sqrt term).
/// Tabulated descriptors must be discretized before evaluation.
inline Complex eval_laplace(const KernelSpec& kernel, Complex s) {
    if (s.real() < 0.0)
        throw std::invalid_argument("eval_laplace: Re(s) must be >= 0");
    if (s == Complex{0.0, 0.0} && kernel.singular_at_zero())
        throw std::invalid_argument("eval_laplace: kernel is singular at s = 0");

    Complex v{kernel.z0, 0.0};
    if (kernel.has_delay()) v += kernel.z_tau * std::exp(-kernel.tau * s);
    v += kernel.z1 * s;

    auto eval_term = [&](const DiffusiveDescriptor& d, bool extended) -> Complex {
        switch (d.kind) {
            case DiffusiveDescriptor::Kind::AnalyticFractional:
                // principal branch of s^a, cut on (-inf, 0]
                return std::pow(s, extended ? 1.0 - d.alpha : -d.alpha);
            case DiffusiveDescriptor::Kind::Discrete:
                return extended ? eval_extended(d.bank, s) : eval_standard(d.bank, s);
            case DiffusiveDescriptor::Kind::Tabulated:
                throw std::invalid_argument(
                    "eval_laplace: tabulated descriptor must be discretized first");
        }
        throw std::logic_error("eval_laplace: bad descriptor kind");
    };
    if (kernel.diff_standard) v += eval_term(*kernel.diff_standard, false);
    if (kernel.diff_extended) v += eval_term(*kernel.diff_extended, true);

    if (kernel.delayed_diffusive && kernel.delayed_diffusive->z_tau_d != 0.0) {
        const auto& t = *kernel.delayed_diffusive;
        v += t.z_tau_d * std::exp(-t.tau_d * s) / std::sqrt(s);
    }
    return v;
}

struct PRViolation {
    Complex s;
    double re_z = 0.0;
};

/// Outcome of a sampled positive-real check. Sampling can falsify
/// positive-realness but never prove it; `note` says so in every report.
struct PRReport {
    bool certified = false;
    std::vector<PRViolation> violations;
    long samples_checked = 0;
    long reality_failures = 0;
    double tol = 1e-10;
    static constexpr const char* note =
        "sampling-based check: certification falsifies on the sampled grid only, "
        "it is not a proof of positive-realness";
};

/// Sampling grid: a log-spaced rectangle {Re(s) in [eps, radius],
/// |Im(s)| <= radius}, a near-imaginary boundary ray s = eps + i omega with
/// log-spaced |omega| (where delay-kernel violations live), and a reality
/// scan on (0, inf).
struct SamplerConfig {
    double eps = 1e-8;
    double radius = 100.0;
    int n_re = 40;
    int n_im = 81;
    int n_boundary = 2048;
    double omega_min = 1e-3;
    double omega_max = 1e4;
    int n_real_axis = 64;
    double tol = 1e-10;
    std::size_t max_recorded_violations = 64;
};

inline PRReport check_positive_real(const KernelSpec& kernel,
                                    const SamplerConfig& cfg = {}) {
    kernel.validate();
    PRReport rep;
    rep.tol = cfg.tol;
    bool ok = true;

    auto probe = [&](Complex s) {
        double re = eval_laplace(kernel, s).real();
        ++rep.samples_checked;
        if (re < -cfg.tol) {
            ok = false;
            if (rep.violations.size() < cfg.max_recorded_violations)
                rep.violations.push_back({s, re});
        }
    };

    // rectangle grid, Re log-spaced from eps
    for (int i = 0; i < cfg.n_re; ++i) {
        double t = (cfg.n_re > 1) ? static_cast<double>(i) / (cfg.n_re - 1) : 0.0;
        double re = cfg.eps * std::pow(cfg.radius / cfg.eps, t);
        for (int j = 0; j < cfg.n_im; ++j) {
            double im = (cfg.n_im > 1)
                            ? -cfg.radius + 2.0 * cfg.radius * j / (cfg.n_im - 1)
                            : 0.0;
            probe({re, im});
        }
    }
    // near-boundary ray, both signs of omega
    for (int i = 0; i < cfg.n_boundary; ++i) {
        double t = (cfg.n_boundary > 1) ? static_cast<double>(i) / (cfg.n_boundary - 1) : 0.0;
        double w = cfg.omega_min * std::pow(cfg.omega_max / cfg.omega_min, t);
        probe({cfg.eps, w});
        probe({cfg.eps, -w});
    }
    // reality on (0, inf)
    for (int i = 0; i < cfg.n_real_axis; ++i) {
        double t = (cfg.n_real_axis > 1) ? static_cast<double>(i) / (cfg.n_real_axis - 1) : 0.0;
        double x = cfg.omega_min * std::pow(cfg.omega_max / cfg.omega_min, t);
        Complex v = eval_laplace(kernel, {x, 0.0});
        ++rep.samples_checked;
        if (std::abs(v.imag()) > cfg.tol) {
            ok = false;
            ++rep.reality_failures;
        }
    }

    rep.certified = ok;
    return rep;
}

struct RootReport {
    std::vector<Complex> roots;
    double max_re = -std::numeric_limits<double>::infinity();
};

/// Roots of s -> z*a2*s^2 + a1*s + z*a0 with nonnegative coefficients and
/// Re(z) > 0. Every root has nonpositive real part; max_re reports the
/// largest one (or -inf for the rootless constant case).
inline RootReport quadratic_halfplane_roots(double a0, double a1, double a2, Complex z) {
    if (a0 < 0.0 || a1 < 0.0 || a2 < 0.0)
        throw std::invalid_argument("quadratic_halfplane_roots: coefficients must be >= 0");
    if (!(z.real() > 0.0))
        throw std::invalid_argument("quadratic_halfplane_roots: Re(z) must be > 0");
    if (a0 == 0.0 && a1 == 0.0 && a2 == 0.0)
        throw std::invalid_argument("quadratic_halfplane_roots: degenerate zero polynomial");

    RootReport rep;
    if (a2 > 0.0) {
        Complex disc = a1 * a1 - 4.0 * a0 * a2 * z * z;
        Complex sq = std::sqrt(disc);
        Complex den = 2.0 * a2 * z;
        rep.roots = {(-a1 + sq) / den, (-a1 - sq) / den};
    } else if (a1 > 0.0) {
        rep.roots = {-z * a0 / a1};
    }
    // a0 > 0 alone: constant nonzero polynomial, no roots
    for (const auto& r : rep.roots) rep.max_re = std::max(rep.max_re, r.real());
    return rep;
}

/// Smallest positive root of x -> tan(x + pi/4) + 1/(2x), found by a sign
/// scan on the branch (pi/4, 5pi/4) followed by bisection to |f| < 1e-12.
inline double find_x_tilde() {
    auto f = [](double x) { return std::tan(x + M_PI / 4.0) + 0.5 / x; };
    const double lo = M_PI / 4.0 + 1e-6;
    const double hi = 5.0 * M_PI / 4.0 - 1e-6;
    const int n_scan = 4096;
    double a = lo, b = 0.0;
    double fa = f(a);
    bool bracketed = false;
    for (int i = 1; i <= n_scan; ++i) {
        double x = lo + (hi - lo) * i / n_scan;
        double fx = f(x);
        if (fa < 0.0 && fx >= 0.0) {
            b = x;
            bracketed = true;
            break;
        }
        a = x;
        fa = fx;
    }
    if (!bracketed) throw std::logic_error("find_x_tilde: bracketing failed");
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (std::abs(fm) < 1e-12 && (b - a) < 1e-14) return m;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Smallest z0 for which z0 + z_tau e^(-tau s)/sqrt(s) is positive-real:
/// -z_tau * cos(x~ + pi/4) * sqrt(tau/x~).
inline double min_z0_delayed_sqrt(double z_tau, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("min_z0_delayed_sqrt: tau must be > 0");
    if (z_tau < 0.0) throw std::invalid_argument("min_z0_delayed_sqrt: z_tau must be >= 0");
    if (z_tau == 0.0) return 0.0;
    double xt = find_x_tilde();
    return -z_tau * std::cos(xt + M_PI / 4.0) * std::sqrt(tau / xt);
}

}  // namespace ibcwave
