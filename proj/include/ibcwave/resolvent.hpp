#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ibcwave/kernels.hpp"
#include "ibcwave/wavesim.hpp"

namespace ibcwave {

using SparseC = Eigen::SparseMatrix<Complex>;
using VectorC = Eigen::VectorXcd;

/// Which endpoints carry the Robin (impedance) term; the others are natural
/// (Neumann) ends.
struct RobinEnds {
    bool left = true;
    bool right = true;
    int count() const { return (left ? 1 : 0) + (right ? 1 : 0); }
};

/// Piecewise-linear discretization of the Laplace-domain boundary value
/// problem: system matrix K + s^2 M + (s/z(s)) Mb on the interval mesh.
struct HelmholtzSystem {
    int n = 0;          // elements
    double h = 0.0;
    Complex s;
    Complex robin;      // s / z(s)
    SparseC K, M, Mb;
    SparseC A;
};

namespace detail {

inline SparseC p1_stiffness(int n, double h) {
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (int e = 0; e < n; ++e) {
        Complex c = 1.0 / h;
        t.emplace_back(e, e, c);
        t.emplace_back(e + 1, e + 1, c);
        t.emplace_back(e, e + 1, -c);
        t.emplace_back(e + 1, e, -c);
    }
    SparseC K(n + 1, n + 1);
    K.setFromTriplets(t.begin(), t.end());
    return K;
}

inline SparseC p1_mass(int n, double h) {
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (int e = 0; e < n; ++e) {
        t.emplace_back(e, e, Complex(h / 3.0));
        t.emplace_back(e + 1, e + 1, Complex(h / 3.0));
        t.emplace_back(e, e + 1, Complex(h / 6.0));
        t.emplace_back(e + 1, e, Complex(h / 6.0));
    }
    SparseC M(n + 1, n + 1);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

inline SparseC p1_boundary_mass(int n, RobinEnds ends) {
    std::vector<Eigen::Triplet<Complex>> t;
    if (ends.left) t.emplace_back(0, 0, Complex(1.0));
    if (ends.right) t.emplace_back(n, n, Complex(1.0));
    SparseC Mb(n + 1, n + 1);
    Mb.setFromTriplets(t.begin(), t.end());
    return Mb;
}

/// Hager/Higham 1-norm estimate of ||inv(A)||_1 from solves with A and A^H.
inline double inverse_norm1_estimate(const Eigen::SparseLU<SparseC>& lu,
                                     const Eigen::SparseLU<SparseC>& lu_adj, int n) {
    VectorC x = VectorC::Constant(n, Complex(1.0 / n));
    double est = 0.0;
    int last_j = -1;
    for (int iter = 0; iter < 6; ++iter) {
        VectorC y = lu.solve(x);
        est = y.cwiseAbs().sum();
        VectorC xi(n);
        for (int i = 0; i < n; ++i) {
            double a = std::abs(y[i]);
            xi[i] = (a > 0.0) ? y[i] / a : Complex(1.0);
        }
        VectorC z = lu_adj.solve(xi);
        int j = 0;
        double zmax = 0.0;
        for (int i = 0; i < n; ++i) {
            double a = std::abs(z[i]);
            if (a > zmax) {
                zmax = a;
                j = i;
            }
        }
        if (j == last_j || zmax <= std::real(z.dot(x))) break;
        x.setZero();
        x[j] = 1.0;
        last_j = j;
    }
    return est;
}

inline double norm1(const SparseC& A) {
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(A.cols());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseC::InnerIterator it(A, k); it; ++it)
            colsum[it.col()] += std::abs(it.value());
    return colsum.maxCoeff();
}

}  // namespace detail

/// Assemble K + s^2 M + (s/z(s)) Mb for a kernel-defined impedance. Rejects
/// Re(s) < 0, s = 0, and z(s) = 0 (the latter needs the admittance
/// formulation, out of scope here).
inline HelmholtzSystem assemble(const Grid1D& mesh, const KernelSpec& kernel, Complex s,
                                RobinEnds ends = {}) {
    mesh.validate();
    if (s.real() < 0.0) throw std::invalid_argument("assemble: Re(s) must be >= 0");
    if (s == Complex{0.0, 0.0}) throw std::invalid_argument("assemble: s = 0 excluded");
    HelmholtzSystem sys;
    sys.n = mesh.n;
    sys.h = mesh.h();
    sys.s = s;
    sys.K = detail::p1_stiffness(sys.n, sys.h);
    sys.M = detail::p1_mass(sys.n, sys.h);
    sys.Mb = detail::p1_boundary_mass(sys.n, ends);
    if (ends.count() > 0) {
        Complex z = eval_laplace(kernel, s);
        double scale = std::abs(kernel.z0) + std::abs(kernel.z_tau) +
                       kernel.z1 * std::abs(s) + 1e-30;
        if (std::abs(z) <= 1e-12 * scale)
            throw std::invalid_argument("assemble: z(s) = 0, admittance form required");
        sys.robin = s / z;
    } else {
        sys.robin = Complex{0.0, 0.0};
    }
    sys.A = sys.K + s * s * sys.M + sys.robin * sys.Mb;
    sys.A.makeCompressed();
    return sys;
}

struct SolveResult {
    VectorC p;
    double residual = 0.0;
    double cond_estimate = 0.0;
    bool near_singular = false;
};

inline constexpr double kNearSingularCond = 1e14;
inline constexpr double kResidualTol = 1e-10;

/// Direct sparse solve with a 1-norm condition estimate; flags the solve as
/// near-singular when the estimate exceeds 1e14 or the residual misses 1e-10.
inline SolveResult solve(const HelmholtzSystem& sys, const VectorC& rhs) {
    SolveResult res;
    const int n = static_cast<int>(sys.A.rows());
    Eigen::SparseLU<SparseC> lu(sys.A);
    if (lu.info() != Eigen::Success) {
        res.near_singular = true;
        res.cond_estimate = std::numeric_limits<double>::infinity();
        res.residual = std::numeric_limits<double>::infinity();
        res.p = VectorC::Zero(n);
        return res;
    }
    res.p = lu.solve(rhs);
    double bn = rhs.norm();
    auto rel_residual = [&](const VectorC& x) {
        return (bn > 0.0) ? (sys.A * x - rhs).norm() / bn : (sys.A * x).norm();
    };
    res.residual = rel_residual(res.p);
    for (int pass = 0; pass < 2 && res.residual > 1e-14 && std::isfinite(res.residual);
         ++pass) {
        res.p += lu.solve(rhs - sys.A * res.p);
        res.residual = rel_residual(res.p);
    }

    SparseC Ah = SparseC(sys.A.adjoint());
    Ah.makeCompressed();
    Eigen::SparseLU<SparseC> lu_adj(Ah);
    if (lu_adj.info() != Eigen::Success) {
        res.near_singular = true;
        res.cond_estimate = std::numeric_limits<double>::infinity();
        return res;
    }
    res.cond_estimate = detail::norm1(sys.A) * detail::inverse_norm1_estimate(lu, lu_adj, n);
    res.near_singular = res.cond_estimate > kNearSingularCond || res.residual > kResidualTol ||
                        !std::isfinite(res.residual);
    return res;
}

struct ScanSample {
    Complex s;
    double cond_estimate = 0.0;
    double residual = 0.0;
    bool flagged = false;
};

struct ScanReport {
    std::vector<ScanSample> samples;
    int flagged = 0;
    double max_residual = 0.0;
    double max_cond = 0.0;
};

inline int max_workers() {
    if (const char* env = std::getenv("IBCWAVE_MAX_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

/// Default sample set for the solvability scan: log-spaced points on
/// (0, inf) and on both halves of the imaginary axis.
inline std::vector<Complex> default_scan_samples(int count = 100, double lo = 1e-2,
                                                 double hi = 1e2) {
    std::vector<Complex> out;
    int half = count / 2;
    int quarter = (count - half) / 2;
    for (int i = 0; i < half; ++i) {
        double t = (half > 1) ? static_cast<double>(i) / (half - 1) : 0.0;
        out.emplace_back(lo * std::pow(hi / lo, t), 0.0);
    }
    for (int i = 0; i < quarter; ++i) {
        double t = (quarter > 1) ? static_cast<double>(i) / (quarter - 1) : 0.0;
        double w = lo * std::pow(hi / lo, t);
        out.emplace_back(0.0, w);
        out.emplace_back(0.0, -w);
    }
    return out;
}

/// Solvability scan over Laplace-domain samples: per-sample solve against a
/// fixed smooth load, with condition estimate and residual. Samples run in
/// parallel (capped by IBCWAVE_MAX_WORKERS); the report order is the input
/// order regardless of scheduling.
inline ScanReport bijectivity_scan(const Grid1D& mesh, const KernelSpec& kernel,
                                   const std::vector<Complex>& s_samples,
                                   RobinEnds ends = {}) {
    ScanReport rep;
    rep.samples.resize(s_samples.size());

    // Mean-free smooth load, l(psi) = int sin(2 pi x / L) psi. A load with a
    // mean component excites the near-constant resolvent growth at small |s|,
    // flooring the b-normalized residual at eps * |A| |p| / |b|.
    VectorC load(mesh.n + 1);
    for (int i = 0; i <= mesh.n; ++i)
        load[i] = std::sin(2.0 * M_PI * mesh.face(i) / mesh.L);
    {
        HelmholtzSystem probe = assemble(mesh, kernel, Complex{1.0, 0.0}, ends);
        load = probe.M * load;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= s_samples.size()) return;
            ScanSample smp;
            smp.s = s_samples[i];
            try {
                HelmholtzSystem sys = assemble(mesh, kernel, smp.s, ends);
                SolveResult r = solve(sys, load);
                smp.cond_estimate = r.cond_estimate;
                smp.residual = r.residual;
                smp.flagged = r.near_singular;
            } catch (const std::exception&) {
                smp.flagged = true;
                smp.cond_estimate = std::numeric_limits<double>::infinity();
                smp.residual = std::numeric_limits<double>::infinity();
            }
            rep.samples[i] = smp;
        }
    };
    int workers = std::min<int>(max_workers(), static_cast<int>(s_samples.size()));
    workers = std::max(workers, 1);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (const auto& smp : rep.samples) {
        if (smp.flagged) ++rep.flagged;
        if (std::isfinite(smp.residual)) rep.max_residual = std::max(rep.max_residual, smp.residual);
        if (std::isfinite(smp.cond_estimate)) rep.max_cond = std::max(rep.max_cond, smp.cond_estimate);
    }
    return rep;
}

}  // namespace ibcwave
