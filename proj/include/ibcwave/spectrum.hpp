#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ibcwave/kernels.hpp"
#include "ibcwave/wavesim.hpp"

namespace ibcwave {

struct GeneratorConfig {
    Grid1D grid{1.0, 50};
    BCSpec bc;
    KernelSpec kernel;
    std::optional<double> k_weight;
    int delay_cells = 64;  // upwind transport resolution
};

/// Finite-dimensional evolution operator of the coupled system: wave
/// difference blocks, an upwind delay block, diagonal relaxation blocks, with
/// the boundary pressure eliminated through the realization output. W holds
/// the diagonal energy weights; dissipativity is meant in the W-inner
/// product. Neumann-constrained faces are removed from the state; a
/// derivative impedance term is absorbed into the boundary face weight
/// (eta coincides with the velocity trace there).
struct GeneratorMatrix {
    Eigen::MatrixXd G;
    Eigen::VectorXd W;
    int n_u = 0;       // active velocity faces
    int n_p = 0;
    int n_boundary = 0;  // delay + bank states
};

namespace detail {

struct SideRealization {
    int chi_offset = -1, chi_count = 0;
    double dtheta = 0.0, kweight = 0.0;
    int std_offset = -1;
    int ext_offset = -1;
    DiscreteMeasure std_bank, ext_bank;
};

}  // namespace detail

inline GeneratorMatrix assemble_generator(const GeneratorConfig& cfg) {
    cfg.grid.validate();
    cfg.kernel.validate();
    if (cfg.kernel.delayed_diffusive && cfg.kernel.delayed_diffusive->z_tau_d != 0.0)
        throw std::invalid_argument("assemble_generator: delayed sqrt term unsupported");
    const int n = cfg.grid.n;
    const double h = cfg.grid.h();

    auto kind = [&](int side) { return side == 0 ? cfg.bc.left : cfg.bc.right; };

    // state layout: active faces, centers, then per-side realizations
    std::vector<int> iu(static_cast<std::size_t>(n) + 1, -1);
    int dim = 0;
    for (int i = 0; i <= n; ++i) {
        bool neumann = (i == 0 && kind(0) == BoundaryKind::NeumannU0) ||
                       (i == n && kind(1) == BoundaryKind::NeumannU0);
        if (!neumann) iu[static_cast<std::size_t>(i)] = dim++;
    }
    const int n_u = dim;
    const int ip0 = dim;
    dim += n;

    detail::SideRealization rz[2];
    for (int side = 0; side < 2; ++side) {
        if (kind(side) != BoundaryKind::Impedance) continue;
        const KernelSpec& k = cfg.kernel;
        if (k.has_delay()) {
            rz[side].chi_offset = dim;
            rz[side].chi_count = cfg.delay_cells;
            rz[side].dtheta = k.tau / cfg.delay_cells;
            rz[side].kweight = cfg.k_weight.value_or(k.z0);
            if (!(rz[side].kweight > 0.0))
                throw std::invalid_argument("assemble_generator: delay weight k must be > 0");
            dim += cfg.delay_cells;
        }
        if (k.diff_standard) {
            rz[side].std_bank = discretize(*k.diff_standard);
            rz[side].std_offset = dim;
            dim += static_cast<int>(rz[side].std_bank.size());
        }
        if (k.diff_extended) {
            rz[side].ext_bank = discretize(*k.diff_extended);
            rz[side].ext_offset = dim;
            dim += static_cast<int>(rz[side].ext_bank.size());
        }
    }

    GeneratorMatrix gm;
    gm.n_u = n_u;
    gm.n_p = n;
    gm.n_boundary = dim - n_u - n;
    gm.G = Eigen::MatrixXd::Zero(dim, dim);
    gm.W = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd& G = gm.G;

    // weights
    for (int i = 0; i <= n; ++i) {
        int r = iu[static_cast<std::size_t>(i)];
        if (r < 0) continue;
        gm.W[r] = (i == 0 || i == n) ? 0.5 * h : h;
        bool ibc_face = (i == 0 && kind(0) == BoundaryKind::Impedance) ||
                        (i == n && kind(1) == BoundaryKind::Impedance);
        if (ibc_face && cfg.kernel.z1 > 0.0) gm.W[r] += cfg.kernel.z1;
    }
    for (int i = 0; i < n; ++i) gm.W[ip0 + i] = h;
    for (int side = 0; side < 2; ++side) {
        const auto& r = rz[side];
        for (int j = 0; j < r.chi_count; ++j)
            gm.W[r.chi_offset + j] = r.kweight * r.dtheta;
        for (std::size_t k = 0; k < r.std_bank.size(); ++k)
            gm.W[r.std_offset + static_cast<int>(k)] = r.std_bank.weights[k];
        for (std::size_t k = 0; k < r.ext_bank.size(); ++k)
            gm.W[r.ext_offset + static_cast<int>(k)] =
                r.ext_bank.weights[k] * r.ext_bank.nodes[k];
    }

    // interior faces: u_i' = -(p_i - p_{i-1})/h
    for (int i = 1; i < n; ++i) {
        int r = iu[static_cast<std::size_t>(i)];
        G(r, ip0 + i) -= 1.0 / h;
        G(r, ip0 + i - 1) += 1.0 / h;
    }
    // centers: p_i' = -(u_{i+1} - u_i)/h, eliminated faces read as zero
    for (int i = 0; i < n; ++i) {
        int rp = ip0 + i;
        int right = iu[static_cast<std::size_t>(i) + 1];
        int left = iu[static_cast<std::size_t>(i)];
        if (right >= 0) G(rp, right) -= 1.0 / h;
        if (left >= 0) G(rp, left) += 1.0 / h;
    }

    // boundary faces
    for (int side = 0; side < 2; ++side) {
        int face = (side == 0) ? 0 : n;
        int r = iu[static_cast<std::size_t>(face)];
        if (r < 0) continue;  // Neumann
        int adj = (side == 0) ? ip0 : ip0 + n - 1;
        double sgn = (side == 0) ? -1.0 : 1.0;  // u.n = sgn * u_face
        if (kind(side) == BoundaryKind::DirichletP0) {
            // left: u_0' = -(p_0 - 0)*(2/h); right: u_n' = -(0 - p_{n-1})*(2/h)
            G(r, adj) += (side == 0 ? -1.0 : 1.0) * 2.0 / h;
            continue;
        }
        // impedance: p_b*(1 + 2 z1/h) = Z*(u.n) + z_tau*chi_M + C_s phi
        //            - sum w xi phi_e + (2 z1 / h) * p_adj
        const auto& rzs = rz[side];
        const KernelSpec& k = cfg.kernel;
        double Z = k.z0;
        if (k.diff_extended)
            for (double w : rzs.ext_bank.weights) Z += w;
        double denom = 1.0 + 2.0 * k.z1 / h;

        // face equation, left: u_0' = (p_b - p_0)*2/h; right: u_n' = (p_{n-1} - p_b)*2/h
        double face_sign = (side == 0) ? 1.0 : -1.0;  // multiplies p_b in u_face'
        // contribution of p_b = [Z*sgn*u_face + R + (2 z1/h) p_adj] / denom
        double c = face_sign * (2.0 / h) / denom;
        G(r, r) += c * Z * sgn;
        G(r, adj) += c * 2.0 * k.z1 / h;
        G(r, adj) -= face_sign * 2.0 / h;  // the -p_adj (left: -p_0; right: +p_{n-1})
        if (rzs.chi_count > 0)
            G(r, rzs.chi_offset + rzs.chi_count - 1) += c * k.z_tau;
        for (std::size_t j = 0; j < rzs.std_bank.size(); ++j)
            G(r, rzs.std_offset + static_cast<int>(j)) += c * rzs.std_bank.weights[j];
        for (std::size_t j = 0; j < rzs.ext_bank.size(); ++j)
            G(r, rzs.ext_offset + static_cast<int>(j)) -=
                c * rzs.ext_bank.weights[j] * rzs.ext_bank.nodes[j];

        // upwind transport: chi_1' = (u.n - chi_1)/dtheta, chi_j' = (chi_{j-1}-chi_j)/dtheta
        if (rzs.chi_count > 0) {
            double inv = 1.0 / rzs.dtheta;
            G(rzs.chi_offset, r) += sgn * inv;
            G(rzs.chi_offset, rzs.chi_offset) -= inv;
            for (int j = 1; j < rzs.chi_count; ++j) {
                G(rzs.chi_offset + j, rzs.chi_offset + j - 1) += inv;
                G(rzs.chi_offset + j, rzs.chi_offset + j) -= inv;
            }
        }
        // relaxation banks: phi' = -xi phi + u.n
        for (std::size_t j = 0; j < rzs.std_bank.size(); ++j) {
            int rr = rzs.std_offset + static_cast<int>(j);
            G(rr, rr) -= rzs.std_bank.nodes[j];
            G(rr, r) += sgn;
        }
        for (std::size_t j = 0; j < rzs.ext_bank.size(); ++j) {
            int rr = rzs.ext_offset + static_cast<int>(j);
            G(rr, rr) -= rzs.ext_bank.nodes[j];
            G(rr, r) += sgn;
        }
    }

    return gm;
}

struct EigenReport {
    std::vector<Complex> eigenvalues;
    double max_re = 0.0;
    double min_abs = 0.0;
    std::vector<int> near_imaginary;  // indices with |Re| < 1e-8
};

/// Full dense nonsymmetric eigensolve; sized for desk-scale generators.
inline EigenReport eigen_report(const GeneratorMatrix& gm) {
    if (gm.G.rows() > 5000)
        throw std::invalid_argument("eigen_report: dense eigensolve budget is 5000");
    Eigen::EigenSolver<Eigen::MatrixXd> es(gm.G, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen_report: eigensolve did not converge");
    EigenReport rep;
    rep.max_re = -std::numeric_limits<double>::infinity();
    rep.min_abs = std::numeric_limits<double>::infinity();
    auto vals = es.eigenvalues();
    rep.eigenvalues.reserve(static_cast<std::size_t>(vals.size()));
    for (int i = 0; i < vals.size(); ++i) {
        Complex lam(vals[i].real(), vals[i].imag());
        rep.eigenvalues.push_back(lam);
        rep.max_re = std::max(rep.max_re, lam.real());
        rep.min_abs = std::min(rep.min_abs, std::abs(lam));
        if (std::abs(lam.real()) < 1e-8) rep.near_imaginary.push_back(i);
    }
    return rep;
}

/// Largest eigenvalue of the W-symmetrized part, i.e. the best constant c in
/// Re(Gx, x)_W <= c ||x||_W^2. Nonpositive (to tolerance) for admissible
/// configurations.
inline double dissipativity_check(const GeneratorMatrix& gm) {
    Eigen::MatrixXd WG = gm.W.asDiagonal() * gm.G;
    Eigen::MatrixXd S = 0.5 * (WG + WG.transpose());
    Eigen::MatrixXd Wm = gm.W.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, Wm);
    if (ges.info() != Eigen::Success)
        throw std::runtime_error("dissipativity_check: generalized eigensolve failed");
    return ges.eigenvalues().maxCoeff();
}

/// Spectral norm of the W-symmetrized part in the W-inner product; ~0 for
/// lossless configurations.
inline double symmetric_part_norm(const GeneratorMatrix& gm) {
    Eigen::MatrixXd WG = gm.W.asDiagonal() * gm.G;
    Eigen::MatrixXd S = 0.5 * (WG + WG.transpose());
    Eigen::MatrixXd Wm = gm.W.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, Wm);
    if (ges.info() != Eigen::Success)
        throw std::runtime_error("symmetric_part_norm: generalized eigensolve failed");
    return ges.eigenvalues().cwiseAbs().maxCoeff();
}

/// Smallest singular value of G; bounded away from zero certifies discrete
/// injectivity.
inline double injectivity_check(const GeneratorMatrix& gm) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(gm.G);
    return svd.singularValues().minCoeff();
}

}  // namespace ibcwave
