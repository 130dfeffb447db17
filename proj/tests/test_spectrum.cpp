#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ibcwave/spectrum.hpp"

using namespace ibcwave;
using Catch::Matchers::WithinAbs;

namespace {

GeneratorConfig right_ibc_config(int n = 50) {
    GeneratorConfig cfg;
    cfg.grid = {1.0, n};
    cfg.bc = {BoundaryKind::NeumannU0, BoundaryKind::Impedance};
    return cfg;
}

}  // namespace

TEST_CASE("two-cell proportional generator matches the hand stencil") {
    GeneratorConfig cfg = right_ibc_config(2);
    cfg.kernel.z0 = 1.0;
    auto gm = assemble_generator(cfg);
    REQUIRE(gm.G.rows() == 4);  // u_1, u_2, p_0, p_1 (left face eliminated)
    // h = 1/2: u_1' = -2(p_1 - p_0); u_2' = -4(p_b - p_1), p_b = u_2;
    // p_0' = -2 u_1; p_1' = -2(u_2 - u_1)
    Eigen::MatrixXd expect(4, 4);
    expect << 0, 0, 2, -2,
              0, -4, 0, 4,
              -2, 0, 0, 0,
              2, -2, 0, 0;
    REQUIRE((gm.G - expect).cwiseAbs().maxCoeff() <= 1e-14);
    Eigen::VectorXd w_expect(4);
    w_expect << 0.5, 0.25, 0.5, 0.5;
    REQUIRE((gm.W - w_expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("lossless generator is W-skew with an imaginary spectrum") {
    GeneratorConfig cfg;
    cfg.grid = {1.0, 50};
    cfg.bc = {BoundaryKind::NeumannU0, BoundaryKind::NeumannU0};
    auto gm = assemble_generator(cfg);
    REQUIRE(symmetric_part_norm(gm) <= 1e-10);
    auto er = eigen_report(gm);
    for (auto lam : er.eigenvalues) {
        REQUIRE(std::abs(lam.real()) <= 1e-10);
        // spectrum symmetric about the real axis
        bool partner = false;
        for (auto mu : er.eigenvalues)
            if (std::abs(mu - std::conj(lam)) <= 1e-8) partner = true;
        REQUIRE(partner);
    }
}

TEST_CASE("upwind delay block is bidiagonal with -1/dtheta and 1/dtheta") {
    GeneratorConfig cfg = right_ibc_config(4);
    cfg.kernel.z0 = 1.0;
    cfg.kernel.z_tau = 0.5;
    cfg.kernel.tau = 0.3;
    cfg.delay_cells = 10;
    cfg.k_weight = 1.0;
    auto gm = assemble_generator(cfg);
    int off = gm.n_u + gm.n_p;
    double inv = 10.0 / 0.3;
    for (int j = 0; j < 10; ++j) {
        REQUIRE_THAT(gm.G(off + j, off + j), WithinAbs(-inv, 1e-12));
        if (j > 0) REQUIRE_THAT(gm.G(off + j, off + j - 1), WithinAbs(inv, 1e-12));
    }
    // inflow row couples to the boundary face
    REQUIRE_THAT(gm.G(off, gm.n_u - 1), WithinAbs(inv, 1e-12));
}

TEST_CASE("proportional impedance generator decays strictly") {
    GeneratorConfig cfg = right_ibc_config(50);
    cfg.kernel.z0 = 1.0;
    auto gm = assemble_generator(cfg);
    auto er = eigen_report(gm);
    REQUIRE(er.max_re < 0.0);
    REQUIRE(er.min_abs > 0.0);
    REQUIRE(injectivity_check(gm) > 0.0);
    REQUIRE(dissipativity_check(gm) <= 1e-10);
}

TEST_CASE("pure derivative impedance is conservative") {
    GeneratorConfig cfg = right_ibc_config(50);
    cfg.kernel.z0 = 0.0;
    cfg.kernel.z1 = 1.0;
    auto gm = assemble_generator(cfg);
    auto er = eigen_report(gm);
    for (auto lam : er.eigenvalues) REQUIRE(std::abs(lam.real()) <= 1e-8);
    REQUIRE(std::abs(dissipativity_check(gm)) <= 1e-10);
}

TEST_CASE("delay weight steers dissipativity exactly as the interval says") {
    GeneratorConfig cfg = right_ibc_config(40);
    cfg.kernel.z0 = 1.0;
    cfg.kernel.z_tau = 0.5;
    cfg.kernel.tau = 0.3;
    cfg.delay_cells = 64;

    cfg.k_weight = 1.0;  // interval center
    REQUIRE(dissipativity_check(assemble_generator(cfg)) <= 1e-10);

    auto range = admissible_k_range(1.0, 0.5);
    cfg.k_weight = range.hi + 1.0;
    REQUIRE(dissipativity_check(assemble_generator(cfg)) > 0.0);
    cfg.k_weight = 0.5 * range.lo;
    REQUIRE(dissipativity_check(assemble_generator(cfg)) > 0.0);
}

TEST_CASE("vanishing static impedance kills injectivity") {
    GeneratorConfig cfg;
    cfg.grid = {1.0, 30};
    cfg.bc = {BoundaryKind::Impedance, BoundaryKind::Impedance};
    cfg.kernel.z0 = 1.0;
    cfg.kernel.z_tau = -1.0;  // z(0) = 0
    cfg.kernel.tau = 0.3;
    cfg.delay_cells = 48;
    cfg.k_weight = 1.0;
    auto gm = assemble_generator(cfg);
    REQUIRE(injectivity_check(gm) <= 1e-10 * gm.G.norm());

    cfg.kernel.z_tau = -0.5;  // z(0) = 1/2
    auto gm2 = assemble_generator(cfg);
    REQUIRE(injectivity_check(gm2) > 1e-6 * gm2.G.norm());
}

TEST_CASE("synthetic zero row and column is detected") {
    GeneratorConfig cfg = right_ibc_config(20);
    cfg.kernel.z0 = 1.0;
    auto gm = assemble_generator(cfg);
    REQUIRE(injectivity_check(gm) > 0.0);
    int d = static_cast<int>(gm.G.rows());
    GeneratorMatrix padded;
    padded.G = Eigen::MatrixXd::Zero(d + 1, d + 1);
    padded.G.topLeftCorner(d, d) = gm.G;
    padded.W = Eigen::VectorXd::Ones(d + 1);
    padded.W.head(d) = gm.W;
    REQUIRE(injectivity_check(padded) == 0.0);
}

TEST_CASE("certified kernels give decaying generators across families") {
    auto frac = [](bool extended) {
        auto d = fractional_density(0.5);
        d.n_poles = 24;
        d.xi_min = 1e-2;
        d.xi_max = 1e2;
        (void)extended;
        return d;
    };
    std::vector<GeneratorConfig> cfgs;
    {
        GeneratorConfig c = right_ibc_config(40);
        c.kernel.z0 = 1.0;
        cfgs.push_back(c);
    }
    {
        GeneratorConfig c = right_ibc_config(40);
        c.kernel.z0 = 1.0;
        c.kernel.z_tau = 0.5;
        c.kernel.tau = 0.3;
        c.k_weight = 1.0;
        cfgs.push_back(c);
    }
    {
        GeneratorConfig c = right_ibc_config(40);
        c.kernel.diff_standard = frac(false);
        cfgs.push_back(c);
    }
    {
        GeneratorConfig c = right_ibc_config(40);
        c.kernel.diff_extended = frac(true);
        cfgs.push_back(c);
    }
    {
        GeneratorConfig c = right_ibc_config(40);
        c.kernel.z0 = 1.0;
        c.kernel.z_tau = 0.25;
        c.kernel.tau = 0.3;
        c.kernel.z1 = 0.1;
        c.k_weight = 1.0;
        cfgs.push_back(c);
    }
    for (const auto& cfg : cfgs) {
        auto gm = assemble_generator(cfg);
        auto er = eigen_report(gm);
        REQUIRE(er.max_re <= 1e-10);
        REQUIRE(injectivity_check(gm) >= 1e-10 * gm.G.norm());
        for (auto lam : er.eigenvalues)
            if (std::abs(lam.real()) < 1e-8) REQUIRE(lam.imag() == 0.0);
        REQUIRE(dissipativity_check(gm) <= 1e-10);
    }
}

TEST_CASE("oversized generators are rejected by the eigen budget") {
    GeneratorMatrix gm;
    gm.G = Eigen::MatrixXd::Zero(5001, 5001);
    gm.W = Eigen::VectorXd::Ones(5001);
    REQUIRE_THROWS_AS(eigen_report(gm), std::invalid_argument);
}
