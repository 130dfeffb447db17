#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ibcwave/wavesim.hpp"

using namespace ibcwave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimOptions base_options() {
    SimOptions opt;
    opt.grid = {1.0, 200};
    opt.bc = {BoundaryKind::NeumannU0, BoundaryKind::Impedance};
    opt.kernel.z0 = 1.0;
    return opt;
}

}  // namespace

TEST_CASE("constant pressure between closed ends is stationary") {
    SimOptions opt;
    opt.grid = {1.0, 40};
    opt.bc = {BoundaryKind::NeumannU0, BoundaryKind::NeumannU0};
    opt.initial.kind = InitialData::Kind::ConstantPressure;
    opt.initial.amplitude = 2.5;
    WaveSim sim(opt);
    for (int s = 0; s < 50; ++s) sim.step();
    REQUIRE(sim.u().cwiseAbs().maxCoeff() <= 1e-14);
    for (int i = 0; i < opt.grid.n; ++i) REQUIRE_THAT(sim.p()[i], WithinAbs(2.5, 1e-13));
}

TEST_CASE("proportional absorber swallows a rightward pulse") {
    SimOptions opt = base_options();
    opt.initial.kind = InitialData::Kind::RightwardPulse;
    opt.initial.center = 0.5;
    opt.initial.width = 0.05;
    opt.t_final = 1.2;
    auto rep = run_simulation(opt);
    REQUIRE(rep.final_energy.total / rep.initial_energy.total < 1e-3);
}

TEST_CASE("reflected energy fraction refines at second order or better") {
    std::vector<double> ratios;
    for (int n : {100, 200, 400}) {
        SimOptions opt = base_options();
        opt.grid.n = n;
        opt.initial.kind = InitialData::Kind::RightwardPulse;
        opt.initial.center = 0.5;
        opt.initial.width = 0.05;
        opt.t_final = 1.2;
        auto rep = run_simulation(opt);
        ratios.push_back(rep.final_energy.total / rep.initial_energy.total);
    }
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        double order = std::log2(ratios[i - 1] / ratios[i]);
        REQUIRE(order >= 1.9);
    }
}

TEST_CASE("delay impedance run is monotonically dissipative") {
    SimOptions opt = base_options();
    opt.kernel.z_tau = 0.5;
    opt.kernel.tau = 0.3;
    opt.k_weight = 1.0;
    opt.initial.seed = 42;
    WaveSim sim(opt);
    double e0 = sim.energy().total;
    double prev = e0;
    for (int s = 0; s < 2000; ++s) {
        auto info = sim.step();
        double e = sim.energy().total;
        REQUIRE(e <= prev + 1e-12 * e0);
        // exact discrete energy identity, step by step
        REQUIRE_THAT(info.energy_after - info.energy_before,
                     WithinAbs(sim.dt() * info.dissipation, 1e-12 * e0));
        prev = e;
    }
}

TEST_CASE("full composite kernel satisfies the step energy identity") {
    SimOptions opt = base_options();
    opt.kernel.z0 = 1.2;
    opt.kernel.z_tau = 0.4;
    opt.kernel.tau = 0.25;
    opt.kernel.z1 = 0.2;
    opt.kernel.diff_standard = fractional_density(0.5);
    opt.kernel.diff_standard->n_poles = 40;
    opt.kernel.diff_standard->xi_min = 1e-3;
    opt.kernel.diff_standard->xi_max = 1e3;
    opt.kernel.diff_extended = fractional_density(0.5);
    opt.kernel.diff_extended->n_poles = 40;
    opt.kernel.diff_extended->xi_min = 1e-3;
    opt.kernel.diff_extended->xi_max = 1e3;
    opt.k_weight = 1.2;
    opt.initial.seed = 5;
    WaveSim sim(opt);
    double e0 = sim.energy().total;
    for (int s = 0; s < 500; ++s) {
        auto info = sim.step();
        REQUIRE_THAT(info.energy_after - info.energy_before,
                     WithinAbs(sim.dt() * info.dissipation, 1e-12 * e0));
        REQUIRE(info.dissipation <= 1e-14);
    }
}

TEST_CASE("lossless configurations conserve energy to roundoff") {
    for (auto right : {BoundaryKind::NeumannU0, BoundaryKind::DirichletP0}) {
        SimOptions opt;
        opt.grid = {1.0, 100};
        opt.bc = {BoundaryKind::NeumannU0, right};
        opt.initial.seed = 3;
        WaveSim sim(opt);
        double e0 = sim.energy().total;
        double lo = e0, hi = e0;
        for (int s = 0; s < 10000; ++s) {
            sim.step();
            double e = sim.energy().total;
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        REQUIRE((hi - lo) / e0 <= 1e-12);
    }
}

TEST_CASE("energy breakdown") {
    SECTION("zero state gives all zeros") {
        SimOptions opt = base_options();
        opt.initial.kind = InitialData::Kind::Zero;
        WaveSim sim(opt);
        auto e = sim.energy();
        REQUIRE(e.wave == 0.0);
        REQUIRE(e.delay == 0.0);
        REQUIRE(e.diffusive == 0.0);
        REQUIRE(e.eta == 0.0);
        REQUIRE(e.total == 0.0);
    }
    SECTION("unit pressure on the unit interval carries energy 1/2") {
        SimOptions opt = base_options();
        opt.initial.kind = InitialData::Kind::ConstantPressure;
        opt.initial.amplitude = 1.0;
        WaveSim sim(opt);
        auto e = sim.energy();
        REQUIRE_THAT(e.total, WithinRel(0.5, 1e-13));
        REQUIRE(e.delay == 0.0);
        REQUIRE(e.diffusive == 0.0);
        REQUIRE(e.eta == 0.0);
    }
    SECTION("independent flat summation agrees to 1e-14 relative") {
        SimOptions opt = base_options();
        opt.kernel.z_tau = 0.3;
        opt.kernel.tau = 0.3;
        opt.kernel.z1 = 0.5;
        opt.kernel.diff_standard = fractional_density(0.5);
        opt.kernel.diff_standard->n_poles = 30;
        opt.kernel.diff_standard->xi_min = 1e-2;
        opt.kernel.diff_standard->xi_max = 1e2;
        opt.initial.seed = 19;
        WaveSim sim(opt);
        for (int s = 0; s < 137; ++s) sim.step();
        auto e = sim.energy();

        long double acc = 0.0L;
        double h = opt.grid.h();
        for (int i = 0; i <= opt.grid.n; ++i) {
            double w = (i == 0 || i == opt.grid.n) ? 0.5 * h : h;
            acc += 0.5L * w * sim.u()[i] * sim.u()[i];
        }
        for (int i = 0; i < opt.grid.n; ++i) acc += 0.5L * h * sim.p()[i] * sim.p()[i];
        const auto& b = sim.boundaries()[1];
        const auto& line = *b.delay;
        for (int j = 0; j < line.cells(); ++j)
            acc += 0.5L * line.weight() * line.dtheta() * line.sample(j) * line.sample(j);
        const auto& bank = *b.standard;
        for (std::size_t k = 0; k < bank.measure().size(); ++k)
            acc += 0.5L * bank.measure().weights[k] * bank.state()[k] * bank.state()[k];
        acc += 0.5L * b.z1 * b.deriv.eta * b.deriv.eta;
        REQUIRE_THAT(static_cast<double>(acc), WithinRel(e.total, 1e-14));
    }
}

TEST_CASE("derivative plus proportional kernel dissipates exactly z0 |u.n|^2") {
    SimOptions opt;
    opt.grid = {1.0, 100};
    opt.bc = {BoundaryKind::NeumannU0, BoundaryKind::Impedance};
    opt.kernel.z0 = 1.0;
    opt.kernel.z1 = 1.0;
    opt.t_final = 10.0;
    opt.initial.seed = 11;
    auto rep = run_simulation(opt);
    double work = 0.0;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        work += rep.dt * rep.rows[i].u_n * rep.rows[i].u_n;
    work *= opt.kernel.z0;
    double drop = rep.initial_energy.total - rep.final_energy.total;
    REQUIRE_THAT(drop, WithinRel(work, 1e-10));
}

TEST_CASE("extended fractional impedance decays monotonically") {
    SimOptions opt = base_options();
    opt.kernel.z0 = 0.0;
    opt.kernel.diff_extended = fractional_density(0.5);
    opt.kernel.diff_extended->n_poles = 50;
    opt.t_final = 5.0;
    opt.initial.seed = 23;
    auto rep = run_simulation(opt);
    REQUIRE(rep.max_step_energy_increase <= 1e-13 * rep.initial_energy.total);
    REQUIRE(rep.final_energy.total < rep.initial_energy.total);
}

TEST_CASE("zero initial data stays identically zero") {
    SimOptions opt = base_options();
    opt.kernel.z_tau = 0.2;
    opt.kernel.tau = 0.3;
    opt.initial.kind = InitialData::Kind::Zero;
    opt.t_final = 1.0;
    auto rep = run_simulation(opt);
    for (const auto& row : rep.rows) {
        REQUIRE(row.E_total == 0.0);
        REQUIRE(row.u_n == 0.0);
        REQUIRE(row.p_boundary == 0.0);
    }
}

TEST_CASE("delay alignment is enforced at configuration time") {
    SimOptions opt = base_options();
    opt.kernel.z_tau = 0.5;
    opt.kernel.tau = 0.3;
    opt.k_weight = 1.0;
    opt.dt = 0.1;  // 0.3 / 0.1 = 3: aligned
    REQUIRE_NOTHROW(WaveSim(opt));
    opt.dt = 0.07;  // not a divisor of tau
    REQUIRE_THROWS_AS(WaveSim(opt), std::invalid_argument);
}

TEST_CASE("delayed sqrt kernels have no time-domain realization") {
    SimOptions opt = base_options();
    opt.kernel.delayed_diffusive = DelayedDiffusiveTerm{1.0, 0.5};
    REQUIRE_THROWS_AS(WaveSim(opt), std::invalid_argument);
}

TEST_CASE("summation-by-parts identity reduces to boundary work") {
    // (p, Du)_h + (u, Dp)_w = u_n p_b,r - u_0 p_b,l for the staggered pair
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int n = 33;
    double h = 1.0 / n;
    std::vector<double> u(static_cast<std::size_t>(n) + 1), p(static_cast<std::size_t>(n));
    for (auto& v : u) v = uni(rng);
    for (auto& v : p) v = uni(rng);
    double pbl = uni(rng), pbr = uni(rng);

    double ip_du = 0.0;  // h sum p_i (u_{i+1} - u_i)/h
    for (int i = 0; i < n; ++i) ip_du += p[i] * (u[i + 1] - u[i]);
    double iu_dp = 0.0;  // face-weighted sum u_i (Dp)_i with half-cell closures
    for (int i = 1; i < n; ++i) iu_dp += u[i] * (p[i] - p[i - 1]);
    iu_dp += u[0] * (p[0] - pbl);
    iu_dp += u[n] * (pbr - p[n - 1]);

    REQUIRE_THAT(ip_du + iu_dp, WithinAbs(u[n] * pbr - u[0] * pbl, 1e-12));
}

TEST_CASE("boundary snapshot has the documented header") {
    SimOptions opt = base_options();
    opt.kernel.z_tau = 0.3;
    opt.kernel.tau = 0.3;
    opt.kernel.z1 = 0.1;
    opt.kernel.diff_standard = fractional_density(0.5);
    opt.kernel.diff_standard->n_poles = 8;
    WaveSim sim(opt);
    auto csv = sim.boundary_snapshot_csv();
    REQUIRE(csv.rfind("node,xi_or_theta,value\n", 0) == 0);
}

TEST_CASE("time series CSV uses the documented header") {
    SimOptions opt = base_options();
    opt.t_final = 0.1;
    auto rep = run_simulation(opt);
    auto csv = rep.to_csv();
    REQUIRE(csv.rfind("t,E_total,E_wave,E_delay,E_diff,E_eta,u_n,p_boundary\n", 0) == 0);
}
