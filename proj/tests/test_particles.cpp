#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "moderate/errors.hpp"
#include "moderate/measures.hpp"
#include "moderate/parallel.hpp"
#include "moderate/particles.hpp"
#include "moderate/rng.hpp"
#include "moderate/spectral_pde.hpp"

using namespace moderate;
using std::numbers::pi;

TEST_CASE("Philox known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) == A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    CounterRng r(7);
    CHECK(r.bits(Stream::Noise, 3, 5, 0) != r.bits(Stream::Noise, 3, 6, 0));
    CHECK(r.bits(Stream::Noise, 3, 5, 0) != r.bits(Stream::Initial, 3, 5, 0));
    CHECK(r.bits(Stream::Noise, 3, 5, 0) == CounterRng(7).bits(Stream::Noise, 3, 5, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("initial sampling") {
    const CounterRng rng(11);
    auto x = sample_initial(InitialLaw::gaussian(2, 1.0), 1'000'000, rng);
    double m[2] = {0, 0}, v[2] = {0, 0};
    for (std::size_t i = 0; i < x.size() / 2; ++i)
        for (int a = 0; a < 2; ++a) {
            m[a] += x[2 * i + a];
            v[a] += x[2 * i + a] * x[2 * i + a];
        }
    for (int a = 0; a < 2; ++a) {
        CHECK(std::abs(m[a] / 1e6) < 4e-3);
        CHECK(v[a] / 1e6 == doctest::Approx(1.0).epsilon(0.01));
    }

    InitialLaw mix;
    mix.d = 1;
    mix.components = {{0.5, {-1.0}, 0.5}, {0.5, {1.0}, 0.5}};
    auto y = sample_initial(mix, 1'000'000, rng);
    double mean = 0.0, var = 0.0;
    for (double t : y) mean += t / 1e6;
    for (double t : y) var += (t - mean) * (t - mean) / 1e6;
    CHECK(std::abs(mean) < 4e-3 * std::sqrt(1.5));
    CHECK(var == doctest::Approx(1.5).epsilon(0.01));

    InitialLaw bad = mix;
    bad.components[0].weight = 0.3;
    CHECK_THROWS_AS(sample_initial(bad, 10, rng), BadMixture);
    bad = mix;
    bad.components[1].var = 0.0;  // point mass
    CHECK_THROWS_AS(sample_initial(bad, 10, rng), BadMixture);
    bad.components.clear();
    CHECK_THROWS_AS(sample_initial(bad, 10, rng), BadMixture);

    set_num_threads(1);
    auto a = sample_initial(mix, 5000, rng);
    set_num_threads(8);
    auto b = sample_initial(mix, 5000, rng);
    set_num_threads(1);
    CHECK(a == b);
}

TEST_CASE("Euler-Maruyama step") {
    const CounterRng rng(5);
    ParticleState s;
    s.d = 2;
    s.x = sample_initial(InitialLaw::gaussian(2, 1.0), 100'000, rng);
    const auto x0 = s.x;
    std::vector<double> zero(s.x.size(), 0.0);
    ParticleState quiet = s;
    em_step(quiet, 0.1, zero, rng, false);
    CHECK(quiet.x == x0);
    CHECK(quiet.step == 1);

    const double dt = 0.01;
    em_step(s, dt, zero, rng);
    for (int a = 0; a < 2; ++a) {
        double m = 0.0, v = 0.0;
        const std::size_t n = s.size();
        for (std::size_t i = 0; i < n; ++i) m += (s.x[2 * i + a] - x0[2 * i + a]) / n;
        for (std::size_t i = 0; i < n; ++i) v += std::pow(s.x[2 * i + a] - x0[2 * i + a] - m, 2) / n;
        CHECK(v == doctest::Approx(2.0 * dt).epsilon(0.02));
    }

    std::vector<double> drift(s.x.size(), 1.0);
    ParticleState p = s, q = s;
    set_num_threads(1);
    em_step(p, dt, drift, rng);
    set_num_threads(8);
    em_step(q, dt, drift, rng);
    set_num_threads(1);
    CHECK(p.x == q.x);
    CHECK_THROWS_AS(em_step(p, 0.0, drift, rng), ValidationError);
}

TEST_CASE("direct drift symmetries") {
    std::vector<KernelSpec> kernels{KernelSpec::riesz(2, 0.0, false),      KernelSpec::riesz(2, 0.5, true),
                                    KernelSpec::biot_savart(),             KernelSpec::keller_segel_newtonian(2, 4 * pi),
                                    KernelSpec::coulomb(3),                KernelSpec::attractive_repulsive(2, 0.3, 0.6, 1.0, 0.5),
                                    KernelSpec::keller_segel(1, 1.0)};
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (const auto& k : kernels) {
        const int d = k.dim();
        const auto moll = MollifierSpec::make(d, 1.0, 0.25, 16);
        const auto table = ForceTable::build(k, moll, 1024, 1e-3);
        const std::optional<CutoffFn> cutoff = CutoffFn(0.5);
        ParticleState s;
        s.d = d;
        s.x.resize(2 * d);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            for (auto& v : s.x) v = nd(gen) * (trial % 2 ? 0.1 : 1.0);
            for (const auto& cut : {std::optional<CutoffFn>{}, cutoff}) {
                const auto drift = drift_direct(s, table, cut);
                for (int a = 0; a < d; ++a) worst = std::max(worst, std::abs(drift[a] + drift[d + a]));
            }
        }
        CHECK(worst == 0.0);
        // a lone particle feels no force
        ParticleState one;
        one.d = d;
        one.x.assign(d, 0.3);
        for (double v : drift_direct(one, table, std::nullopt)) CHECK(v == 0.0);
    }
    // symmetric configuration: the middle particle of three equally spaced ones
    const auto moll = MollifierSpec::make(2, 1.0, 0.25, 16);
    const auto table = ForceTable::build(KernelSpec::riesz(2, 0.5, false), moll, 256, 1e-3);
    ParticleState s;
    s.d = 2;
    s.x = {-0.7, 0.0, 0.0, 0.0, 0.7, 0.0};
    const auto drift = drift_direct(s, table, std::nullopt);
    CHECK(drift[2] == 0.0);
    CHECK(drift[3] == 0.0);
    CHECK(drift[0] < 0.0);  // repulsion pushes the ends outward
    CHECK(drift[4] > 0.0);

    const auto zt = ForceTable::build(KernelSpec::zero(2), moll, 64, 1e-3);
    for (double v : drift_direct(s, zt, std::nullopt)) CHECK(v == 0.0);
}

TEST_CASE("grid drift agrees with the direct drift") {
    const auto k = KernelSpec::biot_savart();
    const long N = 256;
    const auto moll = MollifierSpec::make(2, 1.0, 1.0 / 6.0, N);
    const auto table = ForceTable::build(k, moll);
    ParticleState s;
    s.d = 2;
    s.x = sample_initial(InitialLaw::gaussian(2, 1.0), N, CounterRng(9));
    const auto direct = drift_direct(s, table, std::nullopt);
    double scale = 0.0;
    for (double v : direct) scale = std::max(scale, std::abs(v));
    auto disagreement = [&](int G) {
        GridDrift gd(k, moll, GridSpec{2, G, 6.0});
        DriftStats st;
        const auto grid = gd(s, &table, std::nullopt, &st);
        CHECK(st.outliers == 0);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(grid[i] - direct[i]));
        return worst / scale;
    };
    const double e128 = disagreement(128), e256 = disagreement(256);
    MESSAGE("grid vs direct drift, relative: G=128 " << e128 << ", G=256 " << e256);
    CHECK(e256 < 1e-2);
    CHECK(e256 < e128);

    // a particle outside the grid is handled directly, with the same answer
    ParticleState far = s;
    far.x[0] = 5.9;
    far.x[1] = -5.95;
    const auto direct_far = drift_direct(far, table, std::nullopt);
    GridDrift gd(k, moll, GridSpec{2, 256, 6.0});
    DriftStats st;
    const auto grid_far = gd(far, &table, std::nullopt, &st);
    CHECK(st.outliers == 1);
    CHECK(grid_far[0] == doctest::Approx(direct_far[0]).epsilon(1e-12));
    CHECK(grid_far[1] == doctest::Approx(direct_far[1]).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t i = 2; i < grid_far.size(); ++i) worst = std::max(worst, std::abs(grid_far[i] - direct_far[i]));
    CHECK(worst < 1e-2 * scale);
    CHECK_THROWS_AS(gd(far, nullptr, std::nullopt), DomainError);

    GridDrift zero(KernelSpec::zero(2), moll, GridSpec{2, 64, 6.0});
    for (double v : zero(s, nullptr, std::nullopt)) CHECK(v == 0.0);
}

TEST_CASE("cutoff saturation bound") {
    const auto k = KernelSpec::keller_segel_newtonian(2, 8 * pi);
    const long N = 64;
    const auto moll = MollifierSpec::make(2, 1.0, 0.5, N);
    const auto table = ForceTable::build(k, moll, 512, 1e-3);
    ParticleState s;
    s.d = 2;
    s.x = sample_initial(InitialLaw::gaussian(2, 0.05), N, CounterRng(2));
    const std::optional<CutoffFn> cut = CutoffFn(0.2);
    DriftStats st;
    for (double v : drift_direct(s, table, cut, &st)) CHECK(std::abs(v) <= 0.2 + 16.0 / 81.0);
    CHECK(st.evaluations == 2 * N);
    CHECK(st.saturated > 0);
    CHECK(st.saturated_fraction() <= 1.0);
}

TEST_CASE("simulation driver") {
    SimulationConfig cfg;
    cfg.kernel = KernelSpec::zero(1);
    cfg.init = InitialLaw::gaussian(1, 0.5);
    cfg.grid = GridSpec{1, 512, 8.0};
    cfg.T = 0.5;
    cfg.dt = 0.05;
    cfg.snapshot_times = {0.25};

    SUBCASE("single particle is a Brownian motion") {
        cfg.N = 1;
        cfg.alpha = 0.0;
        cfg.deposit = false;
        const auto r = simulate(cfg);
        REQUIRE(r.snapshots.size() == 3);
        // replay the same increments by hand
        const CounterRng rng(cfg.seed);
        double x = sample_initial(cfg.init, 1, rng)[0];
        for (int k = 0; k < 10; ++k) {
            double z;
            rng.normals(Stream::Noise, 0, k, std::span<double>(&z, 1));
            x += std::sqrt(2.0 * cfg.dt) * z;
        }
        CHECK(r.snapshots.back().positions[0] == x);
    }
    SUBCASE("reproducible across runs and thread counts") {
        cfg.kernel = KernelSpec::keller_segel(1, 1.0);
        cfg.N = 300;
        set_num_threads(1);
        const auto a = simulate(cfg);
        set_num_threads(8);
        const auto b = simulate(cfg);
        set_num_threads(1);
        REQUIRE(a.snapshots.size() == b.snapshots.size());
        for (std::size_t i = 0; i < a.snapshots.size(); ++i) CHECK(a.snapshots[i].positions == b.snapshots[i].positions);
        for (std::size_t i = 0; i < a.fields.size(); ++i) CHECK(a.fields[i].values == b.fields[i].values);
        CHECK(a.snapshots[1].t == 0.25);
        CHECK(a.fields.size() == 3);
    }
    SUBCASE("pure heat: u^N approaches the heat solution") {
        const auto exact = heat_propagate(cfg.init.density(cfg.grid), cfg.T);
        double prev = INFINITY;
        for (long N = 1 << 8; N <= 1 << 12; N <<= 2) {
            cfg.N = N;
            double err = 0.0;
            for (int rep = 0; rep < 4; ++rep) {
                cfg.seed = derive_seed(17, rep);
                auto u = simulate(cfg).fields.back();
                for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] -= exact.values[i];
                err += lp_norm(u, 1.0) / 4;
            }
            CHECK(err < prev);
            prev = err;
        }
    }
    SUBCASE("validation lists every problem") {
        cfg.N = 0;
        cfg.dt = 0.3;
        try {
            simulate(cfg);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("N must be") != std::string::npos);
            CHECK(msg.find("multiple of dt") != std::string::npos);
        }
    }
}
