// Acceptance harness: runs the thirteen acceptance criteria and prints one
// PASS/FAIL line per criterion. Exit status is 0 only if every selected
// criterion passes.
//
//   acceptance [--only 1,5,13] [--out DIR]
//
// --out writes the result files of the Monte-Carlo criteria (10-12) to DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/rational.hpp>

#include "moderate/config.hpp"
#include "moderate/cutoff.hpp"
#include "moderate/errors.hpp"
#include "moderate/experiments.hpp"
#include "moderate/io.hpp"
#include "moderate/measures.hpp"
#include "moderate/mollifier.hpp"
#include "moderate/parallel.hpp"
#include "moderate/particles.hpp"
#include "moderate/runner.hpp"
#include "moderate/spectral_pde.hpp"
#include "oracles.hpp"

using namespace moderate;
using std::numbers::pi;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ------------------------------------------------------------ 1-4: PDE

Verdict heat_exactness() {
    double worst = 0.0;
    for (int d : {1, 2}) {
        const GridSpec g{d, 256, 4.0};
        const auto u = heat_propagate(oracle::gaussian(g, 0.1), 0.05);
        worst = std::max(worst, oracle::sup_rel(u, oracle::gaussian(g, 0.2)));
    }
    return {worst < 1e-6, fmt("sup rel err %.2e (< 1e-6)", worst)};
}

PdeOptions ks_options() {
    PdeOptions o;
    o.T = 1.0;
    o.dt = 1e-3;
    o.trace_every = 10;
    return o;
}

const GridSpec ks_grid{2, 128, 10.0};

Verdict mass_conservation() {
    double step_worst = 0.0;
    for (const auto& [k, g] : std::vector<std::pair<KernelSpec, GridSpec>>{
             {KernelSpec::biot_savart(), {2, 64, 5.0}},
             {KernelSpec::keller_segel_newtonian(2, 4 * pi), {2, 64, 5.0}},
             {KernelSpec::riesz(2, 0.5, true), {2, 64, 5.0}},
             {KernelSpec::keller_segel_newtonian(1, 1.0), {1, 256, 5.0}},
             {KernelSpec::coulomb(3), {3, 16, 5.0}},
             {KernelSpec::zero(2), {2, 64, 5.0}}}) {
        for (bool heun : {false, true}) {
            for (std::optional<double> A : {std::optional<double>{}, std::optional<double>{0.05}}) {
                auto u = oracle::gaussian(g, 0.6, 0.4);
                for (int s = 0; s < 5; ++s) {
                    auto next = pde_step(u, 0.01, k, A, heun);
                    step_worst = std::max(step_worst, std::abs(integral(next) - integral(u)));
                    u = std::move(next);
                }
            }
        }
    }
    const auto run = solve_pde(oracle::gaussian(ks_grid, 0.25), KernelSpec::keller_segel_newtonian(2, 4 * pi), ks_options());
    double drift = 0.0;
    for (const auto& s : run.norm_trace) drift = std::max(drift, std::abs(s.mass - run.norm_trace.front().mass));
    const bool ok = step_worst < 1e-12 && run.status == PdeStatus::Completed && drift < 1e-10;
    return {ok, fmt("worst per-step change %.2e (< 1e-12), KS 4pi drift to T=1 %.2e (< 1e-10)", step_worst, drift)};
}

Verdict lamb_oseen() {
    const GridSpec g{2, 128, 6.0};
    const auto u = oracle::gaussian(g, 0.25);
    SpectralSolver s(KernelSpec::biot_savart(), g);
    const double div = lp_norm(s.flux_divergence(u), 2.0) / lp_norm(u, 2.0);
    PdeOptions o;
    o.T = 0.5;
    o.dt = 0.01;
    const auto run = solve_pde(u, KernelSpec::biot_savart(), o);
    const double err = run.status == PdeStatus::Completed ? oracle::sup_rel(run.snapshots.back(), oracle::gaussian(g, 1.25)) : INFINITY;
    return {div < 1e-6 && err < 1e-4, fmt("flux divergence %.2e of ||u||_2 (< 1e-6), sup rel err vs heat at T=0.5 %.2e (< 1e-4)", div, err)};
}

Verdict keller_segel_dichotomy() {
    const auto sub = solve_pde(oracle::gaussian(ks_grid, 0.25), KernelSpec::keller_segel_newtonian(2, 4 * pi), ks_options());
    double peak = 0.0;
    bool finite = true;
    for (const auto& s : sub.norm_trace) {
        peak = std::max(peak, s.lr);
        finite = finite && std::isfinite(s.lr);
    }
    const auto super = solve_pde(oracle::gaussian(ks_grid, 0.05), KernelSpec::keller_segel_newtonian(2, 16 * pi), ks_options());
    const bool ok = sub.status == PdeStatus::Completed && finite && peak < 1e6 && super.status == PdeStatus::BlowUpDetected &&
                    super.t_blow < 1.0;
    return {ok, fmt("chi=4pi %s, max L^%g norm %.4g; chi=16pi %s at t=%.3f", sub.status == PdeStatus::Completed ? "completed" : "blew up",
                    sub.r, peak, super.status == PdeStatus::BlowUpDetected ? "blow-up detected" : "completed", super.t_blow)};
}

// ------------------------------------------------------------ 5-7: cutoff and forces

Verdict cutoff_suite() {
    bool ok = true;
    double worst_slope = 0.0, worst_bound = 0.0;
    for (double A : {0.05, 1.0, 7.5}) {
        const CutoffFn f(A);
        const int n = 100000;
        const double lo = -(A + 2.0), hi = A + 2.0, h = (hi - lo) / n;
        double prev = f(lo);
        for (int i = 0; i <= n; ++i) {
            const double x = lo + i * h, y = f(x);
            if (std::abs(x) <= A) ok = ok && y == x;
            if (std::abs(x) >= A + 1.0) ok = ok && y == (x > 0 ? A : -A);
            ok = ok && f(-x) == -y;
            worst_bound = std::max(worst_bound, std::abs(y) - (A + 1.0));
            if (i > 0) worst_slope = std::max(worst_slope, std::abs(y - prev) / h);
            prev = y;
        }
        ok = ok && f(A) == A && f(-A) == -A && f(A + 1.0) == A;
    }
    ok = ok && worst_slope <= 1.0 + 1e-9 && worst_bound <= 0.0;
    return {ok, fmt("identity, saturation and oddness exact; max |f'| %.12f, max |f| - (A+1) %.3f", worst_slope, worst_bound)};
}

Verdict force_tables() {
    bool ok = true;
    double origin = 0.0, far = 0.0;
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& k : {KernelSpec::riesz(2, 0.0, false), KernelSpec::riesz(2, 0.5, false), KernelSpec::biot_savart(),
                          KernelSpec::keller_segel_newtonian(2, 4 * pi)}) {
        const auto m = MollifierSpec::make(2, 1.0, 0.25, 1024);
        const auto t = ForceTable::build(k, m);
        origin = std::max(origin, std::abs(t.quadrature(0.0)));
        double x0[2] = {0.0, 0.0}, f0[2];
        t.force(x0, f0);
        ok = ok && f0[0] == 0.0 && f0[1] == 0.0;
        const double h = m.support();
        for (int i = 0; i < 1000; ++i) {
            double x[2] = {3.0 * h * u(gen), 3.0 * h * u(gen)}, mx[2] = {-x[0], -x[1]}, a[2], b[2];
            t.force(x, a);
            t.force(mx, b);
            ok = ok && a[0] == -b[0] && a[1] == -b[1];
        }
        const double rs = t.switch_radius();
        const double raw = k.radial_factor(rs) * rs;
        const double rel = std::abs(t.quadrature(rs) - raw) / std::abs(raw);
        far = std::max(far, rel / t.tol());
    }
    ok = ok && origin <= 1e-8 && far <= 1.0;
    return {ok, fmt("|(K*V^N)(0)| %.1e (<= 1e-8), oddness exact, far-field error %.4f x tol at the switch radius", origin, far)};
}

Verdict two_particle_antisymmetry() {
    std::vector<KernelSpec> kernels{KernelSpec::zero(2),
                                    KernelSpec::riesz(2, 0.0, false),
                                    KernelSpec::riesz(2, 0.5, true),
                                    KernelSpec::riesz(3, 1.5, false),
                                    KernelSpec::coulomb(3),
                                    KernelSpec::biot_savart(),
                                    KernelSpec::keller_segel(1, 1.0),
                                    KernelSpec::keller_segel_newtonian(2, 4 * pi),
                                    KernelSpec::attractive_repulsive(2, 0.3, 0.6, 1.0, 0.5)};
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (const auto& k : kernels) {
        const int d = k.dim();
        const auto moll = MollifierSpec::make(d, 1.0, 0.25, 16);
        const auto table = ForceTable::build(k, moll, 128, 1e-2);
        ParticleState s;
        s.d = d;
        s.x.resize(2 * d);
        for (int trial = 0; trial < 1000; ++trial) {
            for (auto& v : s.x) v = nd(gen) * (trial % 2 ? 0.1 : 1.0);
            for (const auto& cut : {std::optional<CutoffFn>{}, std::optional<CutoffFn>{CutoffFn(0.5)}}) {
                const auto drift = drift_direct(s, table, cut);
                for (int a = 0; a < d; ++a) worst = std::max(worst, std::abs(drift[a] + drift[d + a]));
            }
        }
    }
    return {worst <= std::numeric_limits<double>::epsilon(),
            fmt("max |centre-of-mass drift| %.1e over 1000 pairs x %zu kernels", worst, kernels.size())};
}

// ------------------------------------------------------------ 8-9: formulas and KR

Verdict rate_formulas() {
    using Q = boost::rational<long long>;
    bool ok = theoretical_rate<Q>(2, Q(1, 6), Q(1), Q(0)).rho == Q(1, 6);
    std::string s = "rho(d=2, alpha=1/6, r=inf) = 1/6";
    for (int d = 1; d <= 3; ++d) {
        const auto b = best_alpha<Q>(d, Q(1), Q(0));
        ok = ok && b.alpha == Q(1, 2 * (d + 1)) && b.rho == Q(1, 2 * (d + 1));
        s += fmt("; best alpha d=%d: %lld/%lld", d, b.alpha.numerator(), b.alpha.denominator());
    }
    return {ok, s + " (exact)"};
}

WeightedPointSet random_atoms(std::mt19937_64& gen, int d, int m) {
    std::uniform_real_distribution<double> u(-1.5, 1.5), wd(0.05, 1.0);
    WeightedPointSet s;
    s.d = d;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
        for (int a = 0; a < d; ++a) s.points.push_back(u(gen));
        s.weights.push_back(wd(gen));
        sum += s.weights.back();
    }
    for (auto& w : s.weights) w /= sum;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < s.weights.size(); ++k) total += s.weights[k];
    s.weights.back() = 1.0 - total;
    return s;
}

Verdict kr_oracle_equivalence() {
    std::mt19937_64 gen(29);
    std::uniform_int_distribution<int> sz(2, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = trial % 2 + 1;
        const int total = sz(gen);
        const int m = total / 2, n = total - m;
        const auto mu = random_atoms(gen, d, m), nu = random_atoms(gen, d, n);
        worst = std::max(worst, std::abs(kr_distance(mu, nu) - oracle::kr_oracle(mu, nu)));
    }
    double dirac = 0.0;
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = trial % 2 + 1;
        WeightedPointSet a, b;
        a.d = b.d = d;
        a.weights = b.weights = {1.0};
        double l1 = 0.0;
        for (int k = 0; k < d; ++k) {
            a.points.push_back(u(gen));
            b.points.push_back(u(gen));
            l1 += std::abs(a.points[k] - b.points[k]);
        }
        dirac = std::max(dirac, std::abs(kr_distance(a, b) - std::min(l1, 2.0)));
    }
    return {worst < 1e-6 && dirac < 1e-12, fmt("max |solver - LP| %.1e on 100 instances (< 1e-6), two-Dirac error %.1e", worst, dirac)};
}

// ------------------------------------------------------------ 10-13: Monte Carlo

ExperimentConfig heat_sweep() {
    ExperimentConfig c;
    c.experiment = "rate";
    c.kernel = {"zero", 1};
    c.init = {{1.0, {0.0}, 1.0}};
    c.grid = {256, 8.0};
    c.mollifier.alpha = 0.25;
    c.particles.n_list = {256, 512, 1024, 2048, 4096};
    c.particles.dt = 0.01;
    c.particles.t_end = 0.5;
    c.particles.snapshot_times = {0.1, 0.2, 0.3, 0.4};
    c.particles.reps = 20;
    c.particles.seed = 10;
    c.pde.dt = 0.01;
    c.rate.metric = ErrorMetric::L1;
    return c;
}

ExperimentConfig vortex(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.kernel = {"biot-savart", 2};
    c.init = {{0.5, {-0.5, 0.0}, 0.3}, {0.5, {0.5, 0.0}, 0.3}};
    c.grid = {128, 6.0};
    c.mollifier.alpha = 1.0 / 6.0;
    c.particles.dt = 0.01;
    c.particles.t_end = 0.5;
    c.particles.cutoff = CutoffMode::Auto;
    c.pde.dt = 0.01;
    if (experiment == "rate") {
        c.particles.n_list = {256, 1024, 4096};
        c.particles.snapshot_times = {0.25};
        c.particles.reps = 10;
        c.particles.seed = 11;
        c.rate.metric = ErrorMetric::L1;
    } else {
        c.particles.n_list = {128, 512, 2048};
        c.particles.reps = 20;
        c.particles.seed = 12;
    }
    return c;
}

ExperimentConfig vortex_kr() {
    auto c = vortex("rate");
    c.rate.metric = ErrorMetric::KR;
    c.rate.kr_coarsen = 1;
    return c;
}

ExperimentConfig zero_chaos() {
    ExperimentConfig c;
    c.experiment = "chaos";
    c.kernel = {"zero", 2};
    c.init = {{1.0, {0.0}, 0.5}};
    c.grid = {128, 6.0};
    c.particles.n_list = {128, 512};
    c.particles.reps = 3;
    c.particles.t_end = 0.2;
    c.pde.dt = 0.01;
    c.particles.seed = 13;
    return c;
}

using Files = std::map<std::string, std::string>;
std::map<std::string, std::vector<std::pair<std::string, std::string>>> results;  // run name -> files
std::string out_dir;

ExperimentOutput run_named(const std::string& name, const ExperimentConfig& c) {
    auto out = run_experiment(c);
    results[name] = out.files;
    if (!out_dir.empty()) {
        auto cc = c;
        cc.out_dir = out_dir + "/" + name;
        write_outputs(cc, out);
    }
    return out;
}

bool strictly_decreasing(const std::vector<RateRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].mean_err < rows[i - 1].mean_err)) return false;
    return true;
}

std::string row_text(const std::vector<RateRow>& rows) {
    std::string s;
    for (const auto& r : rows) s += fmt("%s%.4g", s.empty() ? "" : " > ", r.mean_err);
    return s;
}

Verdict heat_convergence() {
    const auto out = run_named("heat_rate", heat_sweep());
    const auto& r = *out.rate;
    const bool ok = strictly_decreasing(r.rows) && r.fit.slope >= 0.15;
    return {ok, fmt("mean L1 errors %s; slope %.3f +- %.3f (>= 0.15)", row_text(r.rows).c_str(), r.fit.slope, r.fit.half_width)};
}

Verdict vortex_convergence() {
    const auto l1 = run_named("vortex_rate_l1", vortex("rate"));
    const auto kr = run_named("vortex_rate_kr", vortex_kr());
    const auto &a = *l1.rate, &b = *kr.rate;
    const bool ok = strictly_decreasing(a.rows) && a.fit.slope > 0.0 && strictly_decreasing(b.rows) && b.fit.slope > 0.0;
    return {ok, fmt("L1 %s (slope %.3f); KR %s (slope %.3f); A = auto", row_text(a.rows).c_str(), a.fit.slope,
                    row_text(b.rows).c_str(), b.fit.slope)};
}

Verdict coupling_gap() {
    const auto z = run_named("zero_chaos", zero_chaos());
    double zmax = 0.0;
    for (const auto& r : z.chaos) zmax = std::max(zmax, r.gap);
    const auto v = run_named("vortex_chaos", vortex("chaos"));
    const double g1 = median_gap(v.chaos, 128), g2 = median_gap(v.chaos, 512), g3 = median_gap(v.chaos, 2048);
    const bool ok = zmax == 0.0 && g1 > g2 && g2 > g3;
    return {ok, fmt("zero kernel gap %g (exactly 0); Biot-Savart median gaps %.4g > %.4g > %.4g", zmax, g1, g2, g3)};
}

Verdict reproducibility() {
    if (results.size() < 5) {
        heat_convergence();
        vortex_convergence();
        coupling_gap();
    }
    const auto first = results;
    const int saved = num_threads();
    set_num_threads(8);
    std::string bad;
    std::size_t files = 0;
    for (const auto& [name, c] : std::vector<std::pair<std::string, ExperimentConfig>>{
             {"heat_rate", heat_sweep()},
             {"vortex_rate_l1", vortex("rate")},
             {"vortex_rate_kr", vortex_kr()},
             {"zero_chaos", zero_chaos()},
             {"vortex_chaos", vortex("chaos")}}) {
        const auto again = run_experiment(c).files;
        if (again != first.at(name)) bad += " " + name;
        files += again.size();
    }
    set_num_threads(saved);
    return {bad.empty(), bad.empty() ? fmt("%zu result files byte-identical at 1 and 8 threads", files)
                                     : "differences in" + bad};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else if (a == "--out" && i + 1 < argc) {
            out_dir = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--only 1,2,...] [--out DIR]\n", argv[0]);
            return 2;
        }
    }
    set_num_threads(1);
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
        double budget;  // seconds
    };
    const std::vector<Criterion> criteria{
        {"heat-semigroup exactness", heat_exactness, 1},
        {"mass conservation", mass_conservation, 30},
        {"Lamb-Oseen radiality", lamb_oseen, 30},
        {"Keller-Segel dichotomy", keller_segel_dichotomy, 120},
        {"cutoff function suite", cutoff_suite, 1},
        {"force-table invariants", force_tables, 60},
        {"two-particle antisymmetry", two_particle_antisymmetry, 1},
        {"rate formulas (exact arithmetic)", rate_formulas, 1},
        {"KR distance vs LP oracle", kr_oracle_equivalence, 60},
        {"pure-heat particle convergence", heat_convergence, 600},
        {"Biot-Savart convergence trend", vortex_convergence, 1800},
        {"coupling gap", coupling_gap, 1200},
        {"bit-reproducibility across thread counts", reproducibility, 3600},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > criteria[i].budget) {
            v.pass = false;
            v.detail += fmt("; over the %.0f s budget", criteria[i].budget);
        }
        std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed ? 1 : 0;
}
