// Command-line front end.
//
// Exit codes: 0 success (a detected blow-up is a successful run whose status
// is in the summary), 1 invalid input, 2 runtime failure.

#include <boost/rational.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "moderate/config.hpp"
#include "moderate/errors.hpp"
#include "moderate/experiments.hpp"
#include "moderate/io.hpp"
#include "moderate/measures.hpp"
#include "moderate/parallel.hpp"
#include "moderate/runner.hpp"

using namespace moderate;
namespace fs = std::filesystem;
using Q = boost::rational<long long>;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

ExperimentConfig load(const Globals& g, const std::string& experiment) {
    ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
    c.experiment = experiment;
    if (g.seed) c.particles.seed = *g.seed;
    if (g.out) c.out_dir = *g.out;
    return c;
}

int cmd_experiment(const Globals& g, const std::string& experiment) {
    const auto c = load(g, experiment);
    const auto out = run_experiment(c);
    write_outputs(c, out);
    std::printf("%s", out.message.c_str());
    return 0;
}

Measure load_measure(const std::string& file) {
    const std::string bytes = read_file(file);
    if (bytes.rfind("MIPGRID1", 0) == 0) return decode_grid(bytes);
    auto [d, x] = read_positions_csv(file);
    return WeightedPointSet::empirical(d, std::move(x));
}

int cmd_distance(const Globals& g, const std::string& a, const std::string& b, int coarsen) {
    KrOptions o;
    o.coarsen = coarsen;
    const double kr = kr_distance(load_measure(a), load_measure(b), o);
    std::printf("kr = %s\n", format_real(kr).c_str());
    if (g.out) {
        const std::string f = (fs::path(*g.out) / "distance.csv").string();
        std::string text = fs::exists(f) ? read_file(f) : "a,b,kr\n";
        text += a + "," + b + "," + format_real(kr) + "\n";
        write_file(f, text);
    }
    return 0;
}

// Exact rational from "3", "0.25", "1/6"; "inf" is handled by callers.
Q parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash != std::string::npos) return parse_rational(s.substr(0, slash)) / parse_rational(s.substr(slash + 1));
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    long long num = 0, den = 1;
    bool digits = false, dot = false;
    for (; i < s.size(); ++i) {
        if (s[i] == '.' && !dot) {
            dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            if (num > 100'000'000'000LL || den > 100'000'000'000LL) throw ValidationError("too many digits in '" + s + "'");
            num = num * 10 + (s[i] - '0');
            if (dot) den *= 10;
            digits = true;
        } else {
            throw ValidationError("not an exact decimal or fraction: '" + s + "'");
        }
    }
    if (!digits) throw ValidationError("not a number: '" + s + "'");
    return Q(neg ? -num : num, den);
}

Q inverse_exponent(const std::string& r) {
    if (r == "inf") return Q(0);
    const Q v = parse_rational(r);
    if (v <= Q(0)) throw ValidationError("exponent must be positive");
    return Q(1) / v;
}

std::string show(const Q& q) {
    std::string s = std::to_string(q.numerator());
    if (q.denominator() != 1) s += "/" + std::to_string(q.denominator());
    return s + " (" + format_real(boost::rational_cast<double>(q)) + ")";
}

struct RatesArgs {
    int d = 2;
    std::string zeta = "1", r = "inf";
    std::optional<std::string> alpha, beta, r_tilde, delta;
    bool best = false, singular = false;
};

int cmd_rates_calc(const RatesArgs& a) {
    if (a.d < 1 || a.d > 3) throw ValidationError("d must be 1, 2 or 3");
    const Q zeta = parse_rational(a.zeta);
    bool any = false;
    if (a.singular) {
        if (!a.beta || !a.r_tilde) throw ValidationError("--singular needs --beta and --r-tilde");
        const Q beta = parse_rational(*a.beta), inv_rt = inverse_exponent(*a.r_tilde);
        std::printf("singular window: %s\n", singular_window(a.d, beta, inv_rt) ? "nonempty" : "empty");
        std::printf("alpha bound = %s\n", show(alpha_bound_singular(a.d, beta, inv_rt)).c_str());
        if (a.alpha) {
            const auto r = theoretical_rate_singular(a.d, parse_rational(*a.alpha), zeta, beta, inv_rt);
            std::printf("rho~ = %s\nadmissible = %s\n", show(r.rho).c_str(), r.admissible ? "true" : "false");
            any = true;
        }
        if (a.best) {
            const auto b = best_alpha_singular(a.d, zeta, beta, inv_rt);
            std::printf("alpha* = %s%s\nrho* = %s\n", show(b.alpha).c_str(), b.at_boundary ? " (supremum)" : "",
                        show(b.rho).c_str());
            any = true;
        }
    } else {
        const Q inv_r = inverse_exponent(a.r);
        std::printf("kappa = %s\nalpha bound = %s\n", show(kappa(a.d, inv_r)).c_str(), show(alpha_bound(a.d, inv_r)).c_str());
        if (a.alpha) {
            const auto r = theoretical_rate(a.d, parse_rational(*a.alpha), zeta, inv_r);
            std::printf("rho = %s\nadmissible = %s\n", show(r.rho).c_str(), r.admissible ? "true" : "false");
            any = true;
        }
        if (a.best) {
            const auto b = best_alpha(a.d, zeta, inv_r);
            std::printf("alpha* = %s%s\nrho* = %s\n", show(b.alpha).c_str(), b.at_boundary ? " (supremum)" : "",
                        show(b.rho).c_str());
            any = true;
        }
    }
    if (a.delta) {
        if (!a.beta || !a.r_tilde) throw ValidationError("--delta needs --beta and --r-tilde");
        const auto e = sobolev_rate_exponent(a.d, parse_real(*a.beta), parse_real(*a.r_tilde), parse_real(*a.delta));
        std::printf("gamma = %s\ngamma/beta = %s\nholder embedding = %s\n", format_real(e.gamma).c_str(),
                    format_real(e.factor).c_str(), e.holder_embedding ? "true" : "false");
        any = true;
    }
    if (!any) throw ValidationError("nothing to compute: pass --alpha, --best-alpha or --delta");
    return 0;
}

struct KernelArgs {
    std::optional<std::string> family;
    int d = 2;
    double s = 0.0, chi = 0.0, a = 0.0, b = 0.0, va = 0.0, vb = 0.0;
    bool attractive = false, literal_chi = false;
};

int cmd_kernels(const Globals& g, const KernelArgs& k) {
    ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
    if (k.family) {
        c.kernel = {};
        c.kernel.family = *k.family;
        c.kernel.d = k.d;
        c.kernel.s = k.s;
        c.kernel.chi = k.chi;
        c.kernel.attractive = k.attractive;
        c.kernel.newtonian = !k.literal_chi;
        c.kernel.a = k.a;
        c.kernel.b = k.b;
        c.kernel.va = k.va;
        c.kernel.vb = k.vb;
    }
    const auto spec = c.kernel_spec();
    std::printf("%s\n%s", spec.describe().c_str(), assumption_report(spec).to_text().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moderately interacting particle systems: PDE reference solver, particle simulation and rate experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "configuration file (section.key = value)");
    app.add_option("--seed", g.seed, "override particles.seed");
    app.add_option("--out", g.out, "output directory (overrides output.dir)");
    app.add_option("--threads", g.threads, "worker threads (default: MC_THREADS, else 1)")->check(CLI::PositiveNumber);

    KernelArgs ka;
    auto* kernels = app.add_subcommand("kernels", "print the assumption report of a kernel");
    kernels->add_option("--family", ka.family, "zero, riesz, coulomb, biot-savart, keller-segel, attractive-repulsive");
    kernels->add_option("--d", ka.d, "dimension");
    kernels->add_option("--s", ka.s, "Riesz exponent");
    kernels->add_flag("--attractive", ka.attractive, "attractive Riesz kernel");
    kernels->add_option("--chi", ka.chi, "Keller-Segel sensitivity");
    kernels->add_flag("--literal-chi", ka.literal_chi, "K = -chi x/|x|^d without the Newtonian normalization");
    kernels->add_option("--a", ka.a, "repulsive exponent");
    kernels->add_option("--b", ka.b, "attractive exponent");
    kernels->add_option("--va", ka.va, "repulsive strength");
    kernels->add_option("--vb", ka.vb, "attractive strength");

    auto* pde = app.add_subcommand("pde", "solve the reference PDE and dump snapshots and the norm trace");
    auto* sim = app.add_subcommand("simulate", "one particle run with u^N snapshots");
    auto* rate = app.add_subcommand("rate", "error sweep over particles.n_list");
    auto* chaos = app.add_subcommand("chaos", "coupling gap against McKean-Vlasov copies");

    std::string da, db;
    int coarsen = 0;
    auto* dist = app.add_subcommand("distance", "bounded-Lipschitz distance between two snapshot files");
    dist->add_option("a", da, "grid container or particle CSV")->required();
    dist->add_option("b", db, "grid container or particle CSV")->required();
    dist->add_option("--coarsen", coarsen, "sum grid inputs over 2^k blocks per axis")->check(CLI::NonNegativeNumber);

    RatesArgs ra;
    auto* rates = app.add_subcommand("rates", "theoretical rates");
    rates->require_subcommand(1);
    auto* calc = rates->add_subcommand("calc", "rate, best alpha and Sobolev exponent in exact arithmetic");
    calc->add_option("--d", ra.d, "dimension");
    calc->add_option("--zeta", ra.zeta, "zeta in (0, 1]");
    calc->add_option("--r", ra.r, "norm exponent r (inf allowed)");
    calc->add_option("--alpha", ra.alpha, "alpha to evaluate");
    calc->add_flag("--best-alpha", ra.best, "optimal alpha and rate");
    calc->add_flag("--singular", ra.singular, "singular class (needs --beta, --r-tilde)");
    calc->add_option("--beta", ra.beta, "beta");
    calc->add_option("--r-tilde", ra.r_tilde, "r~ (inf allowed)");
    calc->add_option("--delta", ra.delta, "delta for the Sobolev exponent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        if (g.threads) set_num_threads(*g.threads);
        if (*kernels) return cmd_kernels(g, ka);
        if (*pde) return cmd_experiment(g, "pde");
        if (*sim) return cmd_experiment(g, "simulate");
        if (*rate) return cmd_experiment(g, "rate");
        if (*chaos) return cmd_experiment(g, "chaos");
        if (*dist) return cmd_distance(g, da, db, coarsen);
        if (*calc) return cmd_rates_calc(ra);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
