#include "moderate/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "moderate/errors.hpp"

namespace moderate {

std::string format_real(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "inf" || s == "+inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    const auto slash = s.find('/');
    if (slash != std::string::npos) return parse_real(s.substr(0, slash)) / parse_real(s.substr(slash + 1));
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

long parse_long(const std::string& s) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> v;
    if (s.empty()) return v;
    for (const auto& p : split(s, ',')) v.push_back(parse_real(p));
    return v;
}

std::string fmt_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_real(v[i]);
    return s;
}

std::string drift_name(DriftPath p) {
    switch (p) {
        case DriftPath::Direct: return "direct";
        case DriftPath::Grid: return "grid";
        case DriftPath::Auto: return "auto";
    }
    return "?";
}

// "weight : m1, m2 : var" components separated by ';'.
std::vector<GaussianComponent> parse_mixture(const std::string& s) {
    std::vector<GaussianComponent> out;
    for (const auto& part : split(s, ';')) {
        if (part.empty()) continue;
        const auto f = split(part, ':');
        if (f.size() != 3) throw ConfigError("mixture component '" + part + "' is not 'weight : mean : var'");
        out.push_back({parse_real(f[0]), parse_reals(f[1]), parse_real(f[2])});
    }
    return out;
}

std::string fmt_mixture(const std::vector<GaussianComponent>& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        s += (i ? "; " : "") + format_real(m[i].weight) + " : " + fmt_reals(m[i].mean) + " : " + format_real(m[i].var);
    }
    return s;
}

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define REAL_KEY(name, field) \
    Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_real(v); }, \
        [](const ExperimentConfig& c) { return format_real(c.field); }}
#define INT_KEY(name, field) \
    Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = static_cast<decltype(c.field)>(parse_long(v)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define BOOL_KEY(name, field) \
    Key{name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(v); }, \
        [](const ExperimentConfig& c) { return fmt_bool(c.field); }}

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        {"experiment", [](ExperimentConfig& c, const std::string& v) { c.experiment = v; },
         [](const ExperimentConfig& c) { return c.experiment; }},
        {"kernel.family", [](ExperimentConfig& c, const std::string& v) { c.kernel.family = v; },
         [](const ExperimentConfig& c) { return c.kernel.family; }},
        INT_KEY("kernel.d", kernel.d),
        REAL_KEY("kernel.s", kernel.s),
        BOOL_KEY("kernel.attractive", kernel.attractive),
        REAL_KEY("kernel.chi", kernel.chi),
        BOOL_KEY("kernel.newtonian", kernel.newtonian),
        REAL_KEY("kernel.a", kernel.a),
        REAL_KEY("kernel.b", kernel.b),
        REAL_KEY("kernel.va", kernel.va),
        REAL_KEY("kernel.vb", kernel.vb),
        {"init.mixture", [](ExperimentConfig& c, const std::string& v) { c.init = parse_mixture(v); },
         [](const ExperimentConfig& c) { return fmt_mixture(c.init); }},
        INT_KEY("grid.g", grid.G),
        REAL_KEY("grid.l", grid.L),
        REAL_KEY("mollifier.radius", mollifier.radius),
        REAL_KEY("mollifier.alpha", mollifier.alpha),
        INT_KEY("mollifier.table_resolution", mollifier.table_resolution),
        REAL_KEY("mollifier.table_tol", mollifier.table_tol),
        INT_KEY("particles.n", particles.n),
        {"particles.n_list",
         [](ExperimentConfig& c, const std::string& v) {
             c.particles.n_list.clear();
             if (!v.empty())
                 for (const auto& p : split(v, ',')) c.particles.n_list.push_back(parse_long(p));
         },
         [](const ExperimentConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.particles.n_list.size(); ++i)
                 s += (i ? ", " : "") + std::to_string(c.particles.n_list[i]);
             return s;
         }},
        REAL_KEY("particles.dt", particles.dt),
        REAL_KEY("particles.t_end", particles.t_end),
        {"particles.seed", [](ExperimentConfig& c, const std::string& v) {
             std::uint64_t s = 0;
             const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
             if (ec != std::errc() || p != v.data() + v.size() || v.empty()) throw ConfigError("not a seed: '" + v + "'");
             c.particles.seed = s;
         },
         [](const ExperimentConfig& c) { return std::to_string(c.particles.seed); }},
        {"particles.cutoff_a",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "none") {
                 c.particles.cutoff = CutoffMode::None;
                 c.particles.cutoff_a = 0.0;
             } else if (v == "auto") {
                 c.particles.cutoff = CutoffMode::Auto;
                 c.particles.cutoff_a = 0.0;
             } else {
                 c.particles.cutoff = CutoffMode::Value;
                 c.particles.cutoff_a = parse_real(v);
             }
         },
         [](const ExperimentConfig& c) -> std::string {
             switch (c.particles.cutoff) {
                 case CutoffMode::None: return "none";
                 case CutoffMode::Auto: return "auto";
                 case CutoffMode::Value: return format_real(c.particles.cutoff_a);
             }
             return "?";
         }},
        REAL_KEY("particles.cutoff_c", particles.cutoff_c),
        {"particles.drift_path",
         [](ExperimentConfig& c, const std::string& v) {
             for (auto p : {DriftPath::Direct, DriftPath::Grid, DriftPath::Auto}) {
                 if (drift_name(p) == v) {
                     c.particles.drift_path = p;
                     return;
                 }
             }
             throw ConfigError("drift path must be direct, grid or auto, got '" + v + "'");
         },
         [](const ExperimentConfig& c) { return drift_name(c.particles.drift_path); }},
        {"particles.snapshot_times", [](ExperimentConfig& c, const std::string& v) { c.particles.snapshot_times = parse_reals(v); },
         [](const ExperimentConfig& c) { return fmt_reals(c.particles.snapshot_times); }},
        INT_KEY("particles.reps", particles.reps),
        BOOL_KEY("particles.noise", particles.noise),
        REAL_KEY("pde.dt", pde.dt),
        REAL_KEY("pde.r", pde.r),
        BOOL_KEY("pde.heun", pde.heun),
        REAL_KEY("pde.guard", pde.guard),
        {"pde.snapshot_times", [](ExperimentConfig& c, const std::string& v) { c.pde.snapshot_times = parse_reals(v); },
         [](const ExperimentConfig& c) { return fmt_reals(c.pde.snapshot_times); }},
        INT_KEY("pde.trace_every", pde.trace_every),
        {"rate.metric", [](ExperimentConfig& c, const std::string& v) {
             try {
                 c.rate.metric = parse_metric(v);
             } catch (const ValidationError& e) {
                 throw ConfigError(e.what());
             }
         },
         [](const ExperimentConfig& c) { return metric_name(c.rate.metric); }},
        REAL_KEY("rate.moment", rate.moment),
        INT_KEY("rate.burn_in", rate.burn_in),
        INT_KEY("rate.kr_coarsen", rate.kr_coarsen),
        {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
         [](const ExperimentConfig& c) { return c.out_dir; }},
    };
    return k;
}

#undef REAL_KEY
#undef INT_KEY
#undef BOOL_KEY

[[noreturn]] void throw_all(const std::string& head, const std::vector<std::string>& errs) {
    std::ostringstream os;
    os << head;
    for (const auto& e : errs) os << "\n  - " << e;
    throw ConfigError(os.str());
}

bool on_lattice(double t, double dt) {
    const double k = t / dt;
    return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, k);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::vector<std::string> errs;
    std::map<std::string, int> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errs.push_back(where + "expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto& ks = keys();
        const auto it = std::find_if(ks.begin(), ks.end(), [&](const Key& k) { return key == k.name; });
        if (it == ks.end()) {
            errs.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (seen.count(key)) {
            errs.push_back(where + "'" + key + "' already set on line " + std::to_string(seen[key]));
            continue;
        }
        seen[key] = lineno;
        try {
            it->set(c, value);
        } catch (const Error& e) {
            errs.push_back(where + key + ": " + e.what());
        }
    }
    if (!errs.empty()) throw_all("invalid configuration:", errs);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_text(const ExperimentConfig& c) {
    std::string s;
    for (const auto& k : keys()) s += std::string(k.name) + " = " + k.get(c) + "\n";
    return s;
}

KernelSpec ExperimentConfig::kernel_spec() const {
    const int d = kernel.d;
    switch (parse_family(kernel.family)) {
        case Family::Zero: return KernelSpec::zero(d);
        case Family::Riesz: return KernelSpec::riesz(d, kernel.s, kernel.attractive);
        case Family::Coulomb: return KernelSpec::coulomb(d);
        case Family::BiotSavart:
            if (d != 2) throw OutOfCatalog("the Biot-Savart kernel needs d = 2");
            return KernelSpec::biot_savart();
        case Family::KellerSegel:
            return kernel.newtonian ? KernelSpec::keller_segel_newtonian(d, kernel.chi) : KernelSpec::keller_segel(d, kernel.chi);
        case Family::AttractiveRepulsive: return KernelSpec::attractive_repulsive(d, kernel.a, kernel.b, kernel.va, kernel.vb);
    }
    throw OutOfCatalog("unknown kernel family");
}

InitialLaw ExperimentConfig::initial_law() const {
    InitialLaw law;
    law.d = kernel.d;
    law.components = init;
    // a one-entry mean of 0 stands for the origin in any dimension
    for (auto& c : law.components) {
        if (c.mean.size() == 1 && c.mean[0] == 0.0) c.mean.assign(kernel.d, 0.0);
    }
    return law;
}

GridSpec ExperimentConfig::grid_spec() const { return {kernel.d, grid.G, grid.L}; }

std::vector<long> ExperimentConfig::n_values() const {
    if (!particles.n_list.empty() && (experiment == "rate" || experiment == "chaos")) return particles.n_list;
    return {particles.n};
}

PdeOptions ExperimentConfig::pde_options() const {
    PdeOptions o;
    o.T = particles.t_end;
    o.dt = pde.dt;
    o.heun = pde.heun;
    o.r = pde.r;
    o.guard = pde.guard;
    o.trace_every = pde.trace_every;
    o.snapshot_times = pde.snapshot_times;
    if (particles.cutoff == CutoffMode::Value) o.cutoff = particles.cutoff_a;
    if (experiment == "rate" || experiment == "simulate") {
        o.snapshot_times.insert(o.snapshot_times.end(), particles.snapshot_times.begin(), particles.snapshot_times.end());
    } else if (experiment == "chaos") {
        const long steps = std::lround(particles.t_end / particles.dt);
        for (long k = 1; k < steps; ++k) o.snapshot_times.push_back(k * particles.dt);
    }
    std::sort(o.snapshot_times.begin(), o.snapshot_times.end());
    o.snapshot_times.erase(std::unique(o.snapshot_times.begin(), o.snapshot_times.end()), o.snapshot_times.end());
    return o;
}

SimulationConfig ExperimentConfig::simulation(const PdeRun* reference) const {
    SimulationConfig s;
    s.kernel = kernel_spec();
    s.init = initial_law();
    s.N = particles.n;
    s.R = mollifier.radius;
    s.alpha = mollifier.alpha;
    s.T = particles.t_end;
    s.dt = particles.dt;
    s.seed = particles.seed;
    s.drift_path = particles.drift_path;
    s.grid = grid_spec();
    s.snapshot_times = particles.snapshot_times;
    s.table_resolution = mollifier.table_resolution;
    s.table_tol = mollifier.table_tol;
    s.noise = particles.noise;
    if (particles.cutoff == CutoffMode::Value) s.cutoff = particles.cutoff_a;
    if (particles.cutoff == CutoffMode::Auto) {
        if (!reference) throw ConfigError("particles.cutoff_a = auto needs a reference PDE run");
        const double c = particles.cutoff_c > 0.0 ? particles.cutoff_c : convolution_constant(s.kernel, reference->r);
        s.cutoff = compute_cutoff_A(*reference, c);
    }
    return s;
}

SweepOptions ExperimentConfig::sweep_options() const {
    SweepOptions o;
    o.reps = particles.reps;
    o.metric = rate.metric;
    o.moment = rate.moment;
    o.burn_in = rate.burn_in;
    o.kr.coarsen = rate.kr_coarsen;
    return o;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errs;
    const bool sweep = experiment == "rate" || experiment == "chaos";
    if (experiment != "pde" && experiment != "simulate" && !sweep) {
        errs.push_back("experiment must be pde, simulate, rate or chaos, got '" + experiment + "'");
    }
    std::optional<KernelSpec> k;
    try {
        k = kernel_spec();
    } catch (const Error& e) {
        errs.push_back(std::string("kernel: ") + e.what());
    }
    try {
        grid_spec().validate();
    } catch (const Error& e) {
        errs.push_back(std::string("grid: ") + e.what());
    }
    try {
        initial_law().validate();
    } catch (const Error& e) {
        errs.push_back(std::string("init: ") + e.what());
    }
    if (!(mollifier.radius > 0.0)) errs.push_back("mollifier.radius must be > 0");
    if (!(mollifier.alpha > 0.0 && mollifier.alpha < 1.0)) errs.push_back("mollifier.alpha must lie in (0, 1)");
    if (mollifier.table_resolution < 16) errs.push_back("mollifier.table_resolution must be >= 16");
    if (!(mollifier.table_tol > 0.0)) errs.push_back("mollifier.table_tol must be > 0");

    const auto& p = particles;
    if (!(p.t_end > 0.0)) errs.push_back("particles.t_end must be > 0");
    if (!(p.dt > 0.0)) errs.push_back("particles.dt must be > 0");
    if (!(pde.dt > 0.0)) errs.push_back("pde.dt must be > 0");
    if (p.t_end > 0.0 && pde.dt > 0.0) {
        if (!on_lattice(p.t_end, pde.dt)) errs.push_back("particles.t_end must be a multiple of pde.dt");
        for (double t : pde.snapshot_times)
            if (!(t >= 0.0 && t <= p.t_end) || !on_lattice(t, pde.dt))
                errs.push_back("pde snapshot time " + format_real(t) + " must be a multiple of pde.dt in [0, T]");
    }
    if (experiment != "pde" && p.t_end > 0.0 && p.dt > 0.0) {
        if (!on_lattice(p.t_end, p.dt)) errs.push_back("particles.t_end must be a multiple of particles.dt");
        for (double t : p.snapshot_times) {
            if (!(t >= 0.0 && t <= p.t_end) || !on_lattice(t, p.dt))
                errs.push_back("particle snapshot time " + format_real(t) + " must be a multiple of particles.dt in [0, T]");
            else if (sweep && pde.dt > 0.0 && !on_lattice(t, pde.dt))
                errs.push_back("particle snapshot time " + format_real(t) + " must be a multiple of pde.dt");
        }
        if (experiment == "chaos" && pde.dt > 0.0 && !on_lattice(p.dt, pde.dt))
            errs.push_back("particles.dt must be a multiple of pde.dt (reference snapshots every particle step)");
    }
    if (p.cutoff == CutoffMode::Value && !(p.cutoff_a > 0.0)) errs.push_back("particles.cutoff_a must be > 0");
    if (p.cutoff_c < 0.0) errs.push_back("particles.cutoff_c must be >= 0");
    if (p.n < 1) errs.push_back("particles.n must be >= 1");
    for (long n : p.n_list)
        if (n < 1) errs.push_back("particles.n_list entries must be >= 1");
    if (sweep && p.n_list.empty()) errs.push_back("rate and chaos experiments need particles.n_list");
    if (p.reps < 1) errs.push_back("particles.reps must be >= 1");
    if (pde.r != 0.0 && !(pde.r >= 1.0)) errs.push_back("pde.r must be >= 1 (or 0 for the default)");
    if (!(pde.guard > 0.0)) errs.push_back("pde.guard must be > 0");
    if (pde.trace_every < 1) errs.push_back("pde.trace_every must be >= 1");
    if (!(rate.moment >= 1.0)) errs.push_back("rate.moment must be >= 1");
    if (rate.burn_in < 0) errs.push_back("rate.burn_in must be >= 0");
    if (rate.kr_coarsen < 0) errs.push_back("rate.kr_coarsen must be >= 0");
    if (out_dir.empty()) errs.push_back("output.dir must not be empty");

    if (k && mollifier.radius > 0.0 && mollifier.alpha > 0.0 && mollifier.alpha < 1.0 && experiment != "pde") {
        if (p.drift_path == DriftPath::Grid && !k->has_symbol()) errs.push_back("grid drift needs a kernel with a Fourier symbol");
        try {
            const GridSpec g = grid_spec();
            g.validate();
            for (long n : n_values()) {
                if (n < 1) continue;
                const double h = mollifier.radius * std::pow(static_cast<double>(n), -mollifier.alpha);
                if (h < 2.0 * g.dx()) {
                    errs.push_back("bump support R N^-alpha = " + format_real(h) + " for N = " + std::to_string(n) +
                                   " is below two grid cells");
                }
            }
        } catch (const Error&) {
        }
        if (sweep) {
            const double r = pde.r > 0.0 ? pde.r : default_norm_exponent(*k);
            const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
            const double a = mollifier.alpha;
            if (k->meta().singular_class) {
                if (!(0.5 - a * k->dim() > 0.0)) errs.push_back("alpha must be below 1/(2d) for singular kernels");
            } else if (!theoretical_rate(k->dim(), a, 1.0, inv_r).admissible) {
                errs.push_back("alpha = " + format_real(a) + " is outside the admissible window (0, " +
                               format_real(alpha_bound(k->dim(), inv_r)) + ")");
            }
        }
    }
    if (!errs.empty()) throw_all("invalid configuration:", errs);
}

}  // namespace moderate
