#include "moderate/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "moderate/config.hpp"
#include "moderate/errors.hpp"

#ifndef MODERATE_VERSION
#define MODERATE_VERSION "unknown"
#endif

namespace moderate {

static_assert(std::endian::native == std::endian::little, "the grid container assumes a little-endian host");

std::string version_string() { return MODERATE_VERSION; }

std::string norm_trace_csv(const PdeRun& run) {
    std::string s = "t,l1,lr,mass,min\n";
    for (const auto& n : run.norm_trace) {
        s += format_real(n.t) + "," + format_real(n.l1) + "," + format_real(n.lr) + "," + format_real(n.mass) + "," +
             format_real(n.min) + "\n";
    }
    return s;
}

std::string rate_csv(const RateReport& report) {
    std::string s = "n,reps,mean_err,std_err\n";
    for (const auto& r : report.rows) {
        s += std::to_string(r.n) + "," + std::to_string(r.reps) + "," + format_real(r.mean_err) + "," +
             format_real(r.std_err) + "\n";
    }
    return s;
}

std::string chaos_csv(const std::vector<ChaosRow>& rows) {
    std::string s = "n,rep,gap\n";
    for (const auto& r : rows) s += std::to_string(r.n) + "," + std::to_string(r.rep) + "," + format_real(r.gap) + "\n";
    return s;
}

std::string positions_csv(int d, const std::vector<double>& x) {
    std::string s = "i";
    for (int a = 1; a <= d; ++a) s += ",x" + std::to_string(a);
    s += "\n";
    const std::size_t n = x.size() / d;
    for (std::size_t i = 0; i < n; ++i) {
        s += std::to_string(i);
        for (int a = 0; a < d; ++a) s += "," + format_real(x[i * d + a]);
        s += "\n";
    }
    return s;
}

std::pair<int, std::vector<double>> read_positions_csv(const std::string& path) {
    std::istringstream is(read_file(path));
    std::string line;
    if (!std::getline(is, line) || line.rfind("i,x1", 0) != 0) throw ValidationError(path + ": not a particle snapshot CSV");
    const int d = static_cast<int>(std::count(line.begin(), line.end(), ','));
    std::vector<double> x;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        int cols = 0;
        while (std::getline(ls, cell, ',')) {
            x.push_back(parse_real(cell));
            ++cols;
        }
        if (cols != d) throw ValidationError(path + ": line " + std::to_string(lineno) + " has the wrong column count");
    }
    return {d, x};
}

std::string encode_grid(const GridField& f, const std::string& kernel_description) {
    nlohmann::ordered_json h;
    h["d"] = f.grid.d;
    h["G"] = f.grid.G;
    h["L"] = f.grid.L;
    h["t"] = f.t;
    h["components"] = f.components;
    h["kernel"] = kernel_description;
    const std::string head = h.dump();
    std::string out = "MIPGRID1";
    const std::uint64_t len = head.size();
    out.append(reinterpret_cast<const char*>(&len), 8);
    out += head;
    out.append(reinterpret_cast<const char*>(f.values.data()), f.values.size() * sizeof(double));
    return out;
}

GridField decode_grid(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 8, "MIPGRID1") != 0) throw ValidationError("not a grid container");
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data() + 8, 8);
    if (len > bytes.size() - 16) throw ValidationError("truncated grid container header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(16, len));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad grid container header: ") + e.what());
    }
    GridSpec g{h.at("d").get<int>(), h.at("G").get<int>(), h.at("L").get<double>()};
    g.validate();
    GridField f(g, h.value("components", 1));
    f.t = h.at("t").get<double>();
    const std::size_t need = f.values.size() * sizeof(double);
    if (bytes.size() - 16 - len != need) throw ValidationError("grid container payload has the wrong size");
    std::memcpy(f.values.data(), bytes.data() + 16 + len, need);
    return f;
}

GridField read_grid(const std::string& path) { return decode_grid(read_file(path)); }

namespace {

nlohmann::ordered_json header(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["version"] = version_string();
    j["experiment"] = cfg.experiment;
    j["config"] = to_text(cfg);
    return j;
}

nlohmann::ordered_json real(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

void add_sim(nlohmann::ordered_json& j, const SimulationConfig& sim) {
    j["kernel"] = sim.kernel.describe();
    if (sim.cutoff) j["cutoff_a"] = *sim.cutoff;
    else j["cutoff_a"] = nullptr;
}

std::string drift_path_name(DriftPath p) {
    return p == DriftPath::Direct ? "direct" : p == DriftPath::Grid ? "grid" : "auto";
}

}  // namespace

std::string pde_summary_json(const ExperimentConfig& cfg, const PdeRun& run) {
    auto j = header(cfg);
    j["kernel"] = cfg.kernel_spec().describe();
    j["status"] = run.status == PdeStatus::Completed ? "completed" : "blow-up";
    j["t_blow"] = run.status == PdeStatus::Completed ? nlohmann::ordered_json() : real(run.t_blow);
    j["blow_reason"] = run.blow_reason;
    j["r"] = real(run.r);
    j["max_boundary_mass"] = run.max_boundary_mass;
    j["snapshots"] = run.snapshots.size();
    if (run.status == PdeStatus::Completed) {
        double m = 0.0;
        for (const auto& n : run.norm_trace) m = std::max(m, n.l1 + n.lr);
        j["max_l1_plus_lr"] = m;
    }
    return j.dump(2) + "\n";
}

std::string simulate_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const SimulationResult& res) {
    auto j = header(cfg);
    add_sim(j, sim);
    j["drift_path"] = drift_path_name(res.path);
    j["snapshot_times"] = nlohmann::ordered_json::array();
    for (const auto& s : res.snapshots) j["snapshot_times"].push_back(s.t);
    j["saturated_fraction"] = res.stats.saturated_fraction();
    j["outliers"] = res.stats.outliers;
    j["wrapped"] = res.stats.wrapped;
    return j.dump(2) + "\n";
}

std::string rate_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const RateReport& report) {
    auto j = header(cfg);
    add_sim(j, sim);
    j["metric"] = metric_name(report.metric);
    j["slope"] = real(report.fit.slope);
    j["slope_ci"] = real(report.fit.half_width);
    j["intercept"] = real(report.fit.intercept);
    j["rho_theory"] = report.rho_theory;
    j["admissible"] = report.admissible;
    j["saturated_fraction"] = report.saturated_fraction;
    return j.dump(2) + "\n";
}

std::string chaos_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const std::vector<ChaosRow>& rows) {
    auto j = header(cfg);
    add_sim(j, sim);
    std::vector<long> ns;
    for (const auto& r : rows)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    j["median_gap"] = nlohmann::ordered_json::array();
    for (long n : ns) j["median_gap"].push_back({{"n", n}, {"gap", median_gap(rows, n)}});
    return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary);
    f << contents;
    if (!f) throw Error("cannot write '" + path + "'");
}

}  // namespace moderate
