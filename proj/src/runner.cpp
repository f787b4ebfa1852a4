#include "moderate/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "moderate/errors.hpp"
#include "moderate/io.hpp"

namespace moderate {

namespace {

std::string indexed(const char* stem, std::size_t k, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, k, ext);
    return buf;
}

std::string line(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

PdeRun reference_run(const ExperimentConfig& c) {
    return solve_pde(c.initial_law().density(c.grid_spec()), c.kernel_spec(), c.pde_options());
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& c) {
    c.validate();
    ExperimentOutput out;
    const auto kernel = c.kernel_spec();
    if (c.experiment == "pde") {
        const auto& run = out.reference.emplace(reference_run(c));
        out.files.emplace_back("norm_trace.csv", norm_trace_csv(run));
        for (std::size_t j = 0; j < run.snapshots.size(); ++j) {
            out.files.emplace_back(indexed("u", j, "grid"), encode_grid(run.snapshots[j], kernel.describe()));
        }
        out.files.emplace_back("pde_summary.json", pde_summary_json(c, run));
        out.message = run.status == PdeStatus::Completed
                          ? line("completed to T = %g, r = %g\n", c.particles.t_end, run.r)
                          : line("blow-up detected at t = %g (%s)\n", run.t_blow, run.blow_reason.c_str());
        return out;
    }
    if (c.experiment == "simulate") {
        if (c.particles.cutoff == CutoffMode::Auto) out.reference = reference_run(c);
        const auto sim = c.simulation(out.reference ? &*out.reference : nullptr);
        const auto& res = out.simulation.emplace(simulate(sim));
        for (std::size_t j = 0; j < res.snapshots.size(); ++j) {
            out.files.emplace_back(indexed("positions", j, "csv"), positions_csv(sim.kernel.dim(), res.snapshots[j].positions));
            if (j < res.fields.size()) out.files.emplace_back(indexed("uN", j, "grid"), encode_grid(res.fields[j], kernel.describe()));
        }
        out.files.emplace_back("simulate_summary.json", simulate_summary_json(c, sim, res));
        out.message = line("%zu snapshots\n", res.snapshots.size());
        return out;
    }
    const auto& ref = out.reference.emplace(reference_run(c));
    if (ref.status != PdeStatus::Completed) {
        throw NotCompleted("the reference PDE run blew up at t = " + format_real(ref.t_blow) + "; choose a shorter horizon");
    }
    const auto sim = c.simulation(&ref);
    if (c.experiment == "rate") {
        const auto& rep = out.rate.emplace(rate_sweep(sim, c.particles.n_list, c.sweep_options(), ref));
        out.files.emplace_back("rate.csv", rate_csv(rep));
        out.files.emplace_back("rate_summary.json", rate_summary_json(c, sim, rep));
        for (const auto& r : rep.rows) out.message += line("N = %-8ld mean %.6g  se %.3g\n", r.n, r.mean_err, r.std_err);
        out.message += line("slope %.4f +- %.4f, theory %.4f%s\n", rep.fit.slope, rep.fit.half_width, rep.rho_theory,
                            rep.admissible ? "" : " (inadmissible alpha)");
        return out;
    }
    out.chaos = chaos_coupling(sim, c.particles.n_list, c.particles.reps, ref);
    out.files.emplace_back("chaos.csv", chaos_csv(out.chaos));
    out.files.emplace_back("chaos_summary.json", chaos_summary_json(c, sim, out.chaos));
    auto ns = c.particles.n_list;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (long n : ns) out.message += line("N = %-8ld median gap %.6g\n", n, median_gap(out.chaos, n));
    return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out) {
    for (const auto& [name, contents] : out.files) write_file((std::filesystem::path(cfg.out_dir) / name).string(), contents);
}

}  // namespace moderate
