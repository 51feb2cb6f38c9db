// echosim: run presets or configs, sweep the pumped density, fit decays.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort,
// 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "echosim/analysis.hpp"
#include "echosim/config.hpp"

namespace fs = std::filesystem;
using namespace echosim;

namespace {

enum Exit { ok = 0, config_failure = 1, numerical_failure = 2, io_failure = 3 };

struct Common
{
    std::string config;
    std::string preset;
    std::string out;
    int jobs = 1;
    bool deterministic = false;
};

void add_common(CLI::App& cmd, Common& c)
{
    auto* cfg = cmd.add_option("--config", c.config, "run config (JSON)");
    auto* pre = cmd.add_option("--preset", c.preset, "preset name");
    cfg->excludes(pre);
    cmd.add_option("--out", c.out, "output directory");
    cmd.add_option("--jobs", c.jobs, "worker threads")
        ->envname("ECHOSIM_THREADS");
    cmd.add_flag("--deterministic", c.deterministic,
                 "bit-reproducible reductions");
}

RunConfig load(const Common& c)
{
    if (c.jobs < 1) {
        throw config_error("jobs", "must be a positive integer");
    }
    if (!c.config.empty()) {
        return load_run_config(c.config);
    }
    if (!c.preset.empty()) {
        return preset_config(c.preset);
    }
    throw config_error("config", "one of --config or --preset is required");
}

fs::path output_dir(const Common& c)
{
    return c.out.empty() ? fs::path(".") : fs::path(c.out);
}

void write_file(const fs::path& path, const std::string& text)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw io_error("cannot write " + path.string());
    }
    f << text;
    if (!f.flush()) {
        throw io_error("failed writing " + path.string());
    }
}

std::string read_file(const fs::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw io_error("cannot read " + path.string());
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string number(std::optional<double> v)
{
    return v && std::isfinite(*v) ? fmt::format("{:.6g}", *v) : "nan";
}

int cmd_run(const Common& c)
{
    RunConfig cfg = load(c);
    if (c.deterministic) {
        cfg.deterministic_reduction = true;
    }
    cfg.validate();

    /* with --out and no explicit outputs, write all of them */
    if (!c.out.empty() && !cfg.outputs.trace_csv && !cfg.outputs.report_json &&
        !cfg.outputs.spectra_csv) {
        cfg.outputs = {"trace.csv", "report.json", "spectra.csv"};
    }

    const SpectralPopulation pop = prepare_population(cfg.sequence, cfg.medium);
    PropagationOptions options;
    options.threads = c.jobs;
    const PropagationResult run =
        propagate(cfg.sequence, cfg.medium, pop, cfg.grid, options);
    const EchoReport report = analyze_run(run, cfg.sequence);

    const fs::path dir = output_dir(c);
    if (cfg.outputs.trace_csv) {
        write_file(dir / *cfg.outputs.trace_csv, trace_to_csv(run.output));
    }
    if (cfg.outputs.report_json) {
        write_file(dir / *cfg.outputs.report_json, to_json(report));
    }
    if (cfg.outputs.spectra_csv) {
        write_file(dir / *cfg.outputs.spectra_csv,
                   spectra_to_csv(pop, cfg.medium));
    }
    fmt::print("group_delay_us={} efficiency_first={} transmission_total={}\n",
               number(report.group_delay_us), number(report.efficiency_first),
               number(report.transmission_total));
    return ok;
}

int cmd_sweep(const Common& c, const SweepAxis& axis)
{
    RunConfig cfg = load(c);
    cfg.validate();
    const int jobs = c.jobs;
    const auto rows = sweep_delay_vs_efficiency(cfg.sequence, cfg.medium,
                                                cfg.grid, axis, jobs);
    const std::string csv = sweep_to_csv(rows);
    if (c.out.empty()) {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
    } else {
        write_file(output_dir(c) / "sweep.csv", csv);
        fmt::print("{} points written to {}\n", rows.size(),
                   (output_dir(c) / "sweep.csv").string());
    }
    return ok;
}

int cmd_fit(const std::string& csv, const std::string& model,
            double exponent_factor, const std::string& out)
{
    const auto points = parse_decay_csv(read_file(csv));
    const FitResult fit = model == "two_pulse"
                              ? fit_two_pulse_decay(points)
                              : fit_three_pulse_decay(points, exponent_factor);
    for (const auto& w : fit.warnings) {
        fmt::print(stderr, "warning: {}\n", w);
    }
    fmt::print("tau_us={} i0={} rms_residual={} n_points={}\n",
               number(fit.tau_us), number(fit.i0), number(fit.rms_residual),
               fit.n_points);
    if (!out.empty()) {
        write_file(fs::path(out) / "fit.json", to_json(fit));
    }
    return ok;
}

int cmd_presets()
{
    for (const auto& name : preset_names()) {
        fmt::print("{}\n", name);
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slow-light photon echo simulator"};
    app.require_subcommand(1);

    Common run_opts;
    auto* run = app.add_subcommand("run", "simulate one sequence");
    add_common(*run, run_opts);

    Common sweep_opts;
    SweepAxis axis;
    auto* sweep =
        app.add_subcommand("sweep", "efficiency versus group delay over "
                                    "the pumped density");
    add_common(*sweep, sweep_opts);
    sweep->add_option("--points", axis.n_points, "number of densities");
    sweep->add_option("--density-min", axis.density_min);
    sweep->add_option("--density-max", axis.density_max);

    std::string fit_csv, fit_model = "two_pulse", fit_out;
    double exponent_factor = 2.0;
    auto* fit = app.add_subcommand("fit", "fit an echo decay curve");
    fit->add_option("--csv", fit_csv, "t_us,intensity table")->required();
    fit->add_option("--model", fit_model)
        ->check(CLI::IsMember({"two_pulse", "three_pulse"}));
    fit->add_option("--exponent-factor", exponent_factor,
                    "k in exp(-k t / tau) for three_pulse");
    fit->add_option("--out", fit_out, "directory for fit.json");

    auto* presets = app.add_subcommand("presets", "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    try {
        if (*run) {
            return cmd_run(run_opts);
        }
        if (*sweep) {
            return cmd_sweep(sweep_opts, axis);
        }
        if (*fit) {
            return cmd_fit(fit_csv, fit_model, exponent_factor, fit_out);
        }
        if (*presets) {
            return cmd_presets();
        }
    } catch (const config_error& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return config_failure;
    } catch (const echosim::domain_error& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return config_failure;
    } catch (const fit_error& e) {
        fmt::print(stderr, "fit error: {}\n", e.what());
        return config_failure;
    } catch (const numerical_error& e) {
        fmt::print(stderr, "numerical abort: {}\n", e.what());
        return numerical_failure;
    } catch (const io_error& e) {
        fmt::print(stderr, "I/O error: {}\n", e.what());
        return io_failure;
    } catch (const detection_error& e) {
        fmt::print(stderr, "numerical abort: {}\n", e.what());
        return numerical_failure;
    }
    return ok;
}
