#include "echosim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace echosim {

using json = nlohmann::ordered_json;

double retarded_time(const FieldTrace& trace, Eigen::Index i)
{
    return trace.time(i) - trace.z_mm / speed_of_light;
}

double window_energy(const FieldTrace& trace, double start_us, double end_us)
{
    double e = 0.0;
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        const double t = retarded_time(trace, i);
        if (t >= start_us && t < end_us) {
            e += std::norm(trace.samples(i));
        }
    }
    return e * trace.sample_dt_us;
}

namespace {

bool is_echo_window(const std::string& name)
{
    return name.rfind("echo", 0) == 0;
}

} // namespace

EchoReport detect_echoes(const FieldTrace& trace,
                         const std::vector<DetectionWindow>& windows,
                         const EchoReference& ref,
                         const DetectionOptions& options)
{
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (windows[i].start_us < windows[j].end_us &&
                windows[j].start_us < windows[i].end_us) {
                throw config_error("windows." + windows[i].name,
                                   "overlaps window " + windows[j].name);
            }
        }
    }
    const double floor = options.noise_floor * ref.input_peak_intensity;

    EchoReport report;
    report.data_energy_ref = ref.data_energy;
    std::vector<WindowEnergy> acc(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        acc[w].name = windows[w].name;
    }
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        const double t = retarded_time(trace, i);
        const double p = std::norm(trace.samples(i));
        const double e = p * trace.sample_dt_us;
        report.total_energy += e;
        bool inside = false;
        for (std::size_t w = 0; w < windows.size(); ++w) {
            if (windows[w].contains(t)) {
                acc[w].energy += e;
                if (p > acc[w].peak_intensity) {
                    acc[w].peak_intensity = p;
                    acc[w].t_peak_us = t;
                }
                inside = true;
                break;
            }
        }
        if (!inside) {
            report.out_of_window_energy += e;
        }
    }
    for (auto& w : acc) {
        w.detected = w.peak_intensity > floor && w.peak_intensity > 0.0;
    }
    report.windows = acc;

    double data_out = 0.0;
    for (const auto& w : acc) {
        if (w.name == "data") {
            data_out = w.energy;
        }
        if (is_echo_window(w.name)) {
            report.echoes.push_back(w);
        }
    }
    if (ref.data_energy > 0.0) {
        double cumulative = 0.0;
        for (std::size_t k = 0; k < report.echoes.size(); ++k) {
            const auto& e = report.echoes[k];
            const double eff = e.detected ? e.energy / ref.data_energy : 0.0;
            if (k == 0) {
                report.efficiency_first = eff;
            }
            cumulative += eff;
        }
        report.efficiency_cumulative = cumulative;
        report.data_transmission = data_out / ref.data_energy;
        report.transmission_total =
            report.data_transmission + report.efficiency_cumulative;
    }
    return report;
}

EchoReport analyze_run(const PropagationResult& run, const SequenceSpec& seq,
                       const DetectionOptions& options)
{
    EchoReference ref;
    ref.input_peak_intensity = run.input.intensity().maxCoeff();
    if (const DetectionWindow* w = seq.window("data")) {
        ref.data_energy = window_energy(run.input, w->start_us, w->end_us);
    } else if (const PulseSpec* p = seq.find(PulseRole::data)) {
        ref.data_energy = window_energy(run.input, p->start_us, p->end_us());
    }
    EchoReport report = detect_echoes(run.output, seq.windows, ref, options);
    if (const DetectionWindow* w = seq.window("data")) {
        try {
            report.group_delay_us = measure_group_delay(
                run.input, run.output, *w, run.output.z_mm);
        } catch (const detection_error&) {
            /* fully absorbed: no transmitted pulse to time */
        }
    }
    return report;
}

/* -------------------------------------------------------------------- */
/* decay fits                                                            */
/* -------------------------------------------------------------------- */

FitResult fit_exponential_decay(const std::vector<DecayPoint>& points,
                                double exponent_factor)
{
    if (!(exponent_factor > 0.0)) {
        throw fit_error("exponent factor must be positive");
    }
    FitResult fit;
    fit.exponent_factor = exponent_factor;

    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].t_us > points[i - 1].t_us)) {
            throw fit_error("time points must be strictly increasing");
        }
    }
    std::vector<DecayPoint> usable;
    for (const auto& p : points) {
        if (p.intensity > 0.0 && std::isfinite(p.intensity)) {
            usable.push_back(p);
        } else {
            fit.warnings.push_back("dropped non-positive intensity at t = " +
                                   fmt::format("{}", p.t_us));
        }
    }
    if (usable.size() < 4) {
        throw fit_error("need at least 4 points with positive intensity, "
                        "got " +
                        std::to_string(usable.size()));
    }

    const Eigen::Index n = static_cast<Eigen::Index>(usable.size());
    Eigen::MatrixX2d design(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = usable[i].t_us;
        rhs(i) = std::log(usable[i].intensity);
    }
    const Eigen::Vector2d coef =
        design.colPivHouseholderQr().solve(rhs);
    const double slope = coef(1);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    const double t_span = usable.back().t_us - usable.front().t_us;
    if (!(slope < 0.0) || std::abs(slope) * t_span < 1e-12 * scale) {
        throw fit_error("intensities do not decay (fitted tau is infinite "
                        "or negative)");
    }
    fit.tau_us = -exponent_factor / slope;
    fit.i0 = std::exp(coef(0));
    fit.n_points = static_cast<int>(n);
    const Eigen::VectorXd residual = design * coef - rhs;
    fit.rms_residual = std::sqrt(residual.squaredNorm() / n);
    return fit;
}

FitResult fit_two_pulse_decay(const std::vector<DecayPoint>& points)
{
    return fit_exponential_decay(points, 2.0);
}

FitResult fit_three_pulse_decay(const std::vector<DecayPoint>& points,
                                double exponent_factor)
{
    return fit_exponential_decay(points, exponent_factor);
}

/* -------------------------------------------------------------------- */
/* sweeps and scans                                                      */
/* -------------------------------------------------------------------- */

std::vector<double> SweepAxis::densities() const
{
    if (n_points < 1) {
        throw config_error("sweep.n_points", "must be at least 1");
    }
    if (!(density_min >= 0.0 && density_max <= 1.0 &&
          density_min <= density_max)) {
        throw config_error("sweep.density_range",
                           "must satisfy 0 <= min <= max <= 1");
    }
    std::vector<double> d(n_points);
    for (int i = 0; i < n_points; ++i) {
        d[i] = n_points == 1 ? density_min
                             : density_min + (density_max - density_min) * i /
                                                 (n_points - 1);
    }
    return d;
}

SimulationGrid covering_grid(const SequenceSpec& seq,
                             const SimulationGrid& grid)
{
    SimulationGrid g = grid;
    const double steps = std::ceil(suggested_t_end(seq) / g.dt_us - 1e-9);
    g.t_end_us = std::max(g.t_end_us, steps * g.dt_us);
    return g;
}

double predicted_delay(const SequenceSpec& seq, const MediumSpec& medium)
{
    return group_delay(prepare_population(seq, medium), medium, 0.0);
}

SweepRow run_point(const SequenceSpec& seq, const MediumSpec& medium,
                   const SimulationGrid& grid)
{
    const SpectralPopulation pop = prepare_population(seq, medium);
    const PropagationResult run = propagate(seq, medium, pop, grid);
    const EchoReport report = analyze_run(run, seq);

    SweepRow row;
    row.density_scale = seq.density_scale;
    row.efficiency_first = report.efficiency_first;
    row.efficiency_cumulative = report.efficiency_cumulative;
    row.transmission_total = report.transmission_total;
    row.group_delay_us = report.group_delay_us.value_or(std::nan(""));
    return row;
}

std::vector<SweepRow> sweep_delay_vs_efficiency(const SequenceSpec& base,
                                                const MediumSpec& medium,
                                                const SimulationGrid& grid,
                                                const SweepAxis& axis,
                                                int jobs)
{
    const std::vector<double> densities = axis.densities();
    const std::size_t n = densities.size();
    const double base_delay = predicted_delay(base, medium);
    std::vector<SweepRow> rows(n);
    std::vector<std::exception_ptr> errors(n);

    const auto run_index = [&](std::size_t i) {
        SequenceSpec seq = base;
        seq.density_scale = densities[i];
        try {
            seq = shift_echo_windows(
                seq, predicted_delay(seq, medium) - base_delay);
            rows[i] = run_point(seq, medium, covering_grid(seq, grid));
        } catch (const numerical_error& e) {
            errors[i] = std::make_exception_ptr(numerical_error(
                e.step(), e.cell(),
                fmt::format("sweep point {} (density_scale {}): {}", i,
                            densities[i], e.what())));
        } catch (const config_error& e) {
            errors[i] = std::make_exception_ptr(config_error(
                e.field(), fmt::format("sweep point {} (density_scale {}): {}",
                                       i, densities[i], e.what())));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_index(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    run_index(i);
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) {
                         return a.group_delay_us < b.group_delay_us;
                     });
    return rows;
}

namespace {

SimulationGrid grid_for(const SequenceSpec& seq, const SimulationGrid& grid)
{
    SimulationGrid g = grid;
    const double steps = std::ceil(suggested_t_end(seq) / g.dt_us - 1e-9);
    g.t_end_us = steps * g.dt_us;
    return g;
}

/* scans only read the first echo; later windows would lengthen the run */
SequenceSpec first_echo_only(SequenceSpec seq)
{
    bool first = true;
    std::erase_if(seq.windows, [&](const DetectionWindow& w) {
        if (!is_echo_window(w.name)) {
            return false;
        }
        const bool drop = !first;
        first = false;
        return drop;
    });
    return seq;
}

double first_echo_energy(const SequenceSpec& seq, const MediumSpec& medium,
                         const SimulationGrid& grid)
{
    const SpectralPopulation pop = prepare_population(seq, medium);
    const PropagationResult run = propagate(seq, medium, pop, grid);
    const EchoReport report = analyze_run(run, seq);
    if (report.echoes.empty() || !report.echoes.front().detected) {
        return 0.0;
    }
    return report.echoes.front().energy;
}

} // namespace

std::vector<DecayPoint> two_pulse_scan(const PresetParameters& params,
                                       bool slow_light,
                                       const MediumSpec& medium,
                                       const SimulationGrid& grid,
                                       const std::vector<double>& separations)
{
    std::vector<DecayPoint> points;
    for (double sep : separations) {
        PresetParameters p = params;
        p.separation_us = sep;
        const SequenceSpec seq =
            first_echo_only(two_pulse_sequence(p, slow_light));
        const PulseSpec* data = seq.find(PulseRole::data);
        const PulseSpec* read = seq.find(PulseRole::read);
        const double echo_delay =
            2.0 * (read->center_us() - data->center_us());
        points.push_back(
            {echo_delay, first_echo_energy(seq, medium, grid_for(seq, grid))});
    }
    return points;
}

std::vector<DecayPoint> three_pulse_scan(const PresetParameters& params,
                                         bool slow_light,
                                         const MediumSpec& medium,
                                         const SimulationGrid& grid,
                                         const std::vector<double>& t_rs)
{
    std::vector<DecayPoint> points;
    for (double t_r : t_rs) {
        PresetParameters p = params;
        p.three_pulse_t_r_us = t_r;
        const SequenceSpec seq =
            first_echo_only(three_pulse_sequence(p, slow_light));
        points.push_back(
            {t_r, first_echo_energy(seq, medium, grid_for(seq, grid))});
    }
    return points;
}

/* -------------------------------------------------------------------- */
/* serialisation                                                         */
/* -------------------------------------------------------------------- */

namespace {

json window_json(const WindowEnergy& w)
{
    json j;
    j["window"] = w.name;
    j["t_peak_us"] = w.t_peak_us;
    j["energy"] = w.energy;
    j["peak_intensity"] = w.peak_intensity;
    j["detected"] = w.detected;
    return j;
}

} // namespace

std::string to_json(const EchoReport& r)
{
    json j;
    json echoes = json::array();
    for (const auto& e : r.echoes) {
        echoes.push_back(window_json(e));
    }
    j["echoes"] = echoes;
    json windows = json::array();
    for (const auto& w : r.windows) {
        windows.push_back(window_json(w));
    }
    j["windows"] = windows;
    j["data_energy_ref"] = r.data_energy_ref;
    j["efficiency_first"] = r.efficiency_first;
    j["efficiency_cumulative"] = r.efficiency_cumulative;
    j["transmission_total"] = r.transmission_total;
    j["data_transmission"] = r.data_transmission;
    j["group_delay_us"] =
        r.group_delay_us ? json(*r.group_delay_us) : json(nullptr);
    j["out_of_window_energy"] = r.out_of_window_energy;
    j["total_energy"] = r.total_energy;
    return j.dump(2) + "\n";
}

std::string to_json(const FitResult& f)
{
    json j;
    j["i0"] = f.i0;
    j["tau_us"] = f.tau_us;
    j["rms_residual"] = f.rms_residual;
    j["n_points"] = f.n_points;
    j["exponent_factor"] = f.exponent_factor;
    j["warnings"] = f.warnings;
    return j.dump(2) + "\n";
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows)
{
    std::string out =
        "group_delay_us,efficiency_first,efficiency_cumulative,"
        "transmission_total\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{}\n", r.group_delay_us,
                           r.efficiency_first, r.efficiency_cumulative,
                           r.transmission_total);
    }
    return out;
}

std::string trace_to_csv(const FieldTrace& trace)
{
    std::string out = "t_us,re_env,im_env,intensity\n";
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        const auto s = trace.samples(i);
        out += fmt::format("{},{},{},{}\n", trace.time(i), s.real(),
                           s.imag(), std::norm(s));
    }
    return out;
}

std::vector<DecayPoint> parse_decay_csv(const std::string& text)
{
    std::vector<DecayPoint> points;
    std::istringstream in(text);
    std::string line;
    int row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("t_us", 0) == 0) {
                continue;
            }
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos ||
            line.find(',', comma + 1) != std::string::npos) {
            throw config_error("csv row " + std::to_string(row),
                               "expected two comma-separated columns");
        }
        try {
            std::size_t used_t = 0;
            std::size_t used_i = 0;
            const std::string ts = line.substr(0, comma);
            const std::string is = line.substr(comma + 1);
            const double t = std::stod(ts, &used_t);
            const double v = std::stod(is, &used_i);
            if (used_t != ts.size() || used_i != is.size()) {
                throw std::invalid_argument("trailing characters");
            }
            points.push_back({t, v});
        } catch (const std::exception&) {
            throw config_error("csv row " + std::to_string(row),
                               "not a pair of numbers: '" + line + "'");
        }
    }
    return points;
}

} // namespace echosim
