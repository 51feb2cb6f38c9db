#include "echosim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json_fields.hpp"

namespace echosim {

namespace {

double t_end_for(const SequenceSpec& seq, double dt_us)
{
    return std::ceil(suggested_t_end(seq) / dt_us - 1e-9) * dt_us;
}

MediumSpec medium_from_json(const json& j, MediumSpec m)
{
    const std::string where = "medium";
    reject_unknown(j,
                   {"length_mm", "optical_depth", "inhomogeneous_fwhm_mhz",
                    "t1_us", "t2_us", "carrier_wavelength_nm", "grid"},
                   where);
    m.length_mm = optional_field(j, "length_mm", m.length_mm, where);
    m.optical_depth =
        optional_field(j, "optical_depth", m.optical_depth, where);
    m.inhomogeneous_fwhm_mhz = optional_field(
        j, "inhomogeneous_fwhm_mhz", m.inhomogeneous_fwhm_mhz, where);
    m.t1_us = optional_field(j, "t1_us", m.t1_us, where);
    m.t2_us = optional_field(j, "t2_us", m.t2_us, where);
    m.carrier_wavelength_nm = optional_field(j, "carrier_wavelength_nm",
                                             m.carrier_wavelength_nm, where);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown(g, {"n_bins", "span_mhz"}, "medium.grid");
        m.grid.n_bins =
            optional_field(g, "n_bins", m.grid.n_bins, "medium.grid");
        m.grid.span_mhz =
            optional_field(g, "span_mhz", m.grid.span_mhz, "medium.grid");
    }
    return m;
}

json medium_to_json(const MediumSpec& m)
{
    json j;
    j["length_mm"] = m.length_mm;
    j["optical_depth"] = m.optical_depth;
    j["inhomogeneous_fwhm_mhz"] = m.inhomogeneous_fwhm_mhz;
    j["t1_us"] = m.t1_us;
    j["t2_us"] = m.t2_us;
    j["carrier_wavelength_nm"] = m.carrier_wavelength_nm;
    j["grid"] = {{"n_bins", m.grid.n_bins}, {"span_mhz", m.grid.span_mhz}};
    return j;
}

std::optional<std::string> optional_path(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    const std::string p = required<std::string>(j, key, "outputs");
    if (p.empty()) {
        throw config_error(std::string("outputs.") + key,
                           "must not be empty");
    }
    return p;
}

} // namespace

void RunConfig::validate() const
{
    validate_run(sequence, medium, grid);
    std::set<std::string> seen;
    for (const auto& [name, path] :
         {std::pair{"trace_csv", outputs.trace_csv},
          std::pair{"report_json", outputs.report_json},
          std::pair{"spectra_csv", outputs.spectra_csv}}) {
        if (!path) {
            continue;
        }
        const std::string norm =
            std::filesystem::path(*path).lexically_normal().string();
        if (!seen.insert(norm).second) {
            throw config_error(std::string("outputs.") + name,
                               "duplicates another output path");
        }
    }
}

RunConfig preset_config(const std::string& name)
{
    RunConfig c;
    c.sequence = preset(name);
    c.preset = name;
    c.grid.n_z = 64;
    if (name == "fig4b_threepulse") {
        /* shorter split pulses need a wider span; the later echo a
           finer lattice */
        c.medium.grid = {3072, 40.0};
        c.grid.dt_us = 0.005;
        c.grid.record_stride = 10;
    }
    c.grid.t_end_us = t_end_for(c.sequence, c.grid.dt_us);
    return c;
}

RunConfig parse_run_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error("config", e.what());
    }
    reject_unknown(j,
                   {"medium", "preset", "sequence", "grid", "outputs",
                    "deterministic_reduction"},
                   "config");
    const bool has_preset = j.contains("preset");
    const bool has_sequence = j.contains("sequence");
    if (has_preset == has_sequence) {
        throw config_error("config.sequence",
                           "exactly one of \"preset\" and \"sequence\" is "
                           "required");
    }

    RunConfig c;
    if (has_preset) {
        c = preset_config(required<std::string>(j, "preset", "config"));
    } else {
        c = preset_config("fig2_slowlight");
        c.preset.reset();
        c.sequence = sequence_from_json(j.at("sequence"));
    }

    if (j.contains("medium")) {
        c.medium = medium_from_json(j.at("medium"), c.medium);
    }

    bool explicit_t_end = false;
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown(g, {"n_z", "dt_us", "t_end_us", "record_stride"},
                       "grid");
        c.grid.n_z = optional_field(g, "n_z", c.grid.n_z, "grid");
        c.grid.dt_us = optional_field(g, "dt_us", c.grid.dt_us, "grid");
        c.grid.record_stride =
            optional_field(g, "record_stride", c.grid.record_stride, "grid");
        explicit_t_end = g.contains("t_end_us");
        c.grid.t_end_us =
            optional_field(g, "t_end_us", c.grid.t_end_us, "grid");
    }
    if (!explicit_t_end && c.grid.dt_us > 0.0) {
        c.grid.t_end_us = t_end_for(c.sequence, c.grid.dt_us);
    }

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        reject_unknown(o, {"trace_csv", "report_json", "spectra_csv"},
                       "outputs");
        c.outputs.trace_csv = optional_path(o, "trace_csv");
        c.outputs.report_json = optional_path(o, "report_json");
        c.outputs.spectra_csv = optional_path(o, "spectra_csv");
    }
    c.deterministic_reduction =
        optional_field(j, "deterministic_reduction", false, "config");

    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot read config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string serialize(const RunConfig& c)
{
    json j;
    j["medium"] = medium_to_json(c.medium);
    if (c.preset) {
        j["preset"] = *c.preset;
    } else {
        j["sequence"] = json::parse(serialize(c.sequence));
    }
    j["grid"] = {{"n_z", c.grid.n_z},
                 {"dt_us", c.grid.dt_us},
                 {"t_end_us", c.grid.t_end_us},
                 {"record_stride", c.grid.record_stride}};
    json o = json::object();
    if (c.outputs.trace_csv) {
        o["trace_csv"] = *c.outputs.trace_csv;
    }
    if (c.outputs.report_json) {
        o["report_json"] = *c.outputs.report_json;
    }
    if (c.outputs.spectra_csv) {
        o["spectra_csv"] = *c.outputs.spectra_csv;
    }
    j["outputs"] = o;
    j["deterministic_reduction"] = c.deterministic_reduction;
    return j.dump(2) + "\n";
}

std::string spectra_to_csv(const SpectralPopulation& pop,
                           const MediumSpec& medium)
{
    const Eigen::ArrayXd detuning = medium.grid.centers();
    const Eigen::ArrayXd alpha = absorption_spectrum(pop, medium);
    const Susceptibility chi = susceptibility(pop, medium);
    std::string out = "detuning_MHz,alpha_per_mm,re_chi,im_chi\n";
    for (Eigen::Index k = 0; k < detuning.size(); ++k) {
        out += fmt::format("{},{},{},{}\n", detuning(k), alpha(k),
                           chi.chi(k).real(), chi.chi(k).imag());
    }
    return out;
}

} // namespace echosim
