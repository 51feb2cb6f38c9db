#ifndef ECHOSIM_CONFIG_HPP
#define ECHOSIM_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "echosim/medium.hpp"
#include "echosim/propagation.hpp"
#include "echosim/sequence.hpp"

namespace echosim {

struct OutputPaths
{
    std::optional<std::string> trace_csv;
    std::optional<std::string> report_json;
    std::optional<std::string> spectra_csv;

    bool operator==(const OutputPaths&) const = default;
};

/**
 * Everything one `run` needs. A config names either a preset or an explicit
 * sequence, never both; `preset` keeps the name when one was used.
 */
struct RunConfig
{
    MediumSpec medium;
    SequenceSpec sequence;
    std::optional<std::string> preset;
    SimulationGrid grid;
    OutputPaths outputs;
    bool deterministic_reduction = false;

    /// Throws config_error naming the offending field.
    void validate() const;
};

/// Default medium, grid and sequence of a named preset.
RunConfig preset_config(const std::string& name);

/**
 * Parses a run config document:
 *
 *   { "medium":   { length_mm, optical_depth, inhomogeneous_fwhm_mhz,
 *                   t1_us, t2_us, carrier_wavelength_nm,
 *                   grid: { n_bins, span_mhz } },
 *     "preset":   "fig2_slowlight"            (or "sequence": {...}),
 *     "grid":     { n_z, dt_us, t_end_us, record_stride },
 *     "outputs":  { trace_csv, report_json, spectra_csv },
 *     "deterministic_reduction": false }
 *
 * Omitted fields take the preset's (or the built-in) defaults. Unknown
 * fields are rejected.
 */
RunConfig parse_run_config(const std::string& json_text);

/// Reads and parses a config file; io_error if it cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

std::string serialize(const RunConfig& config);

/// detuning_MHz,alpha_per_mm,re_chi,im_chi for the prepared medium.
std::string spectra_to_csv(const SpectralPopulation& pop,
                           const MediumSpec& medium);

} // namespace echosim

#endif
