#ifndef ECHOSIM_SEQUENCE_HPP
#define ECHOSIM_SEQUENCE_HPP

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echosim/medium.hpp"

namespace echosim {

enum class PulseRole { data, read, write, probe };
enum class PulseShape { rect, gaussian, hann };

std::string to_string(PulseRole role);
std::string to_string(PulseShape shape);
PulseRole pulse_role_from_string(const std::string& name);
PulseShape pulse_shape_from_string(const std::string& name);

/**
 * One optical pulse. Exactly one of `area_rad` / `peak_rabi` is set.
 *
 * Rect pulses are on for t in [start, start + duration). Gaussian pulses are
 * centred in that interval with sigma = duration / 6 (field amplitude) and
 * truncated outside it; their declared area refers to the untruncated
 * Gaussian, so the truncated integral is 0.27% short. Hann pulses,
 * sin^2(pi (t - start) / duration), are smooth at both ends and keep the
 * spectrum compact enough for deep-absorption probes.
 *
 * A pulse detuned by f MHz carries the factor exp(-2 pi i f (t - start)).
 */
struct PulseSpec
{
    PulseRole role = PulseRole::data;
    double start_us = 0.0;
    double duration_us = 1.0;
    std::optional<double> area_rad;
    std::optional<double> peak_rabi;
    double phase_rad = 0.0;
    double detuning_mhz = 0.0;
    PulseShape shape = PulseShape::rect;

    double end_us() const { return start_us + duration_us; }
    double center_us() const { return start_us + 0.5 * duration_us; }
    double sigma_us() const { return duration_us / 6.0; }

    /// Peak |W| in rad/us, derived from the area when needed.
    double peak() const;
    /// Pulse area in rad, derived from the peak when needed.
    double area() const;
    /// Spectral width estimate in MHz (1/duration for rect pulses).
    double bandwidth_mhz() const;

    bool operator==(const PulseSpec&) const = default;
};

struct DetectionWindow
{
    std::string name;
    double start_us = 0.0;
    double end_us = 0.0;

    bool contains(double t) const { return t >= start_us && t < end_us; }

    bool operator==(const DetectionWindow&) const = default;
};

/**
 * A complete experiment: timed pulses plus the preparation state of the
 * medium. A hole makes it a slow-light run. Windows named "echo..." are
 * searched for echoes; "data", "read" and "write" frame the driving pulses.
 */
struct SequenceSpec
{
    std::vector<PulseSpec> pulses;
    std::optional<HoleSpec> hole;
    double density_scale = 1.0;
    std::vector<DetectionWindow> windows;
    /* preparation timings etc.; carried along, never simulated */
    std::map<std::string, double> metadata;

    bool slow_light() const { return hole.has_value(); }

    const PulseSpec* find(PulseRole role) const;
    const DetectionWindow* window(const std::string& name) const;

    double widest_bandwidth_mhz() const;
    double max_peak_rabi() const;
    double last_pulse_end_us() const;

    /// Invariant checks; `t_end_us` > 0 also checks pulses and windows fit.
    void validate(double t_end_us = -1.0) const;

    bool operator==(const SequenceSpec&) const = default;
};

/// Complex envelope at t (rad/us); zero between pulses.
std::complex<double> envelope_at(const SequenceSpec& seq, double t_us);

/**
 * One-sided limits of the envelope, used by the integrator so that a step
 * that ends exactly on a rect pulse edge sees the pulse as on over the
 * whole step.
 */
enum class Side { left, right };
std::complex<double> envelope_limit(const SequenceSpec& seq, double t_us,
                                    Side side);

/* JSON document (schema version 1); unknown fields are rejected */
std::string serialize(const SequenceSpec& seq);
SequenceSpec parse_sequence(const std::string& json_text);

/* -------------------------------------------------------------------- */
/* experiment presets                                                    */
/* -------------------------------------------------------------------- */

/**
 * Preparation and timing knobs shared by the presets. Defaults are the
 * calibrated values used for the figure reproductions.
 */
struct PresetParameters
{
    /* pulse lengths and DATA-READ start separation */
    double data_duration_us = 1.5;
    double read_duration_us = 2.3;
    double separation_us = 5.0;
    double data_area = pi / 2;
    double read_area = pi;
    PulseShape shape = PulseShape::gaussian;

    /* slow-light preparation */
    HoleSpec hole{0.0, 1.06, 0.95, HoleShape::gaussian};
    double slow_density = 1.0;
    /* conventional runs: no hole, unpumped (optically thin) medium */
    double conventional_density = 0.01;

    /* echo windows of slow-light runs trail the pulse timing by this */
    double expected_delay_us = 2.0;

    /* three-pulse: DATA-WRITE separation T and WRITE-READ separation T_R */
    double three_pulse_t_us = 10.0;
    double three_pulse_t_r_us = 30.0;
};

std::vector<std::string> preset_names();

/// Throws config_error listing the valid names for an unknown preset.
SequenceSpec preset(const std::string& name,
                    const PresetParameters& params = {});

/* building blocks behind the presets, exposed for delay scans */
SequenceSpec two_pulse_sequence(const PresetParameters& params,
                                bool slow_light);
SequenceSpec three_pulse_sequence(const PresetParameters& params,
                                  bool slow_light);

/// Time by which everything of interest in `seq` has left the medium.
double suggested_t_end(const SequenceSpec& seq);

/**
 * Moves every window named "echo..." by `shift_us`; the window that ended
 * where the first echo window began keeps that boundary.
 */
SequenceSpec shift_echo_windows(SequenceSpec seq, double shift_us);

} // namespace echosim

#endif
