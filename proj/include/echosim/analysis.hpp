#ifndef ECHOSIM_ANALYSIS_HPP
#define ECHOSIM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "echosim/propagation.hpp"
#include "echosim/sequence.hpp"

namespace echosim {

struct WindowEnergy
{
    std::string name;
    double energy = 0.0;
    double t_peak_us = 0.0;
    double peak_intensity = 0.0;
    /* false when the peak stays below the noise floor */
    bool detected = false;
};

/**
 * Echo bookkeeping for one output trace. Energies are integrals of
 * |W|^2 dt (rad^2/us); all ratios are relative to data_energy_ref, the
 * energy of the injected DATA pulse.
 */
struct EchoReport
{
    std::vector<WindowEnergy> windows;  /* every window, in sequence order */
    std::vector<WindowEnergy> echoes;   /* windows named echo*, in order   */
    double out_of_window_energy = 0.0;
    double total_energy = 0.0;

    double data_energy_ref = 0.0;
    double efficiency_first = 0.0;
    double efficiency_cumulative = 0.0;
    /* transmitted DATA plus all echoes, relative to the DATA input */
    double transmission_total = 0.0;
    /* transmitted energy in the data window only */
    double data_transmission = 0.0;
    /* time-domain DATA delay; empty without a data window or output */
    std::optional<double> group_delay_us;
};

struct EchoReference
{
    double data_energy = 0.0;
    double input_peak_intensity = 0.0;
};

struct DetectionOptions
{
    /* peak threshold relative to the input peak intensity */
    double noise_floor = 1e-4;
};

/// Energy of the samples whose retarded time lies in [start, end).
double window_energy(const FieldTrace& trace, double start_us, double end_us);

/// Time of a trace sample in the co-moving frame, t - z / c.
double retarded_time(const FieldTrace& trace, Eigen::Index i);

EchoReport detect_echoes(const FieldTrace& trace,
                         const std::vector<DetectionWindow>& windows,
                         const EchoReference& ref,
                         const DetectionOptions& options = {});

/**
 * detect_echoes with the reference taken from the input trace, plus the
 * time-domain group delay of the pulse in the "data" window.
 */
EchoReport analyze_run(const PropagationResult& run, const SequenceSpec& seq,
                       const DetectionOptions& options = {});

struct DecayPoint
{
    double t_us = 0.0;
    double intensity = 0.0;
};

struct FitResult
{
    double i0 = 0.0;
    double tau_us = 0.0;
    double rms_residual = 0.0;
    int n_points = 0;
    double exponent_factor = 1.0;
    std::vector<std::string> warnings;
};

/**
 * Log-linear least squares for I = I0 exp(-k t / tau). Non-positive
 * intensities are dropped with a warning; fewer than four usable points,
 * non-increasing t or a non-decaying slope throw fit_error. rms_residual
 * is the RMS of the residuals of ln I.
 */
FitResult fit_exponential_decay(const std::vector<DecayPoint>& points,
                                double exponent_factor);

/**
 * Two-pulse echo decay I = I0 exp(-2 t / tau). t is the time from the DATA
 * pulse to the echo, i.e. twice the DATA-READ separation, so that tau is
 * the coherence time T2.
 */
FitResult fit_two_pulse_decay(const std::vector<DecayPoint>& points);

/**
 * Three-pulse (stimulated) echo decay versus WRITE-READ separation t_r,
 * I = I0 exp(-k t_r / tau). The stored population grating decays as
 * exp(-t_r / T1) in amplitude, so k = 2 makes tau equal to T1.
 */
FitResult fit_three_pulse_decay(const std::vector<DecayPoint>& points,
                                double exponent_factor = 2.0);

struct SweepRow
{
    double density_scale = 0.0;
    double group_delay_us = 0.0;
    double efficiency_first = 0.0;
    double efficiency_cumulative = 0.0;
    double transmission_total = 0.0;
};

struct SweepAxis
{
    int n_points = 5;
    double density_min = 0.2;
    double density_max = 1.0;

    /// Evenly spaced densities; a single point uses density_min.
    std::vector<double> densities() const;
};

/// `grid` with t_end raised, if needed, to cover every window of `seq`.
SimulationGrid covering_grid(const SequenceSpec& seq,
                             const SimulationGrid& grid);

/// Frequency-domain group delay at line centre of the prepared medium.
double predicted_delay(const SequenceSpec& seq, const MediumSpec& medium);

/**
 * Runs `base` at each density of `axis` and measures the time-domain group
 * delay of the DATA pulse and the echo efficiencies. Echo windows move with
 * the predicted delay relative to the base density. Points run on up to
 * `jobs` threads; rows come back sorted by group delay (ties keep sweep
 * order), independent of completion order.
 */
std::vector<SweepRow> sweep_delay_vs_efficiency(const SequenceSpec& base,
                                                const MediumSpec& medium,
                                                const SimulationGrid& grid,
                                                const SweepAxis& axis,
                                                int jobs = 1);

/// Runs one sequence and returns its sweep row.
SweepRow run_point(const SequenceSpec& seq, const MediumSpec& medium,
                   const SimulationGrid& grid);

/**
 * Two-pulse delay scan: one run per DATA-READ separation; each point is
 * (echo time after DATA, first-echo energy). Windows after the first echo
 * are dropped and `grid.t_end_us` is replaced per point by the end of the
 * first echo window.
 */
std::vector<DecayPoint> two_pulse_scan(const PresetParameters& params,
                                       bool slow_light,
                                       const MediumSpec& medium,
                                       const SimulationGrid& grid,
                                       const std::vector<double>& separations);

/// Three-pulse scan over WRITE-READ separations at fixed DATA-WRITE T.
std::vector<DecayPoint> three_pulse_scan(const PresetParameters& params,
                                         bool slow_light,
                                         const MediumSpec& medium,
                                         const SimulationGrid& grid,
                                         const std::vector<double>& t_rs);

/* serialisation: JSON with stable key order, CSV with header, LF */
std::string to_json(const EchoReport& report);
std::string to_json(const FitResult& fit);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string trace_to_csv(const FieldTrace& trace);

/// Parses "t_us,intensity" CSV; throws config_error naming the bad row.
std::vector<DecayPoint> parse_decay_csv(const std::string& text);

} // namespace echosim

#endif
