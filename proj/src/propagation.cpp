#include "echosim/propagation.hpp"

#include <cmath>

#ifdef ECHOSIM_HAVE_OPENMP
#include <omp.h>
#endif

namespace echosim {

long SimulationGrid::n_steps() const
{
    return static_cast<long>(std::floor(t_end_us / dt_us + 1e-9));
}

void SimulationGrid::validate() const
{
    if (n_z < 16) {
        throw config_error("grid.n_z", "must be at least 16");
    }
    if (!(dt_us > 0.0)) {
        throw config_error("grid.dt_us", "must be positive");
    }
    if (!(t_end_us > 0.0)) {
        throw config_error("grid.t_end_us", "must be positive");
    }
    if (record_stride < 1) {
        throw config_error("grid.record_stride", "must be at least 1");
    }
}

BlochField BlochField::ground(Eigen::Index n_bins, Eigen::Index n_cells,
                              Eigen::ArrayXd weights)
{
    BlochField f;
    f.u = Eigen::ArrayXXd::Zero(n_bins, n_cells);
    f.v = Eigen::ArrayXXd::Zero(n_bins, n_cells);
    f.w = Eigen::ArrayXXd::Constant(n_bins, n_cells, -1.0);
    f.weights = std::move(weights);
    return f;
}

double calibrate_coupling(const MediumSpec& medium)
{
    /*
     * A weak field at detuning f sees the amplitude attenuation
     * kappa sum_k a_k g2 / (g2^2 + (2 pi (f - D_k))^2). In the continuum
     * limit the intensity absorption is (kappa / h) times the absorber
     * density of the medium module, h the bin spacing in MHz. Requiring
     * alpha(0) l = d fixes kappa.
     */
    const double alpha0 = medium.optical_depth / medium.length_mm;
    return alpha0 * medium.grid.spacing() /
           reference_absorber_density(medium);
}

SpectralPopulation prepare_population(const SequenceSpec& seq,
                                      const MediumSpec& medium)
{
    SpectralPopulation pop = build_population(medium, seq.density_scale);
    if (seq.hole) {
        pop = burn_hole(pop, *seq.hole, medium.grid);
    }
    return pop;
}

void validate_run(const SequenceSpec& seq, const MediumSpec& medium,
                  const SimulationGrid& grid)
{
    medium.validate();
    grid.validate();
    seq.validate(grid.t_end_us);
    if (!seq.pulses.empty()) {
        medium.validate_bandwidth(seq.widest_bandwidth_mhz());
    }
    const double max_detuning = std::max(std::abs(medium.grid.min_center()),
                                         std::abs(medium.grid.max_center()));
    const double limit =
        max_stable_step(medium.t2_us, seq.max_peak_rabi(), max_detuning);
    if (grid.dt_us > limit * (1.0 + 1e-12)) {
        throw config_error("grid.dt_us",
                           "exceeds the RK4 stability bound " +
                               std::to_string(limit) + " us");
    }
    /* a lattice of detunings rephases every 1 / spacing */
    const double recurrence = 1.0 / medium.grid.spacing();
    if (grid.t_end_us >= recurrence) {
        throw config_error("medium.grid.n_bins",
                           "bin spacing recurs after " +
                               std::to_string(recurrence) +
                               " us, before grid.t_end_us");
    }
}

namespace {

void check_inputs(const SequenceSpec& seq, const MediumSpec& medium,
                  const SpectralPopulation& pop, const SimulationGrid& grid)
{
    validate_run(seq, medium, grid);
    if (pop.bins.size() != medium.grid.n_bins) {
        throw config_error("population.bins",
                           "size does not match medium.grid.n_bins");
    }
}

FieldTrace make_trace(const SimulationGrid& grid, double t0, double z)
{
    FieldTrace t;
    t.t0_us = t0;
    t.sample_dt_us = grid.sample_dt_us();
    t.z_mm = z;
    t.samples = Eigen::ArrayXcd::Zero(grid.n_records());
    return t;
}

} // namespace

PropagationResult propagate(const SequenceSpec& seq, const MediumSpec& medium,
                            const SpectralPopulation& pop,
                            const SimulationGrid& grid,
                            const PropagationOptions& options)
{
    check_inputs(seq, medium, pop, grid);

    const int n_bins = medium.grid.n_bins;
    const int n_z = grid.n_z;
    const double dt = grid.dt_us;
    const double dz = grid.dz(medium);
    const long n_steps = grid.n_steps();
    const std::complex<double> i_unit(0.0, 1.0);

    PropagationResult result;
    result.coupling = calibrate_coupling(medium);
    result.input = make_trace(grid, 0.0, 0.0);
    result.output = make_trace(grid, medium.length_mm / speed_of_light,
                               medium.length_mm);

    const Eigen::ArrayXd detuning_rad = two_pi * medium.grid.centers();
    const Eigen::ArrayXd weights = inhomogeneous_weights(medium);
    /* per-bin polarization weight */
    const Eigen::ArrayXd source = weights * pop.bins;
    const bool active = (source != 0.0).any() && result.coupling > 0.0;
    const std::complex<double> gain = i_unit * result.coupling * dz;
    const Relaxation<double> relax{medium.t1_us, medium.t2_us};

    BlochField field = BlochField::ground(n_bins, n_z, weights);

    /* medium-generated field at cell centres: now, one and two steps ago */
    Eigen::ArrayXcd generated = Eigen::ArrayXcd::Zero(n_z);
    Eigen::ArrayXcd generated_1 = generated;
    Eigen::ArrayXcd generated_2 = generated;
    Eigen::ArrayXcd polarization = Eigen::ArrayXcd::Zero(n_z);

    const int threads = std::max(1, options.threads);
    (void) threads;

    for (long n = 0; n <= n_steps; ++n) {
        const double t = n * dt;

        /* (a) field sweep through the slab */
        std::complex<double> face(0.0, 0.0);
        if (active) {
#ifdef ECHOSIM_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
            for (int j = 0; j < n_z; ++j) {
                polarization(j) = {(source * field.u.col(j)).sum(),
                                   (source * field.v.col(j)).sum()};
            }
            for (int j = 0; j < n_z; ++j) {
                const std::complex<double> next =
                    face + gain * std::conj(polarization(j));
                generated(j) = 0.5 * (face + next);
                face = next;
            }
            if (!std::isfinite(face.real()) || !std::isfinite(face.imag())) {
                for (int j = 0; j < n_z; ++j) {
                    if (!std::isfinite(std::abs(polarization(j)))) {
                        throw numerical_error(n, j, "polarization");
                    }
                }
                throw numerical_error(n, n_z, "field");
            }
        }

        if (n % grid.record_stride == 0) {
            const long r = n / grid.record_stride;
            const std::complex<double> in = envelope_at(seq, t);
            result.input.samples(r) = in;
            result.output.samples(r) = in + face;
        }
        if (options.record_snapshots && options.snapshot_stride > 0 &&
            n % options.snapshot_stride == 0) {
            field.t_us = t;
            result.snapshots.push_back(field);
        }
        if (n == n_steps) {
            break;
        }

        /* (b) Bloch update under the local field */
        const std::array<std::complex<double>, 3> injected = {
            envelope_limit(seq, t, Side::right),
            envelope_limit(seq, t + 0.5 * dt, Side::right),
            envelope_limit(seq, t + dt, Side::left)};

#ifdef ECHOSIM_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
        for (int j = 0; j < n_z; ++j) {
            /* quadratic extrapolation of the generated field to
               t + dt/2 and t + dt from the last three steps */
            const std::complex<double> g0 = generated(j);
            const std::complex<double> g1 = n >= 1 ? generated_1(j) : g0;
            const std::complex<double> g2 = n >= 2 ? generated_2(j) : g1;
            const std::complex<double> d1 = g0 - g1;
            const std::complex<double> d2 = g0 - 2.0 * g1 + g2;
            const std::array<std::complex<double>, 3> drive = {
                injected[0] + g0,
                injected[1] + g0 + 0.5 * d1 + 0.375 * d2,
                injected[2] + g0 + d1 + d2};
            step_ensemble_rk4(field.u.col(j).data(), field.v.col(j).data(),
                              field.w.col(j).data(), detuning_rad.data(),
                              n_bins, drive, relax, dt);
        }
        generated_2 = generated_1;
        generated_1 = generated;
    }
    return result;
}

double centroid(const FieldTrace& trace, double start_us, double end_us)
{
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        const double t = trace.time(i);
        if (t >= start_us && t < end_us) {
            const double p = std::norm(trace.samples(i));
            num += p * t;
            den += p;
        }
    }
    if (!(den > 0.0)) {
        throw detection_error("no signal in [" + std::to_string(start_us) +
                              ", " + std::to_string(end_us) + ") us");
    }
    return num / den;
}

double measure_group_delay(const FieldTrace& input, const FieldTrace& output,
                           const DetectionWindow& window, double length_mm)
{
    const double transit = length_mm / speed_of_light;
    const auto peak_in = [&](const FieldTrace& tr, double a, double b) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < tr.size(); ++i) {
            if (tr.time(i) >= a && tr.time(i) < b) {
                m = std::max(m, std::norm(tr.samples(i)));
            }
        }
        return m;
    };
    const double in_peak = peak_in(input, window.start_us, window.end_us);
    const double out_peak = peak_in(output, window.start_us + transit,
                                    window.end_us + transit);
    if (!(in_peak > 0.0)) {
        throw detection_error("no input pulse in window " + window.name);
    }
    if (!(out_peak > 1e-12 * in_peak)) {
        throw detection_error("no transmitted pulse in window " +
                              window.name);
    }
    return centroid(output, window.start_us + transit,
                    window.end_us + transit) -
           centroid(input, window.start_us, window.end_us) - transit;
}

} // namespace echosim
