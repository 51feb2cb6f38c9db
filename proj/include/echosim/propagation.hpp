#ifndef ECHOSIM_PROPAGATION_HPP
#define ECHOSIM_PROPAGATION_HPP

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "echosim/bloch.hpp"
#include "echosim/medium.hpp"
#include "echosim/sequence.hpp"

namespace echosim {

/**
 * Discretisation of a run. The slab is cut into n_z cells of length
 * dz = length / n_z; atoms sit at cell centres, the field lives on the
 * n_z + 1 cell faces. Time runs in the retarded (co-moving) frame.
 */
struct SimulationGrid
{
    int n_z = 128;
    double dt_us = 0.00625;
    double t_end_us = 24.0;
    int record_stride = 8;

    double dz(const MediumSpec& medium) const
    {
        return medium.length_mm / n_z;
    }
    long n_steps() const;
    long n_records() const { return n_steps() / record_stride + 1; }
    double sample_dt_us() const { return dt_us * record_stride; }

    void validate() const;

    bool operator==(const SimulationGrid&) const = default;
};

/**
 * Envelope (rad/us) sampled at a fixed position. Sample i is at lab time
 * t0_us + i * sample_dt_us; the output face carries t0 = length / c.
 */
struct FieldTrace
{
    double t0_us = 0.0;
    double sample_dt_us = 0.0;
    double z_mm = 0.0;
    Eigen::ArrayXcd samples;

    Eigen::Index size() const { return samples.size(); }
    double time(Eigen::Index i) const { return t0_us + i * sample_dt_us; }
    Eigen::ArrayXd intensity() const { return samples.abs2(); }
};

/**
 * Bloch vectors for every (detuning bin, cell), one column per cell, and
 * the normalised inhomogeneous weights shared by all cells.
 */
struct BlochField
{
    Eigen::ArrayXXd u;
    Eigen::ArrayXXd v;
    Eigen::ArrayXXd w;
    Eigen::ArrayXd weights;
    double t_us = 0.0;

    static BlochField ground(Eigen::Index n_bins, Eigen::Index n_cells,
                             Eigen::ArrayXd weights);
};

/**
 * P = sum_k weight_k n_k (u_k + i v_k) over the bins of one cell.
 * Throws config_error when the three arrays are not aligned.
 */
template <typename DerivedU, typename DerivedV>
std::complex<double>
macroscopic_polarization(const Eigen::ArrayBase<DerivedU>& u,
                         const Eigen::ArrayBase<DerivedV>& v,
                         const Eigen::ArrayXd& population,
                         const Eigen::ArrayXd& weights)
{
    if (u.size() != v.size() || u.size() != population.size() ||
        u.size() != weights.size()) {
        throw config_error("polarization",
                           "bloch, population and weight grids differ in "
                           "size");
    }
    const Eigen::ArrayXd a = weights * population;
    return {(a * u.derived()).sum(), (a * v.derived()).sum()};
}

/**
 * Field coupling constant (rad/us per mm per unit polarization) that makes
 * the weak-field intensity transmission of the pristine medium equal
 * exp(-optical_depth). Derived from the same discrete absorber density the
 * medium module uses for alpha, evaluated once per medium.
 */
double calibrate_coupling(const MediumSpec& medium);

/**
 * Every setup-time check of a run: medium, grid, sequence, pulse bandwidth
 * against the detuning span, the RK4 step bound and the detuning-lattice
 * recurrence time. Throws config_error naming the field.
 */
void validate_run(const SequenceSpec& seq, const MediumSpec& medium,
                  const SimulationGrid& grid);

/// Population the sequence's preparation leaves behind (density, hole).
SpectralPopulation prepare_population(const SequenceSpec& seq,
                                      const MediumSpec& medium);

struct PropagationOptions
{
    /* store the full Bloch field every `snapshot_stride` steps */
    bool record_snapshots = false;
    int snapshot_stride = 0;
    /* worker threads for the per-cell Bloch update; results do not
       depend on it because every cell is reduced by a single thread */
    int threads = 1;
};

struct PropagationResult
{
    FieldTrace input;
    FieldTrace output;
    std::vector<BlochField> snapshots;
    double coupling = 0.0;
};

/**
 * Runs the experiment. Each time step first sweeps the field through the
 * slab, W(z + dz) = W(z) + i kappa dz conj(P(z + dz/2)), then advances all
 * Bloch vectors one RK4 step under their local field. The medium-generated
 * part of the field is extrapolated in time for the RK4 sub-steps; the
 * injected envelope is evaluated exactly.
 *
 * Throws config_error for invalid inputs, numerical_error on NaN/Inf.
 */
PropagationResult propagate(const SequenceSpec& seq,
                            const MediumSpec& medium,
                            const SpectralPopulation& pop,
                            const SimulationGrid& grid,
                            const PropagationOptions& options = {});

/// Energy-weighted mean time of the samples inside [start, end).
double centroid(const FieldTrace& trace, double start_us, double end_us);

/**
 * Group delay of the pulse in `window` (lab time at the input face):
 * centroid(output) - centroid(input) - l/c. The output window is shifted
 * by l/c. Throws detection_error if either trace has no pulse there.
 */
double measure_group_delay(const FieldTrace& input, const FieldTrace& output,
                           const DetectionWindow& window, double length_mm);

} // namespace echosim

#endif
