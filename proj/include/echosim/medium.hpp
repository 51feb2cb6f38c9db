#ifndef ECHOSIM_MEDIUM_HPP
#define ECHOSIM_MEDIUM_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echosim/common.hpp"

namespace echosim {

/**
 * Uniform grid of detuning bin centres, symmetric about zero.
 *
 * Bin k sits at (k - (n - 1) / 2) * spacing; the bins tile
 * [-span/2, span/2], so spacing = span / n.
 */
struct DetuningGrid
{
    int n_bins = 1024;
    double span_mhz = 32.0;

    double spacing() const { return span_mhz / n_bins; }
    double center(int k) const { return (k - 0.5 * (n_bins - 1)) * spacing(); }
    double min_center() const { return center(0); }
    double max_center() const { return center(n_bins - 1); }
    Eigen::ArrayXd centers() const;

    bool operator==(const DetuningGrid&) const = default;
};

/// Physical description of the doped crystal slab.
struct MediumSpec
{
    double length_mm = 5.0;
    double optical_depth = 20.0;
    double inhomogeneous_fwhm_mhz = 4.0;
    double t1_us = 164.0;
    double t2_us = 25.0;
    DetuningGrid grid{};
    /* only sets the absolute scale of chi; group delays do not depend on it */
    double carrier_wavelength_nm = 605.98;

    /// Lorentzian FWHM 1/(pi T2), in MHz.
    double homogeneous_fwhm_mhz() const { return 1.0 / (pi * t2_us); }

    /// Throws config_error naming the first violated field.
    void validate() const;

    /**
     * Extra grid requirement that depends on the pulses: the grid must span
     * at least 20 times the widest pulse bandwidth (MHz).
     */
    void validate_bandwidth(double widest_bandwidth_mhz) const;

    bool operator==(const MediumSpec&) const = default;
};

/**
 * Population difference per detuning bin (ground minus excited), already
 * scaled by the density factor. The inhomogeneous lineshape is NOT folded in
 * here; it enters as a bin weight (see inhomogeneous_weights).
 */
struct SpectralPopulation
{
    Eigen::ArrayXd bins;
    double density_scale = 1.0;
};

enum class HoleShape { lorentzian, gaussian };

struct HoleSpec
{
    double center_mhz = 0.0;
    double width_fwhm_mhz = 1.0;
    double depth = 1.0;
    HoleShape shape = HoleShape::lorentzian;

    void validate(const std::string& prefix = "hole") const;

    bool operator==(const HoleSpec&) const = default;
};

std::string to_string(HoleShape shape);
HoleShape hole_shape_from_string(const std::string& name);

/// Gaussian inhomogeneous weight per bin, normalised to unit sum.
Eigen::ArrayXd inhomogeneous_weights(const MediumSpec& spec);

SpectralPopulation build_population(const MediumSpec& spec,
                                    double density_scale);

/**
 * Ground-state density left by the repump beam, |sin(k sqrt(I_R) T)|.
 * `rabi_per_sqrt_intensity` is k in rad/us per sqrt(intensity).
 */
double repump_density(double i_r, double t_pump_us,
                      double rabi_per_sqrt_intensity);

/// Unit-peak hole profile evaluated at `detuning_mhz`.
double hole_profile(const HoleSpec& hole, double detuning_mhz);

/// n'(D) = n(D) (1 - depth S(D)).
SpectralPopulation burn_hole(const SpectralPopulation& pop,
                             const HoleSpec& hole,
                             const DetuningGrid& grid);

/**
 * Spectral density of absorbers seen by a weak probe: the weighted
 * population convolved with the homogeneous Lorentzian. The Lorentzian
 * kernel is sampled on the grid lattice and normalised to unit sum, so the
 * result stays meaningful when the homogeneous width is below one bin.
 */
Eigen::ArrayXd absorber_density(const SpectralPopulation& pop,
                                const MediumSpec& spec);

/// absorber_density of the pristine medium (N = 1, no hole) at zero detuning.
double reference_absorber_density(const MediumSpec& spec);

/**
 * Intensity absorption coefficient per bin in 1/mm, normalised so the
 * pristine full-density medium has alpha(0) * length = optical_depth.
 */
Eigen::ArrayXd absorption_spectrum(const SpectralPopulation& pop,
                                   const MediumSpec& spec);

/// Linear interpolation of a per-bin quantity at an arbitrary detuning.
double interpolate(const DetuningGrid& grid, const Eigen::ArrayXd& values,
                   double detuning_mhz);

/**
 * Discrete Hilbert transform (1/pi) P int f(x) / (x - y) dx on a uniform
 * grid, using the odd-offset (Maclaurin) rule: for output bin j only bins
 * with k - j odd contribute, each with weight 2h / (x_k - x_j). The
 * singular point is never sampled and symmetric pairs cancel exactly.
 * The spacing h cancels, so the transform needs only the samples.
 */
template <typename Derived>
Eigen::ArrayXd hilbert_transform(const Eigen::ArrayBase<Derived>& f)
{
    const Eigen::Index n = f.size();
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double acc = 0.0;
        for (Eigen::Index k = (j % 2 == 0) ? 1 : 0; k < n; k += 2) {
            acc += f(k) / static_cast<double>(k - j);
        }
        out(j) = 2.0 * acc / pi;
    }
    return out;
}

struct Susceptibility
{
    /* Im chi = alpha c / omega_0; Re chi from the Kramers-Kronig transform */
    Eigen::ArrayXcd chi;
    std::vector<std::string> warnings;
};

Susceptibility susceptibility(const SpectralPopulation& pop,
                              const MediumSpec& spec);

/**
 * Group delay minus the vacuum transit time, (l/c)(n_g - 1), in us.
 * n_g is built from Re chi and its centred finite difference at the probe
 * detuning. Throws domain_error if the probe is within one bin of the edge.
 */
double group_delay(const SpectralPopulation& pop, const MediumSpec& spec,
                   double probe_detuning_mhz);

} // namespace echosim

#endif
