#include "echosim/medium.hpp"

#include <algorithm>
#include <cmath>

namespace echosim {

Eigen::ArrayXd DetuningGrid::centers() const
{
    Eigen::ArrayXd c(n_bins);
    for (int k = 0; k < n_bins; ++k) {
        c(k) = center(k);
    }
    return c;
}

void MediumSpec::validate() const
{
    if (!(length_mm > 0.0)) {
        throw config_error("medium.length_mm", "must be positive");
    }
    if (!(optical_depth >= 0.0)) {
        throw config_error("medium.optical_depth", "must be non-negative");
    }
    if (!(inhomogeneous_fwhm_mhz > 0.0)) {
        throw config_error("medium.inhomogeneous_fwhm_mhz",
                           "must be positive");
    }
    if (!(t1_us > 0.0)) {
        throw config_error("medium.t1_us", "must be positive");
    }
    if (!(t2_us > 0.0)) {
        throw config_error("medium.t2_us", "must be positive");
    }
    if (t2_us > 2.0 * t1_us) {
        throw config_error("medium.t2_us", "must not exceed 2 * t1_us");
    }
    if (!(carrier_wavelength_nm > 0.0)) {
        throw config_error("medium.carrier_wavelength_nm",
                           "must be positive");
    }
    if (grid.n_bins < 64) {
        throw config_error("medium.grid.n_bins", "must be at least 64");
    }
    if (!(grid.span_mhz > 0.0)) {
        throw config_error("medium.grid.span_mhz", "must be positive");
    }
    if (grid.span_mhz < 4.0 * inhomogeneous_fwhm_mhz) {
        throw config_error("medium.grid.span_mhz",
                           "must cover at least 4x the inhomogeneous FWHM");
    }
}

void MediumSpec::validate_bandwidth(double widest_bandwidth_mhz) const
{
    if (grid.span_mhz < 20.0 * widest_bandwidth_mhz) {
        throw config_error("medium.grid.span_mhz",
                           "must cover at least 20x the widest pulse "
                           "bandwidth (" +
                               std::to_string(widest_bandwidth_mhz) +
                               " MHz)");
    }
}

void HoleSpec::validate(const std::string& prefix) const
{
    if (!(width_fwhm_mhz > 0.0)) {
        throw config_error(prefix + ".width_fwhm_mhz", "must be positive");
    }
    if (!(depth >= 0.0 && depth <= 1.0)) {
        throw config_error(prefix + ".depth", "must lie in [0, 1]");
    }
    if (!std::isfinite(center_mhz)) {
        throw config_error(prefix + ".center_mhz", "must be finite");
    }
}

std::string to_string(HoleShape shape)
{
    return shape == HoleShape::lorentzian ? "lorentzian" : "gaussian";
}

HoleShape hole_shape_from_string(const std::string& name)
{
    if (name == "lorentzian") {
        return HoleShape::lorentzian;
    }
    if (name == "gaussian") {
        return HoleShape::gaussian;
    }
    throw config_error("hole.shape", "expected lorentzian or gaussian, got '" +
                                         name + "'");
}

Eigen::ArrayXd inhomogeneous_weights(const MediumSpec& spec)
{
    const Eigen::ArrayXd x = spec.grid.centers() / spec.inhomogeneous_fwhm_mhz;
    Eigen::ArrayXd g = (-4.0 * std::log(2.0) * x.square()).exp();
    return g / g.sum();
}

SpectralPopulation build_population(const MediumSpec& spec,
                                    double density_scale)
{
    spec.validate();
    if (!(density_scale >= 0.0 && density_scale <= 1.0)) {
        throw config_error("density_scale", "must lie in [0, 1]");
    }
    return {Eigen::ArrayXd::Constant(spec.grid.n_bins, density_scale),
            density_scale};
}

double repump_density(double i_r, double t_pump_us,
                      double rabi_per_sqrt_intensity)
{
    if (!(i_r >= 0.0)) {
        throw domain_error("repump intensity must be non-negative");
    }
    if (!(t_pump_us > 0.0)) {
        throw domain_error("repump duration must be positive");
    }
    const double s =
        std::abs(std::sin(rabi_per_sqrt_intensity * std::sqrt(i_r) * t_pump_us));
    return std::clamp(s, 0.0, 1.0);
}

double hole_profile(const HoleSpec& hole, double detuning_mhz)
{
    const double x = (detuning_mhz - hole.center_mhz) / hole.width_fwhm_mhz;
    if (hole.shape == HoleShape::lorentzian) {
        return 1.0 / (1.0 + 4.0 * x * x);
    }
    return std::exp(-4.0 * std::log(2.0) * x * x);
}

SpectralPopulation burn_hole(const SpectralPopulation& pop,
                             const HoleSpec& hole, const DetuningGrid& grid)
{
    hole.validate();
    if (pop.bins.size() != grid.n_bins) {
        throw config_error("population.bins", "size does not match grid");
    }
    SpectralPopulation out = pop;
    for (int k = 0; k < grid.n_bins; ++k) {
        out.bins(k) *= 1.0 - hole.depth * hole_profile(hole, grid.center(k));
    }
    out.bins = out.bins.min(1.0).max(-1.0);
    return out;
}

namespace {

/* Lorentzian kernel on lattice offsets -(n-1)..(n-1), unit sum. */
Eigen::ArrayXd lattice_lorentzian(const MediumSpec& spec)
{
    const int n = spec.grid.n_bins;
    const double hwhm = 0.5 * spec.homogeneous_fwhm_mhz();
    const double h = spec.grid.spacing();
    Eigen::ArrayXd kernel(2 * n - 1);
    for (int m = -(n - 1); m <= n - 1; ++m) {
        const double x = m * h;
        kernel(m + n - 1) = hwhm / (hwhm * hwhm + x * x);
    }
    return kernel / kernel.sum();
}

} // namespace

Eigen::ArrayXd absorber_density(const SpectralPopulation& pop,
                                const MediumSpec& spec)
{
    const int n = spec.grid.n_bins;
    if (pop.bins.size() != n) {
        throw config_error("population.bins", "size does not match grid");
    }
    const Eigen::ArrayXd source = inhomogeneous_weights(spec) * pop.bins;
    const Eigen::ArrayXd kernel = lattice_lorentzian(spec);
    Eigen::ArrayXd out(n);
    for (int j = 0; j < n; ++j) {
        /* kernel index for offset (j - k) is (j - k) + n - 1 */
        out(j) = (source * kernel.segment(j, n).reverse()).sum();
    }
    return out;
}

double reference_absorber_density(const MediumSpec& spec)
{
    const SpectralPopulation pristine{
        Eigen::ArrayXd::Ones(spec.grid.n_bins), 1.0};
    return interpolate(spec.grid, absorber_density(pristine, spec), 0.0);
}

Eigen::ArrayXd absorption_spectrum(const SpectralPopulation& pop,
                                   const MediumSpec& spec)
{
    spec.validate();
    const double alpha0 = spec.optical_depth / spec.length_mm;
    return alpha0 * absorber_density(pop, spec) /
           reference_absorber_density(spec);
}

double interpolate(const DetuningGrid& grid, const Eigen::ArrayXd& values,
                   double detuning_mhz)
{
    const double pos = detuning_mhz / grid.spacing() + 0.5 * (grid.n_bins - 1);
    if (pos <= 0.0) {
        return values(0);
    }
    if (pos >= grid.n_bins - 1) {
        return values(grid.n_bins - 1);
    }
    const int k = static_cast<int>(std::floor(pos));
    const double f = pos - k;
    return (1.0 - f) * values(k) + f * values(k + 1);
}

Susceptibility susceptibility(const SpectralPopulation& pop,
                              const MediumSpec& spec)
{
    const Eigen::ArrayXd alpha = absorption_spectrum(pop, spec);
    /* omega_0 in rad/us, c in mm/us: alpha c / omega_0 is dimensionless */
    const double omega0 =
        two_pi * speed_of_light / (spec.carrier_wavelength_nm * 1e-6);
    const Eigen::ArrayXd im = alpha * speed_of_light / omega0;
    const Eigen::ArrayXd re = hilbert_transform(im);

    Susceptibility out;
    out.chi = re.cast<std::complex<double>>() +
              std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();

    const double peak = im.maxCoeff();
    if (peak > 0.0) {
        const double edge = std::max(im(0), im(im.size() - 1));
        if (edge > 1e-3 * peak) {
            out.warnings.push_back(
                "absorption at the grid edge is " +
                std::to_string(edge / peak) +
                " of its peak; Kramers-Kronig tails are truncated");
        }
    }
    return out;
}

double group_delay(const SpectralPopulation& pop, const MediumSpec& spec,
                   double probe_detuning_mhz)
{
    const DetuningGrid& grid = spec.grid;
    const double h = grid.spacing();
    if (probe_detuning_mhz - h < grid.min_center() ||
        probe_detuning_mhz + h > grid.max_center()) {
        throw domain_error("probe detuning " +
                           std::to_string(probe_detuning_mhz) +
                           " MHz is within one bin of the grid edge");
    }
    if ((pop.bins == 0.0).all() || spec.optical_depth == 0.0) {
        return 0.0;
    }
    const Susceptibility s = susceptibility(pop, spec);
    const Eigen::ArrayXd re = s.chi.real();
    const double omega0 =
        two_pi * speed_of_light / (spec.carrier_wavelength_nm * 1e-6);
    const double omega = omega0 + angular(probe_detuning_mhz);

    const double re_here = interpolate(grid, re, probe_detuning_mhz);
    const double slope = (interpolate(grid, re, probe_detuning_mhz + h) -
                          interpolate(grid, re, probe_detuning_mhz - h)) /
                         (2.0 * angular(h));
    /* n = 1 + Re chi / 2, n_g = n + omega dn/domega */
    const double group_index_minus_one = 0.5 * re_here + 0.5 * omega * slope;
    return spec.length_mm / speed_of_light * group_index_minus_one;
}

} // namespace echosim
