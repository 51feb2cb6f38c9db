#ifndef ECHOSIM_COMMON_HPP
#define ECHOSIM_COMMON_HPP

#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

/*
 * Unit system used throughout the library:
 *   time        microseconds (us)
 *   frequency   MHz for detunings on the spectral grid,
 *               rad/us for Rabi frequencies and angular detunings
 *   length      millimetres (mm)
 */
namespace echosim {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/* speed of light in mm/us */
inline constexpr double speed_of_light = 2.99792458e5;

/* MHz -> rad/us */
inline constexpr double angular(double mhz) { return two_pi * mhz; }

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/**
 * Invalid configuration. The message always starts with the qualified name
 * of the offending field, e.g. "medium.t2_us: must be positive".
 */
class config_error : public std::invalid_argument
{
public:
    config_error(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), m_field(field)
    {
    }

    const std::string& field() const noexcept { return m_field; }

private:
    std::string m_field;
};

/* argument outside the mathematical domain of an operation */
class domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/* NaN/Inf encountered while stepping a simulation */
class numerical_error : public std::runtime_error
{
public:
    numerical_error(long step, long cell, const std::string& what)
        : std::runtime_error("non-finite value at step " +
                             std::to_string(step) + ", cell " +
                             std::to_string(cell) + ": " + what),
          m_step(step), m_cell(cell)
    {
    }

    long step() const noexcept { return m_step; }
    long cell() const noexcept { return m_cell; }

private:
    long m_step;
    long m_cell;
};

/* a required feature (pulse, peak) is missing from a trace */
class detection_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class fit_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace echosim

#endif
