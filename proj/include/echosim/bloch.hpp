#ifndef ECHOSIM_BLOCH_HPP
#define ECHOSIM_BLOCH_HPP

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "echosim/common.hpp"

/*
 * Optical Bloch equations for a two-level atom in the frame rotating at the
 * optical carrier. Sign conventions (used everywhere in the library):
 *
 *   du/dt = -D v - u/T2 + Im(W) w
 *   dv/dt =  D u - v/T2 + Re(W) w
 *   dw/dt = -Re(W) v - Im(W) u - (w + 1)/T1
 *
 * with W the complex Rabi envelope (rad/us) and D the angular detuning.
 * w = -1 is the ground state; relaxation drives every atom back to it.
 * Infinite T1/T2 switch the corresponding relaxation off.
 */
namespace echosim {

template <typename Scalar>
using BlochVector = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
BlochVector<Scalar> ground_state()
{
    return BlochVector<Scalar>(0, 0, -1);
}

template <typename Scalar>
struct DriveSample
{
    std::complex<Scalar> rabi{};  /* rad/us */
    Scalar detuning_mhz{};        /* atom detuning from the carrier */
};

template <typename Scalar>
struct Relaxation
{
    Scalar t1 = std::numeric_limits<Scalar>::infinity();
    Scalar t2 = std::numeric_limits<Scalar>::infinity();

    Scalar gamma1() const { return Scalar(1) / t1; }
    Scalar gamma2() const { return Scalar(1) / t2; }

    static Relaxation lossless() { return {}; }
};

template <typename Scalar>
BlochVector<Scalar> bloch_derivative(const BlochVector<Scalar>& s,
                                     const DriveSample<Scalar>& drive,
                                     const Relaxation<Scalar>& relax)
{
    const Scalar d = Scalar(two_pi) * drive.detuning_mhz;
    const Scalar wr = drive.rabi.real();
    const Scalar wi = drive.rabi.imag();
    const Scalar g1 = relax.gamma1();
    const Scalar g2 = relax.gamma2();
    return BlochVector<Scalar>(-d * s(1) - g2 * s(0) + wi * s(2),
                               d * s(0) - g2 * s(1) + wr * s(2),
                               -wr * s(1) - wi * s(0) - g1 * (s(2) + 1));
}

/**
 * Classical RK4 step. `rabi` holds the envelope at t, t + dt/2 and t + dt.
 */
template <typename Scalar>
BlochVector<Scalar> step_rk4(const BlochVector<Scalar>& s,
                             const std::array<std::complex<Scalar>, 3>& rabi,
                             Scalar detuning_mhz,
                             const Relaxation<Scalar>& relax, Scalar dt)
{
    const DriveSample<Scalar> d0{rabi[0], detuning_mhz};
    const DriveSample<Scalar> d1{rabi[1], detuning_mhz};
    const DriveSample<Scalar> d2{rabi[2], detuning_mhz};
    const BlochVector<Scalar> k1 = bloch_derivative(s, d0, relax);
    const BlochVector<Scalar> k2 =
        bloch_derivative<Scalar>(s + Scalar(0.5) * dt * k1, d1, relax);
    const BlochVector<Scalar> k3 =
        bloch_derivative<Scalar>(s + Scalar(0.5) * dt * k2, d1, relax);
    const BlochVector<Scalar> k4 =
        bloch_derivative<Scalar>(s + dt * k3, d2, relax);
    return s + dt / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

/**
 * Largest RK4 step allowed for the given decay and drive scales:
 * min(T2, 2 pi / max|W|, 2 pi / max|D|) / 10. Zero drive or detuning
 * impose no limit.
 */
template <typename Scalar>
Scalar max_stable_step(Scalar t2, Scalar max_rabi, Scalar max_detuning_mhz)
{
    Scalar limit = t2;
    if (max_rabi > 0) {
        limit = std::min(limit, Scalar(two_pi) / max_rabi);
    }
    if (max_detuning_mhz > 0) {
        /* 2 pi / (2 pi f) */
        limit = std::min(limit, Scalar(1) / max_detuning_mhz);
    }
    return limit / Scalar(10);
}

/**
 * Exact rotation by `area` about (cos phase, sin phase, 0), right-handed.
 * Used for idealised instantaneous pulses; note that an integrated envelope
 * with phase p rotates about (-cos p, sin p, 0).
 */
template <typename Scalar>
BlochVector<Scalar> hard_pulse(const BlochVector<Scalar>& s, Scalar area,
                               Scalar phase)
{
    const BlochVector<Scalar> axis(std::cos(phase), std::sin(phase), 0);
    const Scalar c = std::cos(area);
    const Scalar sn = std::sin(area);
    return c * s + sn * axis.cross(s) + (1 - c) * axis.dot(s) * axis;
}

/* Free evolution for time t with no drive, exact. */
template <typename Scalar>
BlochVector<Scalar> free_evolution(const BlochVector<Scalar>& s,
                                   Scalar detuning_mhz,
                                   const Relaxation<Scalar>& relax, Scalar t)
{
    const Scalar phi = Scalar(two_pi) * detuning_mhz * t;
    const Scalar decay2 = std::exp(-relax.gamma2() * t);
    const Scalar decay1 = std::exp(-relax.gamma1() * t);
    return BlochVector<Scalar>(
        decay2 * (std::cos(phi) * s(0) - std::sin(phi) * s(1)),
        decay2 * (std::sin(phi) * s(0) + std::cos(phi) * s(1)),
        -1 + (s(2) + 1) * decay1);
}

/**
 * Structure-of-arrays ensemble: one Bloch vector per detuning bin.
 */
template <typename Scalar>
struct BlochEnsemble
{
    ArrayX<Scalar> u;
    ArrayX<Scalar> v;
    ArrayX<Scalar> w;

    static BlochEnsemble ground(Eigen::Index n)
    {
        return {ArrayX<Scalar>::Zero(n), ArrayX<Scalar>::Zero(n),
                ArrayX<Scalar>::Constant(n, Scalar(-1))};
    }

    Eigen::Index size() const { return u.size(); }

    BlochVector<Scalar> at(Eigen::Index k) const
    {
        return BlochVector<Scalar>(u(k), v(k), w(k));
    }
};

/**
 * Advances every member of the ensemble by one RK4 step under a common
 * drive. `detuning_rad` holds angular detunings (rad/us), one per bin.
 * Equivalent to step_rk4 per bin, written out for the hot loop.
 */
template <typename Scalar>
void step_ensemble_rk4(Scalar* u, Scalar* v, Scalar* w,
                       const Scalar* detuning_rad, Eigen::Index n,
                       const std::array<std::complex<Scalar>, 3>& rabi,
                       const Relaxation<Scalar>& relax, Scalar dt)
{
    const Scalar g1 = relax.gamma1();
    const Scalar g2 = relax.gamma2();
    const Scalar r0 = rabi[0].real(), i0 = rabi[0].imag();
    const Scalar r1 = rabi[1].real(), i1 = rabi[1].imag();
    const Scalar r2 = rabi[2].real(), i2 = rabi[2].imag();
    const Scalar h = Scalar(0.5) * dt;
    const Scalar s6 = dt / Scalar(6);

    for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar d = detuning_rad[k];
        const Scalar a = u[k], b = v[k], c = w[k];

        const Scalar ku1 = -d * b - g2 * a + i0 * c;
        const Scalar kv1 = d * a - g2 * b + r0 * c;
        const Scalar kw1 = -r0 * b - i0 * a - g1 * (c + 1);

        const Scalar a2 = a + h * ku1, b2 = b + h * kv1, c2 = c + h * kw1;
        const Scalar ku2 = -d * b2 - g2 * a2 + i1 * c2;
        const Scalar kv2 = d * a2 - g2 * b2 + r1 * c2;
        const Scalar kw2 = -r1 * b2 - i1 * a2 - g1 * (c2 + 1);

        const Scalar a3 = a + h * ku2, b3 = b + h * kv2, c3 = c + h * kw2;
        const Scalar ku3 = -d * b3 - g2 * a3 + i1 * c3;
        const Scalar kv3 = d * a3 - g2 * b3 + r1 * c3;
        const Scalar kw3 = -r1 * b3 - i1 * a3 - g1 * (c3 + 1);

        const Scalar a4 = a + dt * ku3, b4 = b + dt * kv3, c4 = c + dt * kw3;
        const Scalar ku4 = -d * b4 - g2 * a4 + i2 * c4;
        const Scalar kv4 = d * a4 - g2 * b4 + r2 * c4;
        const Scalar kw4 = -r2 * b4 - i2 * a4 - g1 * (c4 + 1);

        u[k] = a + s6 * (ku1 + 2 * ku2 + 2 * ku3 + ku4);
        v[k] = b + s6 * (kv1 + 2 * kv2 + 2 * kv3 + kv4);
        w[k] = c + s6 * (kw1 + 2 * kw2 + 2 * kw3 + kw4);
    }
}

} // namespace echosim

#endif
