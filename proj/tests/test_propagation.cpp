#include <cmath>

#include <doctest.h>

#include "echosim/analysis.hpp"
#include "echosim/propagation.hpp"

using namespace echosim;

namespace {

PulseSpec pulse(PulseRole role, double start, double duration, double area,
                PulseShape shape)
{
    PulseSpec p;
    p.role = role;
    p.start_us = start;
    p.duration_us = duration;
    p.area_rad = area;
    p.shape = shape;
    return p;
}

/* small, fast medium for structural tests */
MediumSpec light_medium(double depth)
{
    MediumSpec m;
    m.optical_depth = depth;
    m.grid = {2048, 48.0};
    return m;
}

SimulationGrid light_grid(double t_end)
{
    SimulationGrid g;
    g.n_z = 16;
    g.dt_us = 0.004;
    g.t_end_us = t_end;
    g.record_stride = 5;
    return g;
}

SequenceSpec weak_data(double area)
{
    SequenceSpec s;
    s.pulses = {pulse(PulseRole::data, 0.5, 1.0, area, PulseShape::gaussian)};
    s.windows = {{"data", 0.0, 4.0}};
    return s;
}

FieldTrace synthetic(double center, double dt, int n)
{
    FieldTrace t;
    t.sample_dt_us = dt;
    t.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i * dt - center) / 0.3;
        t.samples(i) = std::exp(-x * x);
    }
    return t;
}

} // namespace

TEST_CASE("macroscopic polarization examples")
{
    const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(4);
    const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(4);
    CHECK(macroscopic_polarization(zero, zero, ones, ones / 4.0) ==
          std::complex<double>(0.0));

    Eigen::ArrayXd u(1), v(1), n(1), w(1);
    u << 1.0;
    v << 0.0;
    n << 0.5;
    w << 1.0;
    CHECK(macroscopic_polarization(u, v, n, w) ==
          std::complex<double>(0.5, 0.0));

    Eigen::ArrayXd us(2), vs(2), ns(2), ws(2);
    us << 0.3, 0.3;
    vs << 0.4, -0.4;
    ns << 1.0, 1.0;
    ws << 0.5, 0.5;
    CHECK(macroscopic_polarization(us, vs, ns, ws).imag() == 0.0);

    CHECK(macroscopic_polarization(2.0 * us, vs, ns, ws).real() ==
          doctest::Approx(2.0 * macroscopic_polarization(us, vs, ns, ws).real()));
    CHECK_THROWS_AS(macroscopic_polarization(us, vs, ones, ws), config_error);
}

TEST_CASE("grid validation and trace length")
{
    SimulationGrid g;
    g.dt_us = 0.005;
    g.t_end_us = 10.0;
    g.record_stride = 7;
    CHECK(g.n_records() == static_cast<long>(std::floor(10.0 / 0.035)) + 1);
    g.n_z = 8;
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("grid.n_z"),
                         config_error);

    const MediumSpec m = light_medium(1.0);
    const SequenceSpec s = weak_data(0.01);
    SimulationGrid big = light_grid(8.0);
    big.dt_us = 0.05;
    CHECK_THROWS_WITH_AS(validate_run(s, m, big),
                         doctest::Contains("grid.dt_us"), config_error);
    SimulationGrid late = light_grid(50.0);
    CHECK_THROWS_WITH_AS(validate_run(s, m, late),
                         doctest::Contains("recurs"), config_error);
    SimulationGrid early = light_grid(1.0);
    CHECK_THROWS_AS(validate_run(s, m, early), config_error);
}

TEST_CASE("empty medium transmits the input unchanged")
{
    const MediumSpec m = light_medium(20.0);
    const SequenceSpec s = weak_data(pi / 2);
    const SimulationGrid g = light_grid(6.0);
    const auto run = propagate(s, m, build_population(m, 0.0), g);
    CHECK(run.output.size() == g.n_records());
    CHECK(run.output.t0_us == doctest::Approx(m.length_mm / speed_of_light));
    const double e_in = window_energy(run.input, 0.0, 6.0);
    const double e_out = window_energy(run.output, 0.0, 6.0);
    CHECK(std::abs(e_out - e_in) <= 1e-6 * e_in);
    CHECK(((run.output.samples - run.input.samples).abs() == 0.0).all());
}

TEST_CASE("weak pulse sees Beer absorption")
{
    /* d = 2 leaves enough transmission for a tight check */
    const MediumSpec m = light_medium(2.0);
    SequenceSpec s;
    s.pulses = {pulse(PulseRole::probe, 0.0, 12.0, 0.01 * pi,
                      PulseShape::hann)};
    const SimulationGrid g = light_grid(16.0);
    const auto run = propagate(s, m, build_population(m, 1.0), g);
    const double ratio = window_energy(run.output, 0.0, 16.0) /
                         window_energy(run.input, 0.0, 16.0);
    CHECK(ratio == doctest::Approx(std::exp(-2.0)).epsilon(0.05));
}

TEST_CASE("weak-field linearity")
{
    const MediumSpec m = light_medium(3.0);
    const SimulationGrid g = light_grid(5.0);
    const auto pop = build_population(m, 1.0);
    const double area = 0.01 * pi;
    const auto a = propagate(weak_data(area), m, pop, g);
    const double c = 5.0;
    const auto b = propagate(weak_data(c * area), m, pop, g);
    const double err = (b.output.samples - c * a.output.samples).abs().maxCoeff();
    CHECK(err <= 0.01 * c * a.output.samples.abs().maxCoeff());
}

TEST_CASE("two-pulse echo in a thin medium")
{
    const MediumSpec m = light_medium(0.5);
    SequenceSpec s;
    s.pulses = {pulse(PulseRole::data, 0.0, 1.0, pi / 2, PulseShape::gaussian),
                pulse(PulseRole::read, 5.0, 1.0, pi, PulseShape::gaussian)};
    s.windows = {{"data", 0.0, 5.0}, {"read", 5.0, 8.0}, {"echo1", 8.0, 13.0}};
    const SimulationGrid g = light_grid(14.0);
    const auto run = propagate(s, m, build_population(m, 1.0), g);
    const EchoReport r = analyze_run(run, s);
    REQUIRE(r.echoes.size() == 1);
    CHECK(r.echoes[0].detected);
    /* centres at 0.5 and 5.5 */
    CHECK(r.echoes[0].t_peak_us == doctest::Approx(10.5).epsilon(0.02));
}

TEST_CASE("output never exceeds the strongest input peak")
{
    MediumSpec m;
    SequenceSpec s = preset("fig2_slowlight");
    SimulationGrid g;
    g.n_z = 16;
    g.t_end_us = std::ceil(suggested_t_end(s) / g.dt_us) * g.dt_us;
    const auto run = propagate(s, m, prepare_population(s, m), g);
    const double in_peak = run.input.intensity().maxCoeff();
    CHECK((run.output.intensity() >= 0.0).all());
    CHECK(run.output.intensity().maxCoeff() <= 1.05 * in_peak);
}

TEST_CASE("thread count does not change results")
{
    const MediumSpec m = light_medium(4.0);
    SequenceSpec s;
    s.pulses = {pulse(PulseRole::data, 0.0, 1.0, pi / 2, PulseShape::gaussian),
                pulse(PulseRole::read, 3.0, 1.0, pi, PulseShape::gaussian)};
    const SimulationGrid g = light_grid(8.0);
    const auto pop = build_population(m, 1.0);
    PropagationOptions one;
    PropagationOptions four;
    four.threads = 4;
    const auto a = propagate(s, m, pop, g, one);
    const auto b = propagate(s, m, pop, g, four);
    CHECK((a.output.samples == b.output.samples).all());
    const auto c = propagate(s, m, pop, g, one);
    CHECK((a.output.samples == c.output.samples).all());
}

TEST_CASE("snapshots are recorded on request")
{
    const MediumSpec m = light_medium(1.0);
    PropagationOptions o;
    o.record_snapshots = true;
    o.snapshot_stride = 250;
    const SimulationGrid g = light_grid(4.0);
    const auto run =
        propagate(weak_data(pi / 2), m, build_population(m, 1.0), g, o);
    REQUIRE(run.snapshots.size() == 5);
    const BlochField& f = run.snapshots.back();
    CHECK(f.u.rows() == m.grid.n_bins);
    CHECK(f.u.cols() == g.n_z);
    CHECK(std::abs(f.weights.sum() - 1.0) < 1e-12);
    CHECK((f.u.square() + f.v.square() + f.w.square()).maxCoeff() <=
          1.0 + 1e-6);
}

TEST_CASE("non-finite state aborts with a diagnostic")
{
    MediumSpec m = light_medium(1e300);
    const SimulationGrid g = light_grid(4.0);
    try {
        propagate(weak_data(pi / 2), m, build_population(m, 1.0), g);
        FAIL("expected numerical_error");
    } catch (const numerical_error& e) {
        CHECK(e.step() >= 0);
        CHECK(std::string(e.what()).find("cell") != std::string::npos);
    }
}

TEST_CASE("calibrated coupling reproduces the optical depth")
{
    const MediumSpec m;
    const double kappa = calibrate_coupling(m);
    MediumSpec deeper = m;
    deeper.optical_depth = 2.0 * m.optical_depth;
    CHECK(calibrate_coupling(deeper) == doctest::Approx(2.0 * kappa));
}

TEST_CASE("measure_group_delay examples")
{
    const DetectionWindow w{"data", 0.0, 10.0};
    const FieldTrace in = synthetic(3.0, 0.05, 300);
    CHECK(measure_group_delay(in, in, w, 0.0) == doctest::Approx(0.0));

    FieldTrace out = synthetic(5.0, 0.05, 300);
    CHECK(std::abs(measure_group_delay(in, out, w, 0.0) - 2.0) <= 0.05);

    out.samples.setZero();
    CHECK_THROWS_AS(measure_group_delay(in, out, w, 0.0), detection_error);
}
