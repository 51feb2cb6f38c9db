#include <cmath>

#include <doctest.h>

#include "echosim/sequence.hpp"

using namespace echosim;

namespace {

PulseSpec rect(double start, double duration, double area)
{
    PulseSpec p;
    p.start_us = start;
    p.duration_us = duration;
    p.area_rad = area;
    return p;
}

double integrated_area(const PulseSpec& p)
{
    SequenceSpec s;
    s.pulses = {p};
    const int n = 200000;
    const double h = p.duration_us / n;
    double a = 0.0;
    for (int k = 0; k < n; ++k) {
        a += std::abs(envelope_at(s, p.start_us + (k + 0.5) * h)) * h;
    }
    return a;
}

} // namespace

TEST_CASE("envelope examples")
{
    SequenceSpec s;
    s.pulses = {rect(0.0, 2.0, pi), rect(5.0, 1.0, pi)};
    CHECK(envelope_at(s, 3.0) == std::complex<double>(0.0, 0.0));
    CHECK(std::abs(envelope_at(s, 1.0) - std::complex<double>(pi / 2, 0.0)) <
          1e-15);

    s.pulses[0].phase_rad = pi / 2;
    const auto w = envelope_at(s, 1.0);
    CHECK(std::abs(w.real()) < 1e-15);
    CHECK(w.imag() == doctest::Approx(pi / 2));
}

TEST_CASE("rect edges are exact")
{
    SequenceSpec s;
    s.pulses = {rect(1.0, 2.0, 1.0)};
    CHECK(std::abs(envelope_at(s, 1.0)) == doctest::Approx(0.5));
    CHECK(envelope_at(s, 3.0) == std::complex<double>(0.0, 0.0));
    CHECK(std::abs(envelope_limit(s, 3.0, Side::left)) == doctest::Approx(0.5));
    CHECK(envelope_limit(s, 1.0, Side::left) == std::complex<double>(0.0));
}

TEST_CASE("integrated envelope equals the declared area")
{
    PulseSpec p = rect(0.5, 1.5, pi / 2);
    CHECK(integrated_area(p) == doctest::Approx(pi / 2).epsilon(1e-6));

    p.shape = PulseShape::hann;
    CHECK(integrated_area(p) == doctest::Approx(pi / 2).epsilon(1e-6));

    /* truncation at +-3 sigma removes 0.27% */
    p.shape = PulseShape::gaussian;
    const double ratio = integrated_area(p) / (pi / 2);
    CHECK(ratio < 1.0);
    CHECK(ratio > 0.997);
    CHECK(ratio == doctest::Approx(std::erf(3.0 / std::sqrt(2.0))).epsilon(1e-6));
}

TEST_CASE("peak and area conversions")
{
    PulseSpec p = rect(0.0, 2.0, pi);
    CHECK(p.peak() == doctest::Approx(pi / 2));
    p.area_rad.reset();
    p.peak_rabi = 3.0;
    CHECK(p.area() == doctest::Approx(6.0));
    p.shape = PulseShape::gaussian;
    CHECK(p.area() == doctest::Approx(3.0 * p.sigma_us() * std::sqrt(two_pi)));
}

TEST_CASE("detuned pulse carries a linear phase")
{
    SequenceSpec s;
    s.pulses = {rect(0.0, 2.0, 2.0)};
    s.pulses[0].detuning_mhz = 0.25;
    const auto w = envelope_at(s, 1.0);
    CHECK(std::arg(w) == doctest::Approx(-pi / 2));
}

TEST_CASE("sequence validation")
{
    SequenceSpec s;
    s.pulses = {rect(0.0, 2.0, pi), rect(1.0, 1.0, pi)};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("pulses[1].start_us"),
                         config_error);
    s.pulses = {rect(0.0, 0.0, pi)};
    CHECK_THROWS_AS(s.validate(), config_error);
    s.pulses = {rect(0.0, 1.0, pi)};
    s.pulses[0].peak_rabi = 1.0;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("area_rad"),
                         config_error);
    s.pulses = {rect(0.0, 1.0, pi)};
    CHECK_NOTHROW(s.validate(1.0));
    CHECK_THROWS_AS(s.validate(0.5), config_error);
    s.windows = {{"a", 0.0, 2.0}, {"b", 1.0, 3.0}};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("windows.b"),
                         config_error);
}

TEST_CASE("presets")
{
    CHECK(preset_names().size() == 5);

    const SequenceSpec conv = preset("fig2_conventional");
    CHECK(conv.pulses.size() == 2);
    CHECK_FALSE(conv.hole.has_value());
    CHECK_FALSE(conv.slow_light());

    const SequenceSpec slow = preset("fig2_slowlight");
    CHECK(slow.pulses == conv.pulses);
    CHECK(slow.hole.has_value());

    for (const SequenceSpec* s : {&conv, &slow}) {
        const PulseSpec& data = s->pulses[0];
        const PulseSpec& read = s->pulses[1];
        CHECK(data.role == PulseRole::data);
        CHECK(read.role == PulseRole::read);
        CHECK(data.duration_us == 1.5);
        CHECK(read.duration_us == 2.3);
        CHECK(read.start_us - data.start_us == 5.0);
        CHECK(*data.area_rad == doctest::Approx(pi / 2));
        CHECK(*read.area_rad == doctest::Approx(pi));
    }

    const SequenceSpec three = preset("fig4b_threepulse");
    REQUIRE(three.pulses.size() == 3);
    CHECK(three.pulses[1].role == PulseRole::write);
    CHECK(three.pulses[2].role == PulseRole::read);
    CHECK(three.pulses[1].duration_us == three.pulses[2].duration_us);
    CHECK(*three.pulses[1].area_rad == doctest::Approx(pi / 2));
    CHECK(*three.pulses[2].area_rad == doctest::Approx(pi / 2));
    CHECK(three.pulses[1].start_us - three.pulses[0].start_us == 10.0);

    CHECK_THROWS_WITH_AS(preset("fig9"), doctest::Contains("fig4a_twopulse"),
                         config_error);
}

TEST_CASE("conventional echo window brackets the two-pulse echo time")
{
    const SequenceSpec s = preset("fig2_conventional");
    const double t_echo =
        2.0 * s.pulses[1].center_us() - s.pulses[0].center_us();
    const DetectionWindow* w = s.window("echo1");
    REQUIRE(w != nullptr);
    CHECK(w->contains(t_echo));
    CHECK_FALSE(s.window("read")->contains(t_echo));
}

TEST_CASE("serialization round trip")
{
    for (const auto& name : preset_names()) {
        const SequenceSpec s = preset(name);
        CHECK(parse_sequence(serialize(s)) == s);
    }
    SequenceSpec odd;
    odd.pulses = {rect(0.1, 0.7, 1.0 / 3.0)};
    odd.pulses[0].detuning_mhz = -0.123456789;
    odd.pulses[0].phase_rad = std::nextafter(1.0, 2.0);
    odd.density_scale = 0.1 + 0.2;
    CHECK(parse_sequence(serialize(odd)) == odd);
}

TEST_CASE("parse rejects unknown and malformed fields")
{
    CHECK_THROWS_WITH_AS(parse_sequence(R"({"version":1,"colour":3})"),
                         doctest::Contains("sequence.colour"), config_error);
    CHECK_THROWS_WITH_AS(parse_sequence(R"({"version":2})"),
                         doctest::Contains("sequence.version"), config_error);
    CHECK_THROWS_WITH_AS(
        parse_sequence(R"({"version":1,"pulses":[{"role":"DATA"}]})"),
        doctest::Contains("sequence.pulses[0].start_us"), config_error);
    CHECK_THROWS_WITH_AS(
        parse_sequence(
            R"({"version":1,"pulses":[{"role":"X","start_us":0,"duration_us":1,"area_rad":1}]})"),
        doctest::Contains("role"), config_error);
    CHECK_THROWS_AS(parse_sequence("{"), config_error);
}

TEST_CASE("echo windows shift with the expected delay")
{
    const SequenceSpec s = preset("fig2_slowlight");
    const SequenceSpec moved = shift_echo_windows(s, 0.5);
    CHECK(moved.window("echo1")->start_us ==
          doctest::Approx(s.window("echo1")->start_us + 0.5));
    CHECK(moved.window("echo2")->end_us ==
          doctest::Approx(s.window("echo2")->end_us + 0.5));
    CHECK(moved.window("read")->start_us == s.window("read")->start_us);
    CHECK(moved.window("read")->end_us == moved.window("echo1")->start_us);
    CHECK(moved.window("data")->end_us == s.window("data")->end_us);
    CHECK_NOTHROW(moved.validate());
}

TEST_CASE("suggested end covers every window")
{
    const SequenceSpec s = preset("fig4b_threepulse");
    for (const auto& w : s.windows) {
        CHECK(w.end_us <= suggested_t_end(s));
    }
}
