#include <doctest.h>

#include "echosim/config.hpp"

using namespace echosim;

namespace {

std::string field_of(const std::string& text)
{
    try {
        parse_run_config(text);
    } catch (const config_error& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("preset configs validate")
{
    for (const auto& name : preset_names()) {
        const RunConfig c = preset_config(name);
        CHECK(c.preset == name);
        CHECK_NOTHROW(c.validate());
        CHECK(c.grid.t_end_us >= suggested_t_end(c.sequence));
    }
}

TEST_CASE("config round trip")
{
    RunConfig c = parse_run_config(R"({
        "preset": "fig2_slowlight",
        "medium": {"t2_us": 30, "grid": {"n_bins": 1024}},
        "grid": {"n_z": 32},
        "outputs": {"report_json": "r.json", "trace_csv": "t.csv"},
        "deterministic_reduction": true
    })");
    CHECK(c.medium.t2_us == 30.0);
    CHECK(c.grid.n_z == 32);
    CHECK(c.outputs.report_json == "r.json");
    CHECK_FALSE(c.outputs.spectra_csv.has_value());
    CHECK(c.deterministic_reduction);
    const RunConfig back = parse_run_config(serialize(c));
    CHECK(back.medium == c.medium);
    CHECK(back.sequence == c.sequence);
    CHECK(back.grid == c.grid);
    CHECK(back.outputs == c.outputs);
    CHECK(back.preset == c.preset);

    RunConfig custom = preset_config("fig2_conventional");
    custom.preset.reset();
    custom.sequence.pulses[1].phase_rad = 0.3;
    const RunConfig again = parse_run_config(serialize(custom));
    CHECK(again.sequence == custom.sequence);
    CHECK_FALSE(again.preset.has_value());
}

TEST_CASE("invalid configs name the field")
{
    CHECK(field_of("{") == "config");
    CHECK(field_of("{}") == "config.sequence");
    CHECK(field_of(R"({"preset":"fig2_slowlight","sequence":{"version":1}})") ==
          "config.sequence");
    CHECK(field_of(R"({"preset":"nope"})") == "preset");
    CHECK(field_of(R"({"preset":"fig2_slowlight","extra":1})") ==
          "config.extra");
    CHECK(field_of(R"({"preset":"fig2_slowlight","medium":{"t2_us":-1}})") ==
          "medium.t2_us");
    CHECK(field_of(R"({"preset":"fig2_slowlight","medium":{"length_mm":0}})") ==
          "medium.length_mm");
    CHECK(field_of(
              R"({"preset":"fig2_slowlight","medium":{"t1_us":10,"t2_us":25}})") ==
          "medium.t2_us");
    CHECK(field_of(
              R"({"preset":"fig2_slowlight","medium":{"grid":{"n_bins":32}}})") ==
          "medium.grid.n_bins");
    CHECK(field_of(
              R"({"preset":"fig2_slowlight","medium":{"grid":{"span_mhz":20}}})") ==
          "medium.grid.span_mhz");
    CHECK(field_of(R"({"preset":"fig2_slowlight","grid":{"n_z":4}})") ==
          "grid.n_z");
    CHECK(field_of(R"({"preset":"fig2_slowlight","grid":{"dt_us":0.1}})") ==
          "grid.dt_us");
    CHECK(field_of(R"({"preset":"fig2_slowlight","grid":{"t_end_us":10}})")
              .rfind("sequence.", 0) == 0);
    CHECK(field_of(R"({"preset":"fig2_slowlight","medium":{"t2_us":"x"}})") ==
          "medium.t2_us");
    CHECK(field_of(
              R"({"preset":"fig2_slowlight","outputs":{"trace_csv":"a","report_json":"./a"}})") ==
          "outputs.report_json");
    CHECK(field_of(R"({"preset":"fig2_slowlight","outputs":{"trace_csv":""}})") ==
          "outputs.trace_csv");
}

TEST_CASE("missing config file is an I/O error")
{
    CHECK_THROWS_AS(load_run_config("/nonexistent/echosim.json"), io_error);
}

TEST_CASE("spectra CSV")
{
    const RunConfig c = preset_config("fig2_slowlight");
    const auto pop = prepare_population(c.sequence, c.medium);
    const std::string csv = spectra_to_csv(pop, c.medium);
    CHECK(csv.rfind("detuning_MHz,alpha_per_mm,re_chi,im_chi\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == c.medium.grid.n_bins + 1);
    CHECK(csv.find('\r') == std::string::npos);
}
