#include "echosim/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json_fields.hpp"

namespace echosim {

using json = nlohmann::ordered_json;

std::string to_string(PulseRole role)
{
    switch (role) {
    case PulseRole::data:
        return "DATA";
    case PulseRole::read:
        return "READ";
    case PulseRole::write:
        return "WRITE";
    case PulseRole::probe:
        return "PROBE";
    }
    return "?";
}

std::string to_string(PulseShape shape)
{
    switch (shape) {
    case PulseShape::rect:
        return "rect";
    case PulseShape::gaussian:
        return "gaussian";
    case PulseShape::hann:
        return "hann";
    }
    return "?";
}

PulseRole pulse_role_from_string(const std::string& name)
{
    if (name == "DATA") return PulseRole::data;
    if (name == "READ") return PulseRole::read;
    if (name == "WRITE") return PulseRole::write;
    if (name == "PROBE") return PulseRole::probe;
    throw config_error("pulse.role",
                       "expected DATA, READ, WRITE or PROBE, got '" + name +
                           "'");
}

PulseShape pulse_shape_from_string(const std::string& name)
{
    if (name == "rect") return PulseShape::rect;
    if (name == "gaussian") return PulseShape::gaussian;
    if (name == "hann") return PulseShape::hann;
    throw config_error("pulse.shape",
                       "expected rect, gaussian or hann, got '" + name + "'");
}

namespace {

/* area / peak */
double shape_norm(const PulseSpec& p)
{
    switch (p.shape) {
    case PulseShape::rect:
        return p.duration_us;
    case PulseShape::gaussian:
        return p.sigma_us() * std::sqrt(two_pi);
    case PulseShape::hann:
        return 0.5 * p.duration_us;
    }
    return p.duration_us;
}

} // namespace

double PulseSpec::peak() const
{
    if (peak_rabi) {
        return *peak_rabi;
    }
    return area_rad.value_or(0.0) / shape_norm(*this);
}

double PulseSpec::area() const
{
    if (area_rad) {
        return *area_rad;
    }
    return peak_rabi.value_or(0.0) * shape_norm(*this);
}

double PulseSpec::bandwidth_mhz() const
{
    switch (shape) {
    case PulseShape::rect:
        return 1.0 / duration_us;
    case PulseShape::gaussian:
        /* FWHM of the Gaussian field spectrum */
        return 2.0 * std::sqrt(2.0 * std::log(2.0)) / (two_pi * sigma_us());
    case PulseShape::hann:
        /* main-lobe half width */
        return 2.0 / duration_us;
    }
    return 1.0 / duration_us;
}

const PulseSpec* SequenceSpec::find(PulseRole role) const
{
    for (const auto& p : pulses) {
        if (p.role == role) {
            return &p;
        }
    }
    return nullptr;
}

const DetectionWindow* SequenceSpec::window(const std::string& name) const
{
    for (const auto& w : windows) {
        if (w.name == name) {
            return &w;
        }
    }
    return nullptr;
}

double SequenceSpec::widest_bandwidth_mhz() const
{
    double bw = 0.0;
    for (const auto& p : pulses) {
        bw = std::max(bw, p.bandwidth_mhz());
    }
    return bw;
}

double SequenceSpec::max_peak_rabi() const
{
    double m = 0.0;
    for (const auto& p : pulses) {
        m = std::max(m, std::abs(p.peak()));
    }
    return m;
}

double SequenceSpec::last_pulse_end_us() const
{
    double t = 0.0;
    for (const auto& p : pulses) {
        t = std::max(t, p.end_us());
    }
    return t;
}

void SequenceSpec::validate(double t_end_us) const
{
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const PulseSpec& p = pulses[i];
        const std::string f = "sequence.pulses[" + std::to_string(i) + "]";
        if (!(p.duration_us > 0.0)) {
            throw config_error(f + ".duration_us", "must be positive");
        }
        if (!(p.start_us >= 0.0)) {
            throw config_error(f + ".start_us", "must be non-negative");
        }
        if (p.area_rad.has_value() == p.peak_rabi.has_value()) {
            throw config_error(f + ".area_rad",
                               "exactly one of area_rad and peak_rabi must "
                               "be given");
        }
        if (!std::isfinite(p.peak()) || !std::isfinite(p.phase_rad) ||
            !std::isfinite(p.detuning_mhz)) {
            throw config_error(f, "non-finite pulse parameter");
        }
        if (i > 0 && p.start_us < pulses[i - 1].end_us()) {
            throw config_error(f + ".start_us",
                               "overlaps the previous pulse (pulses must be "
                               "ordered and disjoint)");
        }
        if (t_end_us > 0.0 && p.end_us() > t_end_us) {
            throw config_error(f + ".duration_us",
                               "pulse ends after grid.t_end_us");
        }
    }
    if (!(density_scale >= 0.0 && density_scale <= 1.0)) {
        throw config_error("sequence.density_scale", "must lie in [0, 1]");
    }
    if (hole) {
        hole->validate("sequence.hole");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const DetectionWindow& w = windows[i];
        const std::string f = "sequence.windows." + w.name;
        if (w.name.empty()) {
            throw config_error("sequence.windows", "empty window name");
        }
        if (!names.insert(w.name).second) {
            throw config_error(f, "duplicate window name");
        }
        if (!(w.end_us > w.start_us) || w.start_us < 0.0) {
            throw config_error(f, "needs 0 <= start < end");
        }
        if (t_end_us > 0.0 && w.end_us > t_end_us + 1e-9) {
            throw config_error(f, "extends past grid.t_end_us");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const DetectionWindow& o = windows[j];
            if (w.start_us < o.end_us && o.start_us < w.end_us) {
                throw config_error(f, "overlaps window " + o.name);
            }
        }
    }
}

namespace {

std::complex<double> pulse_value(const PulseSpec& p, double t)
{
    double amp = p.peak();
    if (p.shape == PulseShape::gaussian) {
        const double x = (t - p.center_us()) / p.sigma_us();
        amp *= std::exp(-0.5 * x * x);
    } else if (p.shape == PulseShape::hann) {
        const double s = std::sin(pi * (t - p.start_us) / p.duration_us);
        amp *= s * s;
    }
    const double phase =
        p.phase_rad - two_pi * p.detuning_mhz * (t - p.start_us);
    return std::polar(amp, phase);
}

} // namespace

std::complex<double> envelope_at(const SequenceSpec& seq, double t_us)
{
    return envelope_limit(seq, t_us, Side::right);
}

std::complex<double> envelope_limit(const SequenceSpec& seq, double t_us,
                                    Side side)
{
    for (const auto& p : seq.pulses) {
        const bool inside = side == Side::right
                                ? (t_us >= p.start_us && t_us < p.end_us())
                                : (t_us > p.start_us && t_us <= p.end_us());
        if (inside) {
            return pulse_value(p, t_us);
        }
    }
    return {0.0, 0.0};
}

/* -------------------------------------------------------------------- */
/* JSON                                                                  */
/* -------------------------------------------------------------------- */

json hole_to_json(const HoleSpec& h)
{
    json j;
    j["center_mhz"] = h.center_mhz;
    j["width_fwhm_mhz"] = h.width_fwhm_mhz;
    j["depth"] = h.depth;
    j["shape"] = to_string(h.shape);
    return j;
}

HoleSpec hole_from_json(const json& j, const std::string& where)
{
    reject_unknown(j, {"center_mhz", "width_fwhm_mhz", "depth", "shape"},
                   where);
    HoleSpec h;
    h.center_mhz = optional_field(j, "center_mhz", 0.0, where);
    h.width_fwhm_mhz = required<double>(j, "width_fwhm_mhz", where);
    h.depth = required<double>(j, "depth", where);
    h.shape = qualified(where + ".shape", [&] {
        return hole_shape_from_string(
            optional_field<std::string>(j, "shape", "lorentzian", where));
    });
    return h;
}

std::string serialize(const SequenceSpec& seq)
{
    json j;
    j["version"] = 1;
    json pulses = json::array();
    for (const auto& p : seq.pulses) {
        json jp;
        jp["role"] = to_string(p.role);
        jp["start_us"] = p.start_us;
        jp["duration_us"] = p.duration_us;
        if (p.area_rad) {
            jp["area_rad"] = *p.area_rad;
        }
        if (p.peak_rabi) {
            jp["peak_rabi"] = *p.peak_rabi;
        }
        jp["phase_rad"] = p.phase_rad;
        jp["detuning_mhz"] = p.detuning_mhz;
        jp["shape"] = to_string(p.shape);
        pulses.push_back(jp);
    }
    j["pulses"] = pulses;
    if (seq.hole) {
        j["hole"] = hole_to_json(*seq.hole);
    }
    j["density_scale"] = seq.density_scale;
    json windows = json::object();
    for (const auto& w : seq.windows) {
        windows[w.name] = json::array({w.start_us, w.end_us});
    }
    j["windows"] = windows;
    if (!seq.metadata.empty()) {
        j["metadata"] = seq.metadata;
    }
    /* max_digits10 output keeps the round trip exact */
    return j.dump(2);
}

SequenceSpec sequence_from_json(const json& j)
{
    const std::string where = "sequence";
    reject_unknown(j,
                   {"version", "pulses", "hole", "density_scale", "windows",
                    "metadata"},
                   where);
    const int version = required<int>(j, "version", where);
    if (version != 1) {
        throw config_error("sequence.version", "unsupported version " +
                                                   std::to_string(version));
    }
    SequenceSpec seq;
    const json& pulses = j.contains("pulses") ? j.at("pulses") : json::array();
    if (!pulses.is_array()) {
        throw config_error("sequence.pulses", "expected an array");
    }
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const std::string pw = "sequence.pulses[" + std::to_string(i) + "]";
        const json& jp = pulses[i];
        reject_unknown(jp,
                       {"role", "start_us", "duration_us", "area_rad",
                        "peak_rabi", "phase_rad", "detuning_mhz", "shape"},
                       pw);
        PulseSpec p;
        p.role = qualified(pw + ".role", [&] {
            return pulse_role_from_string(
                required<std::string>(jp, "role", pw));
        });
        p.start_us = required<double>(jp, "start_us", pw);
        p.duration_us = required<double>(jp, "duration_us", pw);
        if (jp.contains("area_rad")) {
            p.area_rad = required<double>(jp, "area_rad", pw);
        }
        if (jp.contains("peak_rabi")) {
            p.peak_rabi = required<double>(jp, "peak_rabi", pw);
        }
        p.phase_rad = optional_field(jp, "phase_rad", 0.0, pw);
        p.detuning_mhz = optional_field(jp, "detuning_mhz", 0.0, pw);
        p.shape = qualified(pw + ".shape", [&] {
            return pulse_shape_from_string(
                optional_field<std::string>(jp, "shape", "rect", pw));
        });
        seq.pulses.push_back(p);
    }
    if (j.contains("hole") && !j.at("hole").is_null()) {
        seq.hole = hole_from_json(j.at("hole"), "sequence.hole");
    }
    seq.density_scale = optional_field(j, "density_scale", 1.0, where);
    if (j.contains("windows")) {
        const json& jw = j.at("windows");
        if (!jw.is_object()) {
            throw config_error("sequence.windows",
                               "expected an object of [start, end] pairs");
        }
        for (auto it = jw.begin(); it != jw.end(); ++it) {
            const json& pair = it.value();
            if (!pair.is_array() || pair.size() != 2 ||
                !pair[0].is_number() || !pair[1].is_number()) {
                throw config_error("sequence.windows." + it.key(),
                                   "expected [start_us, end_us]");
            }
            seq.windows.push_back(
                {it.key(), pair[0].get<double>(), pair[1].get<double>()});
        }
    }
    if (j.contains("metadata")) {
        seq.metadata = required<std::map<std::string, double>>(
            j, "metadata", where);
    }
    seq.validate();
    return seq;
}

SequenceSpec parse_sequence(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error("sequence", e.what());
    }
    return sequence_from_json(j);
}

/* -------------------------------------------------------------------- */
/* presets                                                               */
/* -------------------------------------------------------------------- */

namespace {

const std::vector<std::string> k_presets = {
    "fig2_conventional", "fig2_slowlight", "fig3a_sweep_point",
    "fig4a_twopulse", "fig4b_threepulse"};

PulseSpec make_pulse(PulseRole role, double start, double duration,
                     double area, PulseShape shape)
{
    PulseSpec p;
    p.role = role;
    p.start_us = start;
    p.duration_us = duration;
    p.area_rad = area;
    p.shape = shape;
    return p;
}

void add_preparation(SequenceSpec& seq, const PresetParameters& params,
                     bool slow_light)
{
    if (slow_light) {
        seq.hole = params.hole;
        seq.density_scale = params.slow_density;
    } else {
        seq.density_scale = params.conventional_density;
    }
    /* repump R, C and dummy H timings; recorded, not simulated */
    seq.metadata["repump_r_duration_us"] = 5000.0;
    seq.metadata["repump_c_duration_us"] = 5000.0;
    if (slow_light) {
        seq.metadata["dummy_h_duration_us"] = 600.0;
    }
}

} // namespace

std::vector<std::string> preset_names() { return k_presets; }

SequenceSpec two_pulse_sequence(const PresetParameters& params,
                                bool slow_light)
{
    SequenceSpec seq;
    const PulseSpec data =
        make_pulse(PulseRole::data, 0.0, params.data_duration_us,
                   params.data_area, params.shape);
    const PulseSpec read =
        make_pulse(PulseRole::read, params.separation_us,
                   params.read_duration_us, params.read_area, params.shape);
    seq.pulses = {data, read};
    add_preparation(seq, params, slow_light);

    /* echoes follow the pulse centres: 2 t_R - t_D, then one more gap */
    const double gap = read.center_us() - data.center_us();
    const double delay = slow_light ? params.expected_delay_us : 0.0;
    const double echo1 = read.center_us() + gap + delay;
    const double echo2 = echo1 + gap;
    const double open = echo1 - 0.3 * gap;
    const double half = 0.5 * gap;
    seq.windows = {
        {"data", 0.0, read.start_us},
        {"read", read.start_us, open},
        {"echo1", open, echo1 + half},
        {"echo2", echo1 + half, echo2 + half},
    };
    return seq;
}

SequenceSpec three_pulse_sequence(const PresetParameters& params,
                                  bool slow_light)
{
    SequenceSpec seq;
    /* the READ of the two-pulse run split into two identical pulses */
    const double split = 0.5 * params.read_duration_us;
    const double area = 0.5 * params.read_area;
    const PulseSpec data =
        make_pulse(PulseRole::data, 0.0, params.data_duration_us,
                   params.data_area, params.shape);
    const PulseSpec write = make_pulse(
        PulseRole::write, params.three_pulse_t_us, split, area, params.shape);
    const PulseSpec read = make_pulse(
        PulseRole::read, params.three_pulse_t_us + params.three_pulse_t_r_us,
        split, area, params.shape);
    seq.pulses = {data, write, read};
    add_preparation(seq, params, slow_light);

    const double gap = write.center_us() - data.center_us();
    const double delay = slow_light ? params.expected_delay_us : 0.0;
    const double echo = read.center_us() + gap + delay;
    const double open = echo - 0.3 * gap;
    seq.windows = {
        {"data", 0.0, write.start_us},
        {"write", write.start_us, read.start_us},
        {"read", read.start_us, open},
        {"echo1", open, echo + 0.5 * gap},
    };
    return seq;
}

SequenceSpec preset(const std::string& name, const PresetParameters& params)
{
    if (name == "fig2_conventional") {
        return two_pulse_sequence(params, false);
    }
    if (name == "fig2_slowlight" || name == "fig3a_sweep_point" ||
        name == "fig4a_twopulse") {
        return two_pulse_sequence(params, true);
    }
    if (name == "fig4b_threepulse") {
        return three_pulse_sequence(params, true);
    }
    std::string list;
    for (const auto& n : k_presets) {
        list += (list.empty() ? "" : ", ") + n;
    }
    throw config_error("preset", "unknown preset '" + name +
                                     "'; valid presets: " + list);
}

double suggested_t_end(const SequenceSpec& seq)
{
    double t = seq.last_pulse_end_us();
    for (const auto& w : seq.windows) {
        t = std::max(t, w.end_us);
    }
    return t;
}

SequenceSpec shift_echo_windows(SequenceSpec seq, double shift_us)
{
    const auto is_echo = [](const DetectionWindow& w) {
        return w.name.rfind("echo", 0) == 0;
    };
    double first = std::numeric_limits<double>::infinity();
    for (const auto& w : seq.windows) {
        if (is_echo(w)) {
            first = std::min(first, w.start_us);
        }
    }
    for (auto& w : seq.windows) {
        if (is_echo(w)) {
            w.start_us += shift_us;
            w.end_us += shift_us;
        } else if (std::abs(w.end_us - first) < 1e-9) {
            w.end_us += shift_us;
        }
    }
    return seq;
}

} // namespace echosim
