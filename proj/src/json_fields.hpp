#ifndef ECHOSIM_SRC_JSON_FIELDS_HPP
#define ECHOSIM_SRC_JSON_FIELDS_HPP

#include "echosim/common.hpp"
#include "echosim/sequence.hpp"

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

namespace echosim {

using json = nlohmann::ordered_json;

inline void reject_unknown(const json& j,
                           std::initializer_list<const char*> known,
                           const std::string& where)
{
    if (!j.is_object()) {
        throw config_error(where, "expected a JSON object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            ok = ok || it.key() == k;
        }
        if (!ok) {
            throw config_error(where + "." + it.key(), "unknown field");
        }
    }
}

template <typename T>
inline T required(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) {
        throw config_error(where + "." + key, "missing required field");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(where + "." + key, e.what());
    }
}

template <typename T>
inline T optional_field(const json& j, const char* key, T fallback,
                        const std::string& where)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(where + "." + key, e.what());
    }
}

/// Runs `parse`, re-reporting its config_error under `field`.
template <typename F>
inline auto qualified(const std::string& field, F&& parse)
{
    try {
        return parse();
    } catch (const config_error& e) {
        const std::string what = e.what();
        throw config_error(field, what.substr(e.field().size() + 2));
    }
}

/// Reads a "sequence" object; errors name fields under "sequence.".
SequenceSpec sequence_from_json(const json& j);

json hole_to_json(const HoleSpec& h);
HoleSpec hole_from_json(const json& j, const std::string& where);

} // namespace echosim

#endif
