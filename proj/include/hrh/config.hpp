// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "coherence.hpp"
#include "link_budget.hpp"
#include "montecarlo.hpp"
#include "tag.hpp"

extern char** environ;

namespace hrh {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    SlotFidelity mode = SlotFidelity::envelope;
    NoiseModel noise_model = NoiseModel::integrator;
    TagModel tag_model = TagModel::quadratic;
    std::optional<double> gamma2_db; // empty: derived from the link budget
    int samples_per_slot = 1024;
    int grid_points_per_unit = 4000;
    unsigned workers = 0;

    bool operator==(const RunConfig&) const = default;
};

struct ExperimentConfig {
    SystemParams system;
    TagParams tag;
    BetaMode beta_mode = BetaMode::series;
    Geometry geometry;
    FrameConfig frame;
    ImpairmentConfig impairments;
    double max_phase_drift = 0.39269908169872414;
    RunConfig run;

    bool operator==(const ExperimentConfig&) const = default;

    double helper_distance() const
    {
        return geometry.helper_distances.empty() ? geometry.rn_distance : geometry.helper_distances.front();
    }

    double tag_amplitude() const { return tag_input_amplitude(geometry.rn_distance, system, tag); }

    // Single-helper SNR at the third integrator for a helper at the tag range.
    double derived_gamma2() const
    {
        return integrator_snr(tag_amplitude(), geometry.rn_distance, frame.slot_duration, system, tag,
                              run.tag_model, beta_mode);
    }

    double gamma2() const { return run.gamma2_db ? db_to_linear(*run.gamma2_db) : derived_gamma2(); }

    Scenario scenario() const
    {
        Scenario s;
        s.frame = frame;
        s.gamma2 = gamma2();
        s.omega0 = system.omega();
        s.helper_distance = helper_distance();
        s.noise = run.noise_model;
        s.fidelity = run.mode;
        s.tag_model = run.tag_model;
        s.samples_per_slot = run.samples_per_slot;
        if (!geometry.helper_distances.empty()) {
            // Amplitudes relative to a helper at the tag range.
            for (double d : geometry.helper_distances)
                s.helper_amplitudes.push_back(geometry.rn_distance / d);
        }
        if (!geometry.lo_phases.empty()) {
            for (int m = 0; m < frame.helper_count; ++m) {
                const auto k = static_cast<std::size_t>(m);
                const double d = geometry.helper_distances.empty() ? geometry.rn_distance : geometry.helper_distances[k];
                s.initial_phases.push_back(Geometry::helper_phase(geometry.lo_phases[k], d, system.omega()));
            }
        }
        if (run.tag_model == TagModel::exact) {
            s.tag = std::make_shared<const TagTransfer>(tag);
            s.tag_amplitude = tag_amplitude();
        }
        return s;
    }

    void validate() const
    {
        try {
            system.validate();
            tag.validate();
            frame.validate();
            geometry.validate(frame.helper_count);
            impairments.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid configuration: ") + e.what());
        }
        if (!(max_phase_drift > 0.0))
            throw ConfigError("invalid configuration: impairments.max_phase_drift_rad must be positive");
        if (run.trials == 0)
            throw ConfigError("invalid configuration: run.trials must be positive");
        if (run.samples_per_slot < 1024)
            throw ConfigError("invalid configuration: run.samples_per_slot must be >= 1024");
        if (run.grid_points_per_unit < 16)
            throw ConfigError("invalid configuration: run.grid_points_per_unit must be >= 16");
        if (run.tag_model == TagModel::exact && run.mode != SlotFidelity::waveform)
            throw ConfigError("invalid configuration: run.tag_model = exact requires run.mode = waveform");
        if (!(gamma2() > 0.0) || !std::isfinite(gamma2()))
            throw ConfigError("invalid configuration: derived gamma2 must be positive and finite");
    }
};

inline const char* preset_xband_sto2020 = R"(; X-band harmonic radar system with a Schottky-diode tag.

[system]
frequency_hz = 9.3e9
transmit_power_w = 10
gain_tx_dbi = 15
gain_rx_dbi = 15
resistance_tx_ohm = 50
resistance_rx_ohm = 50
bandwidth_hz = 125e3
noise_figure_db = 2.5
noise_temperature_k = 290
noise_formula = excess

[tag]
saturation_current_a = 5e-6
ideality = 1.05
thermal_voltage_v = 0.026
fundamental_resistance_ohm = 132
harmonic_resistance_ohm = 146
input_efficiency = 1
output_efficiency = 1
gain_fundamental_dbi = 2.2
gain_harmonic_dbi = 3.15
beta_mode = series

[geometry]
rn_distance_m = 15

[frame]
helper_count = 4
slot_duration_s = 1e-6
ranging_duration_s = 0

[impairments]
ppm = 0
delay_error = false
frequency_draw = uniform
max_phase_drift_rad = 0.39269908169872414

[run]
trials = 10000
seed = 1
mode = envelope
noise_model = integrator
tag_model = quadratic
gamma2_db = derived
samples_per_slot = 1024
grid_points_per_unit = 4000
workers = 0
)";

namespace detail {

using boost::property_tree::ptree;

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text, const std::string& field)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (text.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field " + field + ": expected a number, got '" + text + "'");
    }
}

inline std::uint64_t parse_unsigned(const std::string& text, const std::string& field)
{
    try {
        std::size_t used = 0;
        if (text.find('-') != std::string::npos)
            throw std::invalid_argument(text);
        const unsigned long long v = std::stoull(text, &used);
        if (text.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field " + field + ": expected a non-negative integer, got '" + text + "'");
    }
}

inline bool parse_bool(const std::string& text, const std::string& field)
{
    if (text == "true" || text == "1" || text == "on" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "off" || text == "no")
        return false;
    throw ConfigError("field " + field + ": expected true or false, got '" + text + "'");
}

inline std::vector<double> parse_list(const std::string& text, const std::string& field)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (item.find_first_not_of(" \t") != std::string::npos)
            out.push_back(parse_double(item, field));
    return out;
}

inline std::string join_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k)
        s += (k ? "," : "") + format_double(v[k]);
    return s;
}

class Reader {
public:
    explicit Reader(const ptree& t) : t_(t) {}

    std::optional<std::string> find(const std::string& key) const
    {
        auto v = t_.get_optional<std::string>(ptree::path_type(key, '.'));
        if (!v)
            return std::nullopt;
        std::string s = *v;
        const auto b = s.find_first_not_of(" \t\"");
        const auto e = s.find_last_not_of(" \t\"");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    std::string text(const std::string& key) const
    {
        auto v = find(key);
        if (!v)
            throw ConfigError("missing field " + key);
        return *v;
    }

    double number(const std::string& key) const { return parse_double(text(key), key); }

    // Gains may be given either linear (key) or in dBi (key_dbi).
    double gain(const std::string& key) const
    {
        if (auto v = find(key))
            return parse_double(*v, key);
        if (auto v = find(key + "_dbi"))
            return db_to_linear(parse_double(*v, key + "_dbi"));
        throw ConfigError("missing field " + key + "_dbi");
    }

    template <class T>
    T choice(const std::string& key, std::initializer_list<std::pair<const char*, T>> options,
             std::optional<T> fallback = std::nullopt) const
    {
        auto v = find(key);
        if (!v) {
            if (fallback)
                return *fallback;
            throw ConfigError("missing field " + key);
        }
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (*v == name)
                return value;
            allowed += std::string(allowed.empty() ? "" : "|") + name;
        }
        throw ConfigError("field " + key + ": expected " + allowed + ", got '" + *v + "'");
    }

private:
    const ptree& t_;
};

inline ExperimentConfig from_tree(const ptree& t)
{
    const Reader r(t);
    ExperimentConfig c;

    c.system.frequency = r.number("system.frequency_hz");
    c.system.transmit_power = r.number("system.transmit_power_w");
    c.system.gain_tx = r.gain("system.gain_tx");
    c.system.gain_rx = r.gain("system.gain_rx");
    c.system.resistance_tx = r.number("system.resistance_tx_ohm");
    c.system.resistance_rx = r.number("system.resistance_rx_ohm");
    c.system.bandwidth = r.number("system.bandwidth_hz");
    c.system.noise_figure_db = r.number("system.noise_figure_db");
    c.system.noise_temperature = r.number("system.noise_temperature_k");
    c.system.noise_formula = r.choice<NoiseFormula>(
        "system.noise_formula", {{"excess", NoiseFormula::excess}, {"total", NoiseFormula::total}},
        NoiseFormula::excess);

    c.tag.saturation_current = r.number("tag.saturation_current_a");
    c.tag.ideality = r.number("tag.ideality");
    c.tag.thermal_voltage = r.number("tag.thermal_voltage_v");
    c.tag.fundamental_resistance = r.number("tag.fundamental_resistance_ohm");
    c.tag.harmonic_resistance = r.number("tag.harmonic_resistance_ohm");
    c.tag.input_efficiency = r.number("tag.input_efficiency");
    c.tag.output_efficiency = r.number("tag.output_efficiency");
    c.tag.gain_fundamental = r.gain("tag.gain_fundamental");
    c.tag.gain_harmonic = r.gain("tag.gain_harmonic");
    c.beta_mode = r.choice<BetaMode>("tag.beta_mode",
                                     {{"series", BetaMode::series}, {"simplified", BetaMode::simplified}},
                                     BetaMode::series);

    c.geometry.rn_distance = r.number("geometry.rn_distance_m");
    if (auto v = r.find("geometry.helper_distances_m"))
        c.geometry.helper_distances = parse_list(*v, "geometry.helper_distances_m");
    if (auto v = r.find("geometry.lo_phases_rad"))
        c.geometry.lo_phases = parse_list(*v, "geometry.lo_phases_rad");

    c.frame.helper_count = static_cast<int>(parse_unsigned(r.text("frame.helper_count"), "frame.helper_count"));
    c.frame.slot_duration = r.number("frame.slot_duration_s");
    if (auto v = r.find("frame.ranging_duration_s"))
        c.frame.ranging_duration = parse_double(*v, "frame.ranging_duration_s");

    if (auto v = r.find("impairments.ppm"))
        c.impairments.ppm = parse_double(*v, "impairments.ppm");
    if (auto v = r.find("impairments.delay_error"))
        c.impairments.delay_error = parse_bool(*v, "impairments.delay_error");
    c.impairments.draw = r.choice<FrequencyDraw>(
        "impairments.frequency_draw", {{"uniform", FrequencyDraw::uniform}, {"fixed", FrequencyDraw::fixed}},
        FrequencyDraw::uniform);
    if (auto v = r.find("impairments.max_phase_drift_rad"))
        c.max_phase_drift = parse_double(*v, "impairments.max_phase_drift_rad");

    if (auto v = r.find("run.trials"))
        c.run.trials = parse_unsigned(*v, "run.trials");
    if (auto v = r.find("run.seed"))
        c.run.seed = parse_unsigned(*v, "run.seed");
    c.run.mode = r.choice<SlotFidelity>("run.mode",
                                        {{"envelope", SlotFidelity::envelope}, {"waveform", SlotFidelity::waveform}},
                                        SlotFidelity::envelope);
    c.run.noise_model = r.choice<NoiseModel>(
        "run.noise_model",
        {{"integrator", NoiseModel::integrator}, {"phase-law", NoiseModel::phase_law}, {"none", NoiseModel::none}},
        NoiseModel::integrator);
    c.run.tag_model = r.choice<TagModel>("run.tag_model",
                                         {{"quadratic", TagModel::quadratic}, {"exact", TagModel::exact}},
                                         TagModel::quadratic);
    if (auto v = r.find("run.gamma2_db"); v && *v != "derived")
        c.run.gamma2_db = parse_double(*v, "run.gamma2_db");
    if (auto v = r.find("run.samples_per_slot"))
        c.run.samples_per_slot = static_cast<int>(parse_unsigned(*v, "run.samples_per_slot"));
    if (auto v = r.find("run.grid_points_per_unit"))
        c.run.grid_points_per_unit = static_cast<int>(parse_unsigned(*v, "run.grid_points_per_unit"));
    if (auto v = r.find("run.workers"))
        c.run.workers = static_cast<unsigned>(parse_unsigned(*v, "run.workers"));

    c.validate();
    return c;
}

inline ptree to_tree(const ExperimentConfig& c)
{
    ptree t;
    auto put = [&t](const std::string& key, const std::string& value) { t.put(ptree::path_type(key, '.'), value); };
    auto num = [&](const std::string& key, double v) { put(key, format_double(v)); };

    num("system.frequency_hz", c.system.frequency);
    num("system.transmit_power_w", c.system.transmit_power);
    num("system.gain_tx", c.system.gain_tx);
    num("system.gain_rx", c.system.gain_rx);
    num("system.resistance_tx_ohm", c.system.resistance_tx);
    num("system.resistance_rx_ohm", c.system.resistance_rx);
    num("system.bandwidth_hz", c.system.bandwidth);
    num("system.noise_figure_db", c.system.noise_figure_db);
    num("system.noise_temperature_k", c.system.noise_temperature);
    put("system.noise_formula", c.system.noise_formula == NoiseFormula::excess ? "excess" : "total");

    num("tag.saturation_current_a", c.tag.saturation_current);
    num("tag.ideality", c.tag.ideality);
    num("tag.thermal_voltage_v", c.tag.thermal_voltage);
    num("tag.fundamental_resistance_ohm", c.tag.fundamental_resistance);
    num("tag.harmonic_resistance_ohm", c.tag.harmonic_resistance);
    num("tag.input_efficiency", c.tag.input_efficiency);
    num("tag.output_efficiency", c.tag.output_efficiency);
    num("tag.gain_fundamental", c.tag.gain_fundamental);
    num("tag.gain_harmonic", c.tag.gain_harmonic);
    put("tag.beta_mode", c.beta_mode == BetaMode::series ? "series" : "simplified");

    num("geometry.rn_distance_m", c.geometry.rn_distance);
    if (!c.geometry.helper_distances.empty())
        put("geometry.helper_distances_m", join_list(c.geometry.helper_distances));
    if (!c.geometry.lo_phases.empty())
        put("geometry.lo_phases_rad", join_list(c.geometry.lo_phases));

    put("frame.helper_count", std::to_string(c.frame.helper_count));
    num("frame.slot_duration_s", c.frame.slot_duration);
    num("frame.ranging_duration_s", c.frame.ranging_duration);

    num("impairments.ppm", c.impairments.ppm);
    put("impairments.delay_error", c.impairments.delay_error ? "true" : "false");
    put("impairments.frequency_draw", c.impairments.draw == FrequencyDraw::uniform ? "uniform" : "fixed");
    num("impairments.max_phase_drift_rad", c.max_phase_drift);

    put("run.trials", std::to_string(c.run.trials));
    put("run.seed", std::to_string(c.run.seed));
    put("run.mode", c.run.mode == SlotFidelity::envelope ? "envelope" : "waveform");
    put("run.noise_model", c.run.noise_model == NoiseModel::integrator  ? "integrator"
                           : c.run.noise_model == NoiseModel::phase_law ? "phase-law"
                                                                        : "none");
    put("run.tag_model", c.run.tag_model == TagModel::quadratic ? "quadratic" : "exact");
    put("run.gamma2_db", c.run.gamma2_db ? format_double(*c.run.gamma2_db) : "derived");
    put("run.samples_per_slot", std::to_string(c.run.samples_per_slot));
    put("run.grid_points_per_unit", std::to_string(c.run.grid_points_per_unit));
    put("run.workers", std::to_string(c.run.workers));
    return t;
}

inline ptree read_ini(std::istream& in, const std::string& name)
{
    ptree t;
    try {
        boost::property_tree::ini_parser::read_ini(in, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("parse error in " + name + " line " + std::to_string(e.line()) + ": " + e.message());
    }
    return t;
}

inline ptree preset_tree(const std::string& name)
{
    if (name != "xband-sto2020")
        throw ConfigError("unknown preset '" + name + "'");
    std::istringstream in(preset_xband_sto2020);
    return read_ini(in, "preset " + name);
}

// Overlays every leaf of src onto dst.
inline void overlay(ptree& dst, const ptree& src)
{
    for (const auto& [section, body] : src) {
        if (body.empty()) {
            dst.put(ptree::path_type(section, '.'), body.data());
            continue;
        }
        for (const auto& [key, value] : body)
            dst.put(ptree::path_type(section + "." + key, '.'), value.data());
    }
}

// HRH_<SECTION>__<KEY>=value overrides a config field.
inline void apply_environment(ptree& t, const std::string& prefix = "HRH_")
{
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        if (entry.rfind(prefix, 0) != 0)
            continue;
        const auto eq = entry.find('=');
        const auto sep = entry.find("__", prefix.size());
        if (eq == std::string::npos || sep == std::string::npos || sep > eq)
            continue;
        auto lower = [](std::string s) {
            for (char& ch : s)
                ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            return s;
        };
        const std::string section = lower(entry.substr(prefix.size(), sep - prefix.size()));
        const std::string key = lower(entry.substr(sep + 2, eq - sep - 2));
        t.put(ptree::path_type(section + "." + key, '.'), entry.substr(eq + 1));
    }
}

inline ptree resolve(ptree t)
{
    if (auto base = t.get_optional<std::string>(ptree::path_type("base.preset", '.'))) {
        ptree merged = preset_tree(*base);
        t.erase("base");
        overlay(merged, t);
        return merged;
    }
    return t;
}

} // namespace detail

// Parses INI text.  A [base] section with preset = NAME starts from a bundled
// preset; every other field then overrides it.
inline ExperimentConfig parse_config(const std::string& text, bool use_environment = false)
{
    std::istringstream in(text);
    auto t = detail::resolve(detail::read_ini(in, "config"));
    if (use_environment)
        detail::apply_environment(t);
    return detail::from_tree(t);
}

inline ExperimentConfig load_config(const std::string& path, bool use_environment = false)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    auto t = detail::resolve(detail::read_ini(in, path));
    if (use_environment)
        detail::apply_environment(t);
    return detail::from_tree(t);
}

inline ExperimentConfig preset_config(const std::string& name, bool use_environment = false)
{
    auto t = detail::preset_tree(name);
    if (use_environment)
        detail::apply_environment(t);
    return detail::from_tree(t);
}

inline std::string emit_config(const ExperimentConfig& c)
{
    std::ostringstream out;
    boost::property_tree::ini_parser::write_ini(out, detail::to_tree(c));
    return out.str();
}

inline nlohmann::json config_to_json(const ExperimentConfig& c)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, body] : detail::to_tree(c))
        for (const auto& [key, value] : body)
            j[section][key] = value.data();
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    detail::ptree t;
    if (!j.is_object())
        throw ConfigError("JSON config must be an object of sections");
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object())
            throw ConfigError("JSON section " + section + " must be an object");
        for (const auto& [key, value] : body.items()) {
            std::string text;
            if (value.is_string())
                text = value.get<std::string>();
            else if (value.is_boolean())
                text = value.get<bool>() ? "true" : "false";
            else if (value.is_number_integer() || value.is_number_unsigned())
                text = value.dump();
            else if (value.is_number())
                text = detail::format_double(value.get<double>());
            else
                throw ConfigError("JSON field " + section + "." + key + " must be a scalar");
            t.put(detail::ptree::path_type(section + "." + key, '.'), text);
        }
    }
    return detail::from_tree(detail::resolve(t));
}

} // namespace hrh
