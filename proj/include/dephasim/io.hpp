#pragma once

// Run-config files (JSON) and the CSV output contract. Complex numbers are
// always [re, im] pairs; CSV numbers are scientific notation with 17
// significant digits and LF line endings, so repeated runs are byte-identical.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dephasim/ensemble.hpp"
#include "dephasim/errors.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

struct RunConfig {
    std::optional<CentralAmplitudes> central;
    std::optional<std::vector<ModeParams>> modes;
    std::optional<EnsembleSpec> ensemble;
    PhononPrep phonons;
    TimeGrid grid;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
    if (!obj.is_object())
        throw SchemaError(path + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw SchemaError(path + ": unknown field \"" + item.key() + "\"");
    }
}

inline const json& require(const json& obj, const char* key,
                           const std::string& path) {
    if (!obj.is_object())
        throw SchemaError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(path + ": missing field \"" + key + "\"");
    return *it;
}

inline double number_at(const json& j, const std::string& path) {
    if (!j.is_number())
        throw SchemaError(path + ": expected a number");
    return j.get<double>();
}

inline Complex complex_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(path + ": expected a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::pair<double, double> range_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(path + ": expected a [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::uint64_t uint_at(const json& j, const std::string& path) {
    if (!j.is_number_unsigned())
        throw SchemaError(path + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline ModeParams parse_mode(const json& j, const std::string& path) {
    check_keys(j, {"omega0", "omega", "big_omega", "alpha", "beta", "lambda"}, path);
    ModeParams m;
    m.omega0 = number_at(require(j, "omega0", path), path + "/omega0");
    m.omega = number_at(require(j, "omega", path), path + "/omega");
    m.big_omega = number_at(require(j, "big_omega", path), path + "/big_omega");
    m.alpha = complex_at(require(j, "alpha", path), path + "/alpha");
    m.beta = complex_at(require(j, "beta", path), path + "/beta");
    m.lambda = complex_at(require(j, "lambda", path), path + "/lambda");
    return m;
}

inline CentralAmplitudes parse_central(const json& j, const std::string& path) {
    check_keys(j, {"c_up", "c_down"}, path);
    CentralAmplitudes c;
    c.c_up = complex_at(require(j, "c_up", path), path + "/c_up");
    c.c_down = complex_at(require(j, "c_down", path), path + "/c_down");
    return c;
}

inline PhononPrep parse_phonons(const json& j, const std::string& path) {
    check_keys(j, {"kind", "temperature"}, path);
    const json& kind = require(j, "kind", path);
    if (kind == "coherent") {
        if (j.contains("temperature"))
            throw SchemaError(path + ": temperature is only valid for kind thermal");
        return PhononPrep::coherent();
    }
    if (kind == "thermal")
        return PhononPrep::thermal(
            number_at(require(j, "temperature", path), path + "/temperature"));
    throw SchemaError(path + "/kind: expected \"coherent\" or \"thermal\"");
}

inline TimeGrid parse_time(const json& j, const std::string& path) {
    check_keys(j, {"start", "end", "points"}, path);
    TimeGrid grid;
    grid.t_start = number_at(require(j, "start", path), path + "/start");
    grid.t_end = number_at(require(j, "end", path), path + "/end");
    grid.points = uint_at(require(j, "points", path), path + "/points");
    if (grid.points == 0)
        throw SchemaError(path + "/points: must be >= 1");
    return grid;
}

inline EnsembleSpec parse_ensemble(const json& j, const std::string& path) {
    check_keys(j,
               {"n_modes", "omega0_range", "omega_range", "big_omega_range",
                "lambda_radius", "spin_init", "seed"},
               path);
    EnsembleSpec spec;
    spec.n_modes = uint_at(require(j, "n_modes", path), path + "/n_modes");
    if (j.contains("omega0_range"))
        spec.omega0_range = range_at(j["omega0_range"], path + "/omega0_range");
    if (j.contains("omega_range"))
        spec.omega_range = range_at(j["omega_range"], path + "/omega_range");
    if (j.contains("big_omega_range"))
        spec.big_omega_range =
            range_at(j["big_omega_range"], path + "/big_omega_range");
    if (j.contains("lambda_radius"))
        spec.lambda_radius = number_at(j["lambda_radius"], path + "/lambda_radius");
    if (j.contains("seed")) spec.seed = uint_at(j["seed"], path + "/seed");
    if (j.contains("spin_init")) {
        const json& si = j["spin_init"];
        const std::string si_path = path + "/spin_init";
        check_keys(si, {"kind", "epsilon_range", "temperature"}, si_path);
        const json& kind = require(si, "kind", si_path);
        if (kind == "uniform_bloch") {
            spec.spin_init = SpinInit::UniformBloch;
        } else if (kind == "polarized") {
            spec.spin_init = SpinInit::Polarized;
        } else if (kind == "gibbs_thermal") {
            spec.spin_init = SpinInit::GibbsThermal;
            spec.epsilon_range = range_at(require(si, "epsilon_range", si_path),
                                          si_path + "/epsilon_range");
            spec.spin_temperature = number_at(require(si, "temperature", si_path),
                                              si_path + "/temperature");
        } else {
            throw SchemaError(si_path + "/kind: expected \"uniform_bloch\", "
                                        "\"polarized\" or \"gibbs_thermal\"");
        }
    }
    return spec;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    detail::check_keys(j, {"central", "modes", "ensemble", "phonons", "time"}, "");
    const bool has_modes = j.contains("modes");
    const bool has_ensemble = j.contains("ensemble");
    if (has_modes == has_ensemble)
        throw SchemaError(": exactly one of \"modes\" / \"ensemble\" must be present");

    RunConfig config;
    if (j.contains("central"))
        config.central = detail::parse_central(j["central"], "/central");
    if (has_modes) {
        if (!config.central)
            throw SchemaError(": \"central\" is required with \"modes\"");
        const nlohmann::json& modes = j["modes"];
        if (!modes.is_array() || modes.empty())
            throw SchemaError("/modes: expected a non-empty array");
        std::vector<ModeParams> parsed;
        parsed.reserve(modes.size());
        for (std::size_t k = 0; k < modes.size(); ++k)
            parsed.push_back(
                detail::parse_mode(modes[k], "/modes/" + std::to_string(k)));
        config.modes = std::move(parsed);
    } else {
        config.ensemble = detail::parse_ensemble(j["ensemble"], "/ensemble");
    }
    config.phonons = detail::parse_phonons(detail::require(j, "phonons", ""),
                                           "/phonons");
    config.grid = detail::parse_time(detail::require(j, "time", ""), "/time");
    return config;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw SchemaError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    return parse_run_config(j);
}

// Materialize the bath: explicit modes verbatim, or a sampled ensemble with
// an optional seed override. A file-level "central" wins over the sampled one.
inline BathConfig materialize(const RunConfig& config,
                              std::optional<std::uint64_t> seed_override = {}) {
    BathConfig bath;
    if (config.modes) {
        bath.central = *config.central;
        bath.modes = *config.modes;
    } else {
        EnsembleSpec spec = *config.ensemble;
        if (seed_override) spec.seed = *seed_override;
        bath = sample_config(spec);
        if (config.central) bath.central = *config.central;
    }
    bath.phonons = config.phonons;
    return bath;
}

// 17 significant digits, negative zero canonicalized.
inline std::string format_sci(double x) {
    if (x == 0.0) x = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline void write_series_csv(std::ostream& os, const DecoherenceSeries& series) {
    os << "t,re_r,im_r,abs_r\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const Complex r = series.values[i];
        os << format_sci(series.grid.at(i)) << ',' << format_sci(r.real()) << ','
           << format_sci(r.imag()) << ',' << format_sci(std::abs(r)) << '\n';
    }
}

}  // namespace dephasim
