// config.hpp: flat key=value run configuration

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bsshift/errors.hpp"
#include "bsshift/model.hpp"

namespace bsshift {

struct Tolerances {
    double quadrature{1e-8};   // transformed vs untransformed WKB quadrature, relative
    double eigensolve{1e-9};   // ||H v - lambda v|| / ||H||_max
    double root_find{1e-12};   // relative

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Everything a command needs; serializes to and from the key=value format.
struct RunConfig {
    ModelParams params{11.0, 1.0, 0.0, 60.0};
    int n_max{200};
    double n_mean{60.0};                 // photon-number centre of resonance pairs
    double g_min{0.0};
    double g_max{1.0};
    int g_steps{11};
    std::vector<int> k_list{6, 7, 8, 9, 10};
    Tolerances tolerances{};
    std::string output_dir{"out"};
    bool cache{true};
    double points_per_wavelength{8.0};
    int scan_points{101};

    void validate() const {
        try {
            params.validate();
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
        if (n_max < 1) throw ConfigError("n_max must be >= 1");
        if (!(n_mean >= 1.0)) throw ConfigError("n_mean must be >= 1");
        if (!(g_min < g_max)) throw ConfigError("g_min must be < g_max");
        if (g_min < 0.0) throw ConfigError("g_min must be >= 0");
        if (g_steps < 2) throw ConfigError("g_steps must be >= 2");
        for (int k : k_list)
            if (k < 0) throw ConfigError("k_list entries must be >= 0");
        if (!(tolerances.quadrature > 0 && tolerances.eigensolve > 0 && tolerances.root_find > 0))
            throw ConfigError("tolerances must be positive");
        if (!(points_per_wavelength > 2.0)) throw ConfigError("points_per_wavelength must be > 2");
        if (scan_points < 3) throw ConfigError("scan_points must be >= 3");
        if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    }

    /// Parameters with n_ref moved to the resonance window centre.
    [[nodiscard]] ModelParams resonance_params() const { return params.with_n_ref(n_mean); }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    double out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("bad number for '" + key + "': " + v);
    return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
    int out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("bad integer for '" + key + "': " + v);
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad switch for '" + key + "': " + v);
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_int(key, item));
    }
    return out;
}

} // namespace detail

/// Canonical ordered key/value view of a config (the serialization order).
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    using detail::format_double;
    std::string ks;
    for (std::size_t i = 0; i < c.k_list.size(); ++i) ks += (i ? "," : "") + std::to_string(c.k_list[i]);
    return {
        {"delta_e", format_double(c.params.delta_e)},
        {"hbar_omega0", format_double(c.params.hbar_omega0)},
        {"coupling_u", format_double(c.params.coupling_u)},
        {"n_ref", format_double(c.params.n_ref)},
        {"n_max", std::to_string(c.n_max)},
        {"n_mean", format_double(c.n_mean)},
        {"g_min", format_double(c.g_min)},
        {"g_max", format_double(c.g_max)},
        {"g_steps", std::to_string(c.g_steps)},
        {"k_list", ks},
        {"quad_tol", format_double(c.tolerances.quadrature)},
        {"eig_tol", format_double(c.tolerances.eigensolve)},
        {"root_tol", format_double(c.tolerances.root_find)},
        {"output_dir", c.output_dir},
        {"cache", c.cache ? "on" : "off"},
        {"points_per_wavelength", format_double(c.points_per_wavelength)},
        {"scan_points", std::to_string(c.scan_points)},
    };
}

[[nodiscard]] inline std::string serialize_config(const RunConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
    return out;
}

/// Parses key=value lines on top of `base`. '#' starts a comment; blank lines are ignored.
[[nodiscard]] inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
    RunConfig c = std::move(base);
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
        using namespace detail;
        if (key == "delta_e") c.params.delta_e = parse_double(key, val);
        else if (key == "hbar_omega0") c.params.hbar_omega0 = parse_double(key, val);
        else if (key == "coupling_u") c.params.coupling_u = parse_double(key, val);
        else if (key == "n_ref") c.params.n_ref = parse_double(key, val);
        else if (key == "n_max") c.n_max = parse_int(key, val);
        else if (key == "n_mean") c.n_mean = parse_double(key, val);
        else if (key == "g_min") c.g_min = parse_double(key, val);
        else if (key == "g_max") c.g_max = parse_double(key, val);
        else if (key == "g_steps") c.g_steps = parse_int(key, val);
        else if (key == "k_list") c.k_list = parse_int_list(key, val);
        else if (key == "quad_tol") c.tolerances.quadrature = parse_double(key, val);
        else if (key == "eig_tol") c.tolerances.eigensolve = parse_double(key, val);
        else if (key == "root_tol") c.tolerances.root_find = parse_double(key, val);
        else if (key == "output_dir") c.output_dir = val;
        else if (key == "cache") c.cache = parse_bool(key, val);
        else if (key == "points_per_wavelength") c.points_per_wavelength = parse_double(key, val);
        else if (key == "scan_points") c.scan_points = parse_int(key, val);
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

} // namespace bsshift
