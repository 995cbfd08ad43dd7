#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eigenfiber/fibers.hpp"
#include "eigenfiber/sierpinski.hpp"

namespace eigenfiber {

/// Flat key=value configuration. '#' starts a comment; keys are dotted
/// (e.g. omega.mode). Environment variables with the EIGENFIBER_ prefix
/// override file values: omega.mode <- EIGENFIBER_OMEGA_MODE.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::string env_name_for(const std::string& key) {
    std::string name = "EIGENFIBER_";
    for (char c : key) {
        if (c == '.')
            name += '_';
        else
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return name;
}

inline void apply_env_overrides(std::map<std::string, std::string>& kv,
                                const std::vector<std::string>& known_keys) {
    for (const auto& key : known_keys) {
        if (const char* v = std::getenv(env_name_for(key).c_str())) kv[key] = v;
    }
}

struct RunConfig {
    double tol_group = 1e-8;
    double tol_verify = 1e-9;
    double tol_decimate = 1e-8;

    std::vector<std::string> phi_set = {"one",     "identity",  "square",
                                        "exp_neg", "resolvent", "indicator"};
    double exp_neg_t = 1.0;
    double indicator_a = 0.0;
    double indicator_b = 1.0;

    int gasket_level = 2;
    int gasket_cap = kGasketLevelCap;

    std::uint64_t seed = 1;
    std::uint64_t rotate_seed = 0;

    std::string omega_mode = "geometric";  // geometric | file
    double omega_ratio = 0.5;

    bool emit_timestamp = true;
    bool dump_fibers = false;

    static std::vector<std::string> known_keys() {
        return {"tol.group",        "tol.verify",      "tol.decimate", "phi.set",
                "phi.exp_neg.t",    "phi.indicator.a", "phi.indicator.b",
                "gasket.level",     "gasket.cap",      "seed",         "rotate.seed",
                "omega.mode",       "omega.ratio",     "report.timestamp",
                "dump.fibers"};
    }

    static RunConfig from_map(const std::map<std::string, std::string>& kv) {
        RunConfig c;
        auto get_d = [&kv](const char* key, double& out) {
            auto it = kv.find(key);
            if (it == kv.end()) return;
            std::size_t pos = 0;
            out = std::stod(it->second, &pos);
            if (pos != it->second.size())
                throw std::invalid_argument(std::string("config: bad number for ") + key);
        };
        auto get_i = [&kv](const char* key, auto& out) {
            auto it = kv.find(key);
            if (it == kv.end()) return;
            out = static_cast<std::decay_t<decltype(out)>>(std::stoll(it->second));
        };
        auto get_b = [&kv](const char* key, bool& out) {
            auto it = kv.find(key);
            if (it == kv.end()) return;
            if (it->second == "true" || it->second == "1")
                out = true;
            else if (it->second == "false" || it->second == "0")
                out = false;
            else
                throw std::invalid_argument(std::string("config: bad boolean for ") + key);
        };
        get_d("tol.group", c.tol_group);
        get_d("tol.verify", c.tol_verify);
        get_d("tol.decimate", c.tol_decimate);
        get_d("phi.exp_neg.t", c.exp_neg_t);
        get_d("phi.indicator.a", c.indicator_a);
        get_d("phi.indicator.b", c.indicator_b);
        get_i("gasket.level", c.gasket_level);
        get_i("gasket.cap", c.gasket_cap);
        get_i("seed", c.seed);
        get_i("rotate.seed", c.rotate_seed);
        get_d("omega.ratio", c.omega_ratio);
        get_b("report.timestamp", c.emit_timestamp);
        get_b("dump.fibers", c.dump_fibers);
        if (auto it = kv.find("omega.mode"); it != kv.end()) c.omega_mode = it->second;
        if (auto it = kv.find("phi.set"); it != kv.end()) {
            c.phi_set.clear();
            std::istringstream names(it->second);
            std::string name;
            while (std::getline(names, name, ','))
                if (!name.empty()) c.phi_set.push_back(name);
        }
        c.validate();
        return c;
    }

    void validate() const {
        if (!(tol_group > 0.0) || !(tol_verify > 0.0) || !(tol_decimate > 0.0))
            throw std::invalid_argument("config: tolerances must be positive");
        if (gasket_level < 0 || gasket_level > gasket_cap)
            throw std::invalid_argument("config: gasket level exceeds cap (" +
                                        std::to_string(gasket_cap) + ")");
        if (omega_mode != "geometric" && omega_mode != "file")
            throw std::invalid_argument("config: omega.mode must be geometric or file");
        if (!(omega_ratio > 0.0) || omega_ratio >= 1.0)
            throw std::invalid_argument("config: omega.ratio must lie in (0, 1)");
    }

    std::map<std::string, std::string> echo() const {
        std::map<std::string, std::string> kv;
        auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        kv["tol.group"] = num(tol_group);
        kv["tol.verify"] = num(tol_verify);
        kv["tol.decimate"] = num(tol_decimate);
        std::string names;
        for (const auto& n : phi_set) names += (names.empty() ? "" : ",") + n;
        kv["phi.set"] = names;
        kv["phi.exp_neg.t"] = num(exp_neg_t);
        kv["phi.indicator.a"] = num(indicator_a);
        kv["phi.indicator.b"] = num(indicator_b);
        kv["gasket.level"] = std::to_string(gasket_level);
        kv["gasket.cap"] = std::to_string(gasket_cap);
        kv["seed"] = std::to_string(seed);
        kv["rotate.seed"] = std::to_string(rotate_seed);
        kv["omega.mode"] = omega_mode;
        kv["omega.ratio"] = num(omega_ratio);
        kv["report.timestamp"] = emit_timestamp ? "true" : "false";
        kv["dump.fibers"] = dump_fibers ? "true" : "false";
        return kv;
    }
};

/// The named multiplier set of the run configuration.
inline std::vector<std::pair<std::string, SpectralFunction>> make_phi_set(const RunConfig& c) {
    std::vector<std::pair<std::string, SpectralFunction>> out;
    for (const auto& name : c.phi_set) {
        if (name == "one") {
            out.emplace_back(name, [](double) { return cplx(1.0, 0.0); });
        } else if (name == "identity") {
            out.emplace_back(name, [](double s) { return cplx(s, 0.0); });
        } else if (name == "square") {
            out.emplace_back(name, [](double s) { return cplx(s * s, 0.0); });
        } else if (name == "exp_neg") {
            const double t = c.exp_neg_t;
            out.emplace_back(name, [t](double s) { return cplx(std::exp(-t * s), 0.0); });
        } else if (name == "resolvent") {
            out.emplace_back(name, [](double s) { return 1.0 / cplx(s, 1.0); });
        } else if (name == "indicator") {
            const double a = c.indicator_a, b = c.indicator_b;
            // closed interval: boundary atoms are included
            out.emplace_back(name, [a, b](double s) { return cplx(s >= a && s <= b ? 1.0 : 0.0, 0.0); });
        } else {
            throw std::invalid_argument("config: unknown multiplier '" + name + "'");
        }
    }
    return out;
}

}  // namespace eigenfiber
