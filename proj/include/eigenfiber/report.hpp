#pragma once

#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "eigenfiber/fibers.hpp"

namespace eigenfiber {

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckResult {
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    double tolerance = 0.0;
};

/// Machine-readable run report. Field order is fixed; with the timestamp
/// suppressed two identical runs serialize byte for byte.
struct Report {
    int schema = 1;
    std::string command;
    std::map<std::string, std::string> config_echo;
    bool emit_timestamp = true;
    std::vector<std::pair<double, std::pair<int, double>>> spectrum;  // (lambda, (multiplicity, mass))
    std::vector<CheckResult> checks;
    nlohmann::ordered_json gasket;  // null unless the gasket command ran

    void set_spectrum(const DirectIntegralDecomposition& dec) {
        spectrum.clear();
        for (std::size_t a = 0; a < dec.fibers.size(); ++a)
            spectrum.emplace_back(dec.measure.atoms[a].lambda,
                                  std::make_pair(dec.fibers[a].dim(), dec.measure.atoms[a].mass));
    }

    void add_check(const std::string& name, double max_error, double tolerance) {
        checks.push_back({name, max_error <= tolerance, max_error, tolerance});
    }
    void add_flag(const std::string& name, bool pass) {
        checks.push_back({name, pass, pass ? 0.0 : 1.0, 0.5});
    }

    bool overall_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["schema"] = schema;
        j["tool"] = "eigenfiber";
        j["version"] = kToolVersion;
        j["command"] = command;
        if (emit_timestamp) {
            std::time_t now = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            j["timestamp"] = buf;
        }
        j["config"] = config_echo;
        auto& spec = j["spectrum"] = nlohmann::ordered_json::array();
        for (const auto& [lambda, rest] : spectrum) {
            nlohmann::ordered_json row;
            row["lambda"] = lambda;
            row["multiplicity"] = rest.first;
            row["mass"] = rest.second;
            spec.push_back(std::move(row));
        }
        auto& cj = j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json row;
            row["name"] = c.name;
            row["status"] = c.pass ? "pass" : "fail";
            row["max_error"] = c.max_error;
            row["tolerance"] = c.tolerance;
            cj.push_back(std::move(row));
        }
        if (!gasket.is_null()) j["gasket"] = gasket;
        j["status"] = overall_pass() ? "pass" : "fail";
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << to_json().dump(2) << '\n';
    }
};

}  // namespace eigenfiber
