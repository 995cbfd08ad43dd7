#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eigenfiber/fibers.hpp"
#include "eigenfiber/kernel.hpp"
#include "eigenfiber/space.hpp"

namespace eigenfiber {

struct ParseError : std::runtime_error {
    ParseError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, const std::string& file, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "cannot parse number '" + s + "'");
    }
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace detail

/// Space file: one "vertex_id<TAB>measure" line per vertex. Duplicate ids
/// and nonpositive measures are rejected.
inline SpacePtr load_space(const std::string& path) {
    std::vector<std::string> ids;
    std::vector<double> measure;
    int lineno = 0;
    for (const std::string& raw : detail::read_lines(path)) {
        ++lineno;
        const std::string line = detail::strip(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_tabs(raw);
        if (fields.size() != 2)
            throw ParseError(path, lineno, "expected 'vertex_id<TAB>measure'");
        const std::string id = detail::strip(fields[0]);
        const double m = detail::parse_double(detail::strip(fields[1]), path, lineno);
        if (!(m > 0.0))
            throw ParseError(path, lineno, "measure must be positive (vertex '" + id + "')");
        for (const auto& seen : ids)
            if (seen == id) throw ParseError(path, lineno, "duplicate vertex id '" + id + "'");
        ids.push_back(id);
        measure.push_back(m);
    }
    if (ids.empty()) throw ParseError(path + ": no vertices");
    return make_space(std::move(ids), std::move(measure));
}

/// Kernel file: "x<TAB>y<TAB>re[<TAB>im]". Entries with y < x may be
/// omitted; they are completed by Hermitian symmetry. Conflicting duplicates
/// and Hermitian violations are rejected.
inline Kernel load_kernel(const std::string& path, const SpacePtr& space) {
    std::vector<KernelEntry> entries;
    int lineno = 0;
    for (const std::string& raw : detail::read_lines(path)) {
        ++lineno;
        const std::string line = detail::strip(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_tabs(raw);
        if (fields.size() != 3 && fields.size() != 4)
            throw ParseError(path, lineno, "expected 'x<TAB>y<TAB>re[<TAB>im]'");
        const int x = space->index_of(detail::strip(fields[0]));
        const int y = space->index_of(detail::strip(fields[1]));
        const double re = detail::parse_double(detail::strip(fields[2]), path, lineno);
        const double im =
            fields.size() == 4 ? detail::parse_double(detail::strip(fields[3]), path, lineno) : 0.0;
        entries.push_back({x, y, cplx(re, im)});
    }
    try {
        return Kernel::from_entries(space, entries, true);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string(path) + ": " + e.what());
    }
}

/// Graph file: "x<TAB>y<TAB>b" with b > 0, undirected, no self-loops.
inline GraphSpec load_graph(const std::string& path, const SpacePtr& space) {
    std::vector<std::tuple<int, int, double>> edges;
    int lineno = 0;
    for (const std::string& raw : detail::read_lines(path)) {
        ++lineno;
        const std::string line = detail::strip(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_tabs(raw);
        if (fields.size() != 3)
            throw ParseError(path, lineno, "expected 'x<TAB>y<TAB>b'");
        const int x = space->index_of(detail::strip(fields[0]));
        const int y = space->index_of(detail::strip(fields[1]));
        const double b = detail::parse_double(detail::strip(fields[2]), path, lineno);
        edges.emplace_back(x, y, b);
    }
    try {
        return GraphSpec(space, std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string(path) + ": " + e.what());
    }
}

/// Omega file: "vertex_id<TAB>omega" with omega >= 0; every vertex covered
/// exactly once.
inline std::vector<double> load_omega(const std::string& path, const SpacePtr& space) {
    std::vector<double> omega(static_cast<std::size_t>(space->size()),
                              std::numeric_limits<double>::quiet_NaN());
    int lineno = 0;
    for (const std::string& raw : detail::read_lines(path)) {
        ++lineno;
        const std::string line = detail::strip(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_tabs(raw);
        if (fields.size() != 2)
            throw ParseError(path, lineno, "expected 'vertex_id<TAB>omega'");
        const int x = space->index_of(detail::strip(fields[0]));
        if (!std::isnan(omega[static_cast<std::size_t>(x)]))
            throw ParseError(path, lineno, "duplicate omega for vertex '" + space->id(x) + "'");
        const double w = detail::parse_double(detail::strip(fields[1]), path, lineno);
        if (w < 0.0) throw ParseError(path, lineno, "omega must be nonnegative");
        omega[static_cast<std::size_t>(x)] = w;
    }
    for (int i = 0; i < space->size(); ++i)
        if (std::isnan(omega[static_cast<std::size_t>(i)]))
            throw ParseError(path + ": omega missing vertex '" + space->id(i) + "'");
    return omega;
}

/// Self-contained decomposition dump (JSON): space, kernel entries, atoms
/// with masses and fiber bases. Two dumps of the same kernel are the inputs
/// of the uniqueness comparison.
inline nlohmann::ordered_json decomposition_to_json(const DirectIntegralDecomposition& dec) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "decomposition";
    j["space"]["ids"] = dec.space()->ids();
    j["space"]["measure"] = dec.space()->measures();
    auto& kj = j["kernel"] = nlohmann::ordered_json::array();
    for (const auto& e : dec.op.entries())
        kj.push_back({e.row, e.col, e.value.real(), e.value.imag()});
    auto& atoms = j["atoms"] = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        nlohmann::ordered_json aj;
        aj["lambda"] = dec.measure.atoms[a].lambda;
        aj["mass"] = dec.measure.atoms[a].mass;
        auto& basis = aj["basis"] = nlohmann::ordered_json::array();
        for (const auto& phi : dec.fibers[a].basis) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (const cplx& v : phi.values) row.push_back({v.real(), v.imag()});
            basis.push_back(std::move(row));
        }
        atoms.push_back(std::move(aj));
    }
    return j;
}

inline void save_decomposition(const DirectIntegralDecomposition& dec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << decomposition_to_json(dec).dump(2) << '\n';
}

inline DirectIntegralDecomposition load_decomposition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": invalid JSON (" + e.what() + ")");
    }
    try {
        if (j.at("kind") != "decomposition") throw std::runtime_error("not a decomposition dump");
        auto space = make_space(j.at("space").at("ids").get<std::vector<std::string>>(),
                                j.at("space").at("measure").get<std::vector<double>>());
        std::vector<KernelEntry> entries;
        for (const auto& e : j.at("kernel"))
            entries.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                               cplx(e.at(2).get<double>(), e.at(3).get<double>())});
        Kernel k = Kernel::from_entries(space, entries, false);
        DirectIntegralDecomposition dec{k, {}, {}};
        for (const auto& aj : j.at("atoms")) {
            Fiber fiber;
            fiber.lambda = aj.at("lambda").get<double>();
            for (const auto& row : aj.at("basis")) {
                std::vector<cplx> vals;
                vals.reserve(row.size());
                for (const auto& v : row)
                    vals.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
                fiber.basis.emplace_back(space, std::move(vals));
            }
            dec.measure.atoms.push_back({fiber.lambda, aj.at("mass").get<double>()});
            dec.fibers.push_back(std::move(fiber));
        }
        return dec;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Fiber basis dump: one CSV row per (atom, basis index) with the values of
/// phi_j(lambda) in vertex order, real and imaginary parts interleaved.
inline void save_fibers_csv(const DirectIntegralDecomposition& dec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "lambda,j";
    for (const auto& id : dec.space()->ids()) out << ',' << id << "_re," << id << "_im";
    out << '\n';
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const auto& fiber = dec.fibers[a];
        for (int jdx = 0; jdx < fiber.dim(); ++jdx) {
            out << num(fiber.lambda) << ',' << jdx;
            for (const cplx& v : fiber.basis[static_cast<std::size_t>(jdx)].values)
                out << ',' << num(v.real()) << ',' << num(v.imag());
            out << '\n';
        }
    }
}

}  // namespace eigenfiber
