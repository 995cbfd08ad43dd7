#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "eigenfiber/space.hpp"

namespace eigenfiber {

struct KernelEntry {
    int row = 0;
    int col = 0;
    cplx value{0.0, 0.0};
};

/// Sparse Hermitian kernel a(x,y) on a discrete measure space. The induced
/// formal operator is (Aw)(x) = sum_y a(x,y) w(y) m(y). Hermitian symmetry
/// a(x,y) = conj(a(y,x)) is validated (or completed) at construction and is
/// what makes the induced operator selfadjoint on l2(V,m).
class Kernel {
public:
    /// Builds a kernel from an entry list. When `complete_hermitian` is set,
    /// an entry (x,y) without a stored mirror gets a(y,x) = conj(a(x,y));
    /// otherwise the mirror must be present. Conflicting duplicates and
    /// Hermitian violations beyond `tol` (relative) are rejected.
    static Kernel from_entries(SpacePtr space, const std::vector<KernelEntry>& entries,
                               bool complete_hermitian = true, double tol = 1e-12) {
        const int n = space->size();
        std::vector<std::vector<std::pair<int, cplx>>> rows(static_cast<std::size_t>(n));
        auto find = [&rows](int r, int c) -> cplx* {
            for (auto& e : rows[static_cast<std::size_t>(r)])
                if (e.first == c) return &e.second;
            return nullptr;
        };
        double scale = 0.0;
        for (const auto& e : entries) scale = std::max(scale, std::abs(e.value));
        for (const auto& e : entries) {
            if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
                throw std::invalid_argument("kernel: entry index out of range");
            if (cplx* prev = find(e.row, e.col)) {
                if (std::abs(*prev - e.value) > tol * std::max(1.0, scale))
                    throw std::invalid_argument("kernel: conflicting duplicate entry at (" +
                                                space->id(e.row) + ", " + space->id(e.col) + ")");
                continue;
            }
            rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
        }
        // Hermitian completion / validation.
        for (int r = 0; r < n; ++r) {
            for (const auto& [c, v] : rows[static_cast<std::size_t>(r)]) {
                cplx* mirror = find(c, r);
                if (mirror == nullptr) {
                    if (!complete_hermitian)
                        throw std::invalid_argument("kernel: missing Hermitian mirror for (" +
                                                    space->id(r) + ", " + space->id(c) + ")");
                    rows[static_cast<std::size_t>(c)].emplace_back(r, std::conj(v));
                } else if (std::abs(*mirror - std::conj(v)) > tol * std::max(1.0, scale)) {
                    throw std::invalid_argument("kernel: Hermitian symmetry violated at (" +
                                                space->id(r) + ", " + space->id(c) + ")");
                }
            }
        }
        for (auto& row : rows)
            std::sort(row.begin(), row.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        Kernel k;
        k.space_ = std::move(space);
        k.rows_ = std::move(rows);
        return k;
    }

    const SpacePtr& space() const { return space_; }
    int size() const { return space_->size(); }

    const std::vector<std::pair<int, cplx>>& row(int r) const {
        return rows_[static_cast<std::size_t>(r)];
    }

    /// Stored value a(x,y); zero when no entry is stored.
    cplx at(int r, int c) const {
        for (const auto& [cc, v] : rows_[static_cast<std::size_t>(r)])
            if (cc == c) return v;
        return cplx(0.0, 0.0);
    }

    int max_row_support() const {
        std::size_t m = 0;
        for (const auto& row : rows_) m = std::max(m, row.size());
        return static_cast<int>(m);
    }

    bool same_kernel(const Kernel& other, double tol = 1e-12) const {
        if (!same_space(space_, other.space_)) return false;
        const int n = size();
        for (int r = 0; r < n; ++r) {
            for (const auto& [c, v] : rows_[static_cast<std::size_t>(r)])
                if (std::abs(v - other.at(r, c)) > tol * std::max(1.0, std::abs(v))) return false;
            for (const auto& [c, v] : other.rows_[static_cast<std::size_t>(r)])
                if (std::abs(v - at(r, c)) > tol * std::max(1.0, std::abs(v))) return false;
        }
        return true;
    }

    std::vector<KernelEntry> entries() const {
        std::vector<KernelEntry> out;
        for (int r = 0; r < size(); ++r)
            for (const auto& [c, v] : rows_[static_cast<std::size_t>(r)])
                out.push_back({r, c, v});
        return out;
    }

private:
    SpacePtr space_;
    std::vector<std::vector<std::pair<int, cplx>>> rows_;
};

/// Undirected graph with strictly positive symmetric edge weights and no
/// self-loops; the raw material for the usual graph Laplacians.
struct GraphSpec {
    SpacePtr space;
    // (x, y, b) with b > 0, each undirected edge listed once
    std::vector<std::tuple<int, int, double>> edges;

    GraphSpec(SpacePtr sp, std::vector<std::tuple<int, int, double>> es)
        : space(std::move(sp)), edges(std::move(es)) {
        std::vector<std::vector<bool>> seen;
        const int n = space->size();
        seen.assign(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
        for (auto& [x, y, b] : edges) {
            if (x < 0 || x >= n || y < 0 || y >= n)
                throw std::invalid_argument("graph: edge index out of range");
            if (x == y)
                throw std::invalid_argument("graph: self-loop at vertex '" + space->id(x) + "'");
            if (!(b > 0.0) || !std::isfinite(b))
                throw std::invalid_argument("graph: nonpositive edge weight on (" + space->id(x) +
                                            ", " + space->id(y) + ")");
            if (seen[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)])
                throw std::invalid_argument("graph: duplicate edge (" + space->id(x) + ", " +
                                            space->id(y) + ")");
            seen[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = true;
            seen[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = true;
        }
    }
};

/// (Aw)(x) = sum_y a(x,y) w(y) m(y), one vertex.
inline cplx apply_formal(const Kernel& k, const VertexFunction& w, int x) {
    require_same_space(k.space(), w.space, "apply_formal");
    cplx s(0.0, 0.0);
    for (const auto& [y, a] : k.row(x))
        s += a * w[y] * k.space()->measure(y);
    return s;
}

/// Total application x -> (Aw)(x).
inline VertexFunction apply_formal_all(const Kernel& k, const VertexFunction& w) {
    require_same_space(k.space(), w.space, "apply_formal");
    auto out = VertexFunction::zero(k.space());
    const int n = k.size();
    for (int x = 0; x < n; ++x) {
        cplx s(0.0, 0.0);
        for (const auto& [y, a] : k.row(x))
            s += a * w[y] * k.space()->measure(y);
        out[x] = s;
    }
    return out;
}

/// Kernel of the weighted graph Laplacian:
///   a(x,y) = -b(x,y) / (m(x) m(y))  for x ~ y,
///   a(x,x) = sum_{y~x} b(x,y) / m(x)^2,
/// so that (Au)(x) = (1/m(x)) sum_{y~x} b(x,y) (u(x) - u(y)).
inline Kernel laplacian_from_graph(const GraphSpec& g) {
    std::vector<KernelEntry> entries;
    const int n = g.space->size();
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    for (const auto& [x, y, b] : g.edges) {
        const double mxy = g.space->measure(x) * g.space->measure(y);
        entries.push_back({x, y, cplx(-b / mxy, 0.0)});
        entries.push_back({y, x, cplx(-b / mxy, 0.0)});
        diag[static_cast<std::size_t>(x)] += b;
        diag[static_cast<std::size_t>(y)] += b;
    }
    for (int x = 0; x < n; ++x) {
        if (diag[static_cast<std::size_t>(x)] == 0.0) continue;
        const double mx = g.space->measure(x);
        entries.push_back({x, x, cplx(diag[static_cast<std::size_t>(x)] / (mx * mx), 0.0)});
    }
    return Kernel::from_entries(g.space, entries, false);
}

/// max_x |(A phi)(x) - lambda phi(x)|. phi is accepted as a generalized
/// eigenfunction when this is <= tol_verify * (1+|lambda|) * max|phi|.
inline double eigen_residual(const Kernel& k, const VertexFunction& phi, double lambda) {
    require_same_space(k.space(), phi.space, "eigen_residual");
    double worst = 0.0;
    const int n = k.size();
    for (int x = 0; x < n; ++x) {
        cplx s(0.0, 0.0);
        for (const auto& [y, a] : k.row(x))
            s += a * phi[y] * k.space()->measure(y);
        worst = std::max(worst, std::abs(s - lambda * phi[x]));
    }
    return worst;
}

/// The C_c(V)-eigenfunction residual: tests the defining identity
/// sum_y conj(phi(y)) ((A - lambda) delta_x)(y) m(y) = 0 against every delta
/// function, normalized by m(x). Evaluates the sums literally from the stored
/// entries (column values looked up as stored data, not derived from the
/// row), so it is an independent route from eigen_residual; the two must
/// agree by the selfadjointness of the kernel.
inline double cc_eigen_residual(const Kernel& k, const VertexFunction& phi, double lambda) {
    require_same_space(k.space(), phi.space, "cc_eigen_residual");
    const int n = k.size();
    // Column view of the stored entries: cols[x] lists (y, a(y,x)) in row
    // order, so ((A) delta_x)(y) = a(y,x) m(x) is read off stored data.
    std::vector<std::vector<std::pair<int, cplx>>> cols(static_cast<std::size_t>(n));
    for (int y = 0; y < n; ++y)
        for (const auto& [x, ayx] : k.row(y))
            cols[static_cast<std::size_t>(x)].emplace_back(y, ayx);
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
        const double mx = k.space()->measure(x);
        cplx s(0.0, 0.0);
        bool diag_seen = false;
        for (const auto& [y, ayx] : cols[static_cast<std::size_t>(x)]) {
            cplx val = ayx * mx;
            if (y == x) {
                val -= lambda;
                diag_seen = true;
            }
            s += std::conj(phi[y]) * val * k.space()->measure(y);
        }
        if (!diag_seen)
            s += std::conj(phi[x]) * (-lambda) * k.space()->measure(x);
        worst = std::max(worst, std::abs(s) / mx);
    }
    return worst;
}

inline double residual_scale(const VertexFunction& phi, double lambda) {
    return (1.0 + std::abs(lambda)) * phi.max_abs();
}

}  // namespace eigenfiber
