#pragma once

// Randomized test inputs: weighted graphs, Hermitian kernels, and kernels
// with forced degenerate eigenspaces. Everything draws from named substreams
// of one seed.

#include <string>
#include <tuple>
#include <vector>

#include "eigenfiber/kernel.hpp"
#include "eigenfiber/rng.hpp"
#include "eigenfiber/space.hpp"

namespace corpus {

using namespace eigenfiber;

inline SpacePtr random_space(RngStream& rng, int n, double m_lo = 0.1, double m_hi = 10.0) {
    std::vector<std::string> ids;
    std::vector<double> m;
    for (int i = 0; i < n; ++i) {
        ids.push_back("x" + std::to_string(i));
        m.push_back(rng.uniform(m_lo, m_hi));
    }
    return make_space(std::move(ids), std::move(m));
}

/// Connected weighted graph: random spanning tree plus extra edges,
/// b in [0.1, 10].
inline GraphSpec random_graph(RngStream& rng, const SpacePtr& sp, double extra_edge_factor = 0.8) {
    const int n = sp->size();
    std::vector<std::tuple<int, int, double>> edges;
    std::vector<std::vector<bool>> used(static_cast<std::size_t>(n),
                                        std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int v = 1; v < n; ++v) {
        const int u = rng.uniform_int(0, v - 1);
        edges.emplace_back(u, v, rng.uniform(0.1, 10.0));
        used[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
        used[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = true;
    }
    const int extra = static_cast<int>(extra_edge_factor * n);
    for (int e = 0; e < extra && n > 2; ++e) {
        const int u = rng.uniform_int(0, n - 1);
        const int v = rng.uniform_int(0, n - 1);
        if (u == v || used[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) continue;
        edges.emplace_back(u, v, rng.uniform(0.1, 10.0));
        used[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
        used[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = true;
    }
    return GraphSpec(sp, std::move(edges));
}

/// Sparse random complex Hermitian kernel (diagonal real).
inline Kernel random_hermitian_kernel(RngStream& rng, const SpacePtr& sp, double density = 0.4) {
    const int n = sp->size();
    std::vector<KernelEntry> entries;
    for (int i = 0; i < n; ++i) {
        entries.push_back({i, i, cplx(rng.uniform(-2.0, 2.0), 0.0)});
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < density) entries.push_back({i, j, rng.complex_box()});
    }
    return Kernel::from_entries(sp, entries, true);
}

/// Kernel whose symmetrized matrix is U diag(d) U* for a random unitary U
/// and an eigenvalue list with forced repeats; used to exercise degenerate
/// eigenspaces with exact multiplicities.
inline Kernel kernel_with_spectrum(RngStream& rng, const SpacePtr& sp,
                                   const std::vector<double>& eigenvalues) {
    const int n = sp->size();
    if (static_cast<int>(eigenvalues.size()) != n)
        throw std::invalid_argument("kernel_with_spectrum: eigenvalue count mismatch");
    // random unitary via Gram-Schmidt on a random complex matrix (columns)
    std::vector<std::vector<cplx>> u(static_cast<std::size_t>(n),
                                     std::vector<cplx>(static_cast<std::size_t>(n)));
    for (auto& col : u)
        for (auto& v : col) v = rng.complex_box();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            cplx c(0, 0);
            for (int r = 0; r < n; ++r)
                c += std::conj(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)]) *
                     u[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            for (int r = 0; r < n; ++r)
                u[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] -=
                    c * u[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
        }
        double nn = 0.0;
        for (int r = 0; r < n; ++r)
            nn += std::norm(u[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)]);
        for (int r = 0; r < n; ++r)
            u[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] /= std::sqrt(nn);
    }
    // B = U diag U*, then a(x,y) = B_xy / sqrt(m(x) m(y)); stored exactly
    // Hermitian (upper triangle mirrored).
    std::vector<KernelEntry> entries;
    for (int x = 0; x < n; ++x) {
        for (int y = x; y < n; ++y) {
            cplx b(0, 0);
            for (int k = 0; k < n; ++k)
                b += eigenvalues[static_cast<std::size_t>(k)] *
                     u[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] *
                     std::conj(u[static_cast<std::size_t>(k)][static_cast<std::size_t>(y)]);
            if (x == y) b = cplx(b.real(), 0.0);
            const cplx a = b / (sp->sqrt_measure(x) * sp->sqrt_measure(y));
            entries.push_back({x, y, a});
            if (x != y) entries.push_back({y, x, std::conj(a)});
        }
    }
    return Kernel::from_entries(sp, entries, false);
}

inline VertexFunction random_function(RngStream& rng, const SpacePtr& sp) {
    auto f = VertexFunction::zero(sp);
    for (int i = 0; i < sp->size(); ++i) f[i] = rng.complex_box();
    return f;
}

}  // namespace corpus
