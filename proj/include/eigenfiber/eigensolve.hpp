#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "eigenfiber/kernel.hpp"
#include "eigenfiber/space.hpp"

namespace eigenfiber {

/// Dense Hermitian matrix, row-major.
struct HermitianMatrix {
    int n = 0;
    std::vector<cplx> a;  // n*n, row-major

    HermitianMatrix() = default;
    explicit HermitianMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, cplx(0, 0)) {}

    cplx& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const cplx& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& v : a) m = std::max(m, std::abs(v));
        return m;
    }

    double hermitian_defect() const {
        double d = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
        return d;
    }

    void require_hermitian(double tol = 1e-12) const {
        if (hermitian_defect() > tol * std::max(1.0, max_abs()))
            throw std::invalid_argument("hermitian matrix: H != H* beyond tolerance");
    }

    bool is_real() const {
        for (const cplx& v : a)
            if (v.imag() != 0.0) return false;
        return true;
    }

    double frobenius() const {
        double s = 0.0;
        for (const cplx& v : a) s += std::norm(v);
        return std::sqrt(s);
    }
};

/// B = D^{1/2} A_m D^{-1/2} with (A_m)_{xy} = a(x,y) m(y) and D = diag(m),
/// i.e. B_{xy} = a(x,y) sqrt(m(x) m(y)). B is Hermitian in the standard sense
/// and its orthonormal eigenvectors map back to l2(V,m)-orthonormal
/// eigenfunctions via phi(x) = psi(x) / sqrt(m(x)).
inline HermitianMatrix assemble_matrix(const Kernel& k) {
    const int n = k.size();
    HermitianMatrix h(n);
    for (int x = 0; x < n; ++x)
        for (const auto& [y, a] : k.row(x))
            h.at(x, y) = a * (k.space()->sqrt_measure(x) * k.space()->sqrt_measure(y));
    h.require_hermitian();
    return h;
}

/// Full eigendecomposition: eigenvalues ascending, eigenvectors orthonormal
/// in the standard inner product (columns of `vectors`, column-major). Holds
/// the originating space so vectors can be mapped back to
/// l2(V,m)-orthonormal vertex functions.
struct EigenDecomposition {
    SpacePtr space;
    std::vector<double> eigenvalues;
    std::vector<cplx> vectors;  // column-major n*n; column i pairs with eigenvalues[i]
    int n = 0;

    cplx vec(int row, int col) const { return vectors[static_cast<std::size_t>(col) * n + row]; }

    /// Eigenvector column i mapped back to an l2(V,m)-orthonormal function.
    VertexFunction eigenfunction(int i) const {
        std::vector<cplx> vals(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x)
            vals[static_cast<std::size_t>(x)] = vec(x, i) / space->sqrt_measure(x);
        return VertexFunction(space, std::move(vals));
    }
};

namespace detail {

// One cyclic-Jacobi pass structure shared by the real and complex paths.
// Rotations are applied in a fixed (p,q) order; same input bits give the
// same output bits.
template <typename Scalar>
struct JacobiWork {
    int n;
    std::vector<Scalar> A;  // row-major
    std::vector<Scalar> V;  // row-major accumulated rotations (columns = eigenvectors)
};

inline double off_norm(const std::vector<cplx>& A, int n) {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) s += std::norm(A[static_cast<std::size_t>(p) * n + q]);
    return std::sqrt(2.0 * s);
}

inline double off_norm(const std::vector<double>& A, int n) {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
            const double v = A[static_cast<std::size_t>(p) * n + q];
            s += v * v;
        }
    return std::sqrt(2.0 * s);
}

// Stable tangent of the Jacobi angle for the 2x2 block [[app, h],[h, aqq]].
// h may be signed; the smaller-magnitude root of t^2 + 2 tau t - 1 = 0 is
// returned.
inline double jacobi_tangent(double app, double aqq, double h) {
    const double tau = (aqq - app) / (2.0 * h);
    const double sign = tau >= 0.0 ? 1.0 : -1.0;
    return sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
}

inline void real_jacobi(std::vector<double>& A, std::vector<double>& V, int n, long rot_cap) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += A[static_cast<std::size_t>(i) * n + i] * A[static_cast<std::size_t>(i) * n + i];
    const double fro = std::sqrt(diag + off_norm(A, n) * off_norm(A, n));
    if (fro == 0.0) return;
    const double target = 1e-14 * fro;
    const double skip_tol = target / (2.0 * n);
    long rotations = 0;
    auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * n + j]; };
    auto vat = [&](int i, int j) -> double& { return V[static_cast<std::size_t>(i) * n + j]; };
    while (off_norm(A, n) > target) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) <= skip_tol) continue;
                if (++rotations > rot_cap)
                    throw std::runtime_error("eigendecompose: rotation cap exceeded (ill-conditioned input)");
                rotated = true;
                const double app = at(p, p), aqq = at(q, q);
                const double t = jacobi_tangent(app, aqq, apq);
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                    at(p, i) = at(i, p);
                    at(q, i) = at(i, q);
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vat(i, p), viq = vat(i, q);
                    vat(i, p) = c * vip - s * viq;
                    vat(i, q) = s * vip + c * viq;
                }
            }
        }
        if (!rotated) break;
    }
}

inline void complex_jacobi(std::vector<cplx>& A, std::vector<cplx>& V, int n, long rot_cap) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += std::norm(A[static_cast<std::size_t>(i) * n + i]);
    const double fro = off_norm(A, n) + std::sqrt(diag);
    if (fro == 0.0) return;
    const double target = 1e-14 * fro;
    const double skip_tol = target / (2.0 * n);
    long rotations = 0;
    auto at = [&](int i, int j) -> cplx& { return A[static_cast<std::size_t>(i) * n + j]; };
    auto vat = [&](int i, int j) -> cplx& { return V[static_cast<std::size_t>(i) * n + j]; };
    while (off_norm(A, n) > target) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double h = std::abs(at(p, q));
                if (h <= skip_tol) continue;
                if (++rotations > rot_cap)
                    throw std::runtime_error("eigendecompose: rotation cap exceeded (ill-conditioned input)");
                rotated = true;
                const cplx e = at(p, q) / h;  // phase of a_pq
                const double app = at(p, p).real(), aqq = at(q, q).real();
                const double t = jacobi_tangent(app, aqq, h);
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // Unitary 2x2: V_pp = c, V_pq = s e, V_qp = -s conj(e), V_qq = c.
                at(p, p) = cplx(app - t * h, 0.0);
                at(q, q) = cplx(aqq + t * h, 0.0);
                at(p, q) = cplx(0.0, 0.0);
                at(q, p) = cplx(0.0, 0.0);
                const cplx se = s * e, sec = s * std::conj(e);
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const cplx aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - sec * aiq;
                    at(i, q) = se * aip + c * aiq;
                    at(p, i) = std::conj(at(i, p));
                    at(q, i) = std::conj(at(i, q));
                }
                for (int i = 0; i < n; ++i) {
                    const cplx vip = vat(i, p), viq = vat(i, q);
                    vat(i, p) = c * vip - sec * viq;
                    vat(i, q) = se * vip + c * viq;
                }
            }
        }
        if (!rotated) break;
    }
}

}  // namespace detail

/// Deterministic dense Hermitian eigendecomposition by cyclic Jacobi.
/// Throws when the input is not Hermitian or the rotation cap (50 n^2) is
/// exceeded.
inline EigenDecomposition eigendecompose(const HermitianMatrix& h, SpacePtr space) {
    h.require_hermitian();
    if (space && space->size() != h.n)
        throw std::invalid_argument("eigendecompose: space size does not match matrix");
    const int n = h.n;
    const long rot_cap = 50L * n * n;
    std::vector<double> lam(static_cast<std::size_t>(n));
    std::vector<cplx> vec(static_cast<std::size_t>(n) * n, cplx(0, 0));

    if (h.is_real()) {
        std::vector<double> A(static_cast<std::size_t>(n) * n);
        std::vector<double> V(static_cast<std::size_t>(n) * n, 0.0);
        for (std::size_t i = 0; i < A.size(); ++i) A[i] = h.a[i].real();
        for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;
        detail::real_jacobi(A, V, n, rot_cap);
        for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = A[static_cast<std::size_t>(i) * n + i];
        // V row-major with columns as eigenvectors -> store column-major.
        for (int col = 0; col < n; ++col)
            for (int row = 0; row < n; ++row)
                vec[static_cast<std::size_t>(col) * n + row] = cplx(V[static_cast<std::size_t>(row) * n + col], 0.0);
    } else {
        std::vector<cplx> A = h.a;
        std::vector<cplx> V(static_cast<std::size_t>(n) * n, cplx(0, 0));
        for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = cplx(1.0, 0.0);
        detail::complex_jacobi(A, V, n, rot_cap);
        for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = A[static_cast<std::size_t>(i) * n + i].real();
        for (int col = 0; col < n; ++col)
            for (int row = 0; row < n; ++row)
                vec[static_cast<std::size_t>(col) * n + row] = V[static_cast<std::size_t>(row) * n + col];
    }

    // Ascending sort, stable in the original index for determinism.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (lam[static_cast<std::size_t>(a)] != lam[static_cast<std::size_t>(b)])
            return lam[static_cast<std::size_t>(a)] < lam[static_cast<std::size_t>(b)];
        return a < b;
    });
    EigenDecomposition dec;
    dec.space = std::move(space);
    dec.n = n;
    dec.eigenvalues.resize(static_cast<std::size_t>(n));
    dec.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        dec.eigenvalues[static_cast<std::size_t>(i)] = lam[static_cast<std::size_t>(src)];
        std::copy(vec.begin() + static_cast<std::ptrdiff_t>(src) * n,
                  vec.begin() + static_cast<std::ptrdiff_t>(src + 1) * n,
                  dec.vectors.begin() + static_cast<std::ptrdiff_t>(i) * n);
    }
    return dec;
}

inline EigenDecomposition eigendecompose(const Kernel& k) {
    return eigendecompose(assemble_matrix(k), k.space());
}

/// Distinct eigenvalues with their eigenpair indices. Greedy ascending
/// clustering: a new group starts when the gap to the previous eigenvalue
/// exceeds tol_group * (1 + |lambda|); the representative is the group mean.
struct GroupedSpectrum {
    struct Group {
        double lambda = 0.0;  // arithmetic mean of members
        std::vector<int> indices;
    };
    double tol_group = 0.0;
    std::vector<Group> groups;
};

inline GroupedSpectrum group_eigenvalues(const std::vector<double>& eigenvalues_ascending,
                                         double tol_group) {
    if (!(tol_group > 0.0))
        throw std::invalid_argument("group_eigenvalues: tol_group must be positive");
    GroupedSpectrum g;
    g.tol_group = tol_group;
    for (std::size_t i = 0; i < eigenvalues_ascending.size(); ++i) {
        const double v = eigenvalues_ascending[i];
        bool fresh = g.groups.empty();
        if (!fresh) {
            const double prev = eigenvalues_ascending[i - 1];
            fresh = (v - prev) > tol_group * (1.0 + std::abs(v));
        }
        if (fresh) g.groups.push_back({0.0, {}});
        g.groups.back().indices.push_back(static_cast<int>(i));
    }
    for (auto& grp : g.groups) {
        double mean = 0.0;
        for (int idx : grp.indices) mean += eigenvalues_ascending[static_cast<std::size_t>(idx)];
        grp.lambda = mean / static_cast<double>(grp.indices.size());
    }
    return g;
}

inline GroupedSpectrum group_eigenvalues(const EigenDecomposition& d, double tol_group) {
    return group_eigenvalues(d.eigenvalues, tol_group);
}

}  // namespace eigenfiber
