#pragma once

// Independent dense linear-algebra oracles for the identity suite, built on
// Eigen (LU solves, Pade matrix exponential, tridiagonalization-based
// eigensolver). These never touch the library's Jacobi/fiber route.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "eigenfiber/eigensolve.hpp"
#include "eigenfiber/kernel.hpp"
#include "eigenfiber/space.hpp"

namespace oracles {

using namespace eigenfiber;

/// Operator matrix of the kernel in the m-orthonormal coordinates.
inline Eigen::MatrixXcd to_eigen(const Kernel& k) {
    const int n = k.size();
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (const auto& [y, a] : k.row(x))
            b(x, y) = a * (k.space()->sqrt_measure(x) * k.space()->sqrt_measure(y));
    return b;
}

inline Eigen::VectorXcd to_coords(const VertexFunction& f) {
    Eigen::VectorXcd v(f.size());
    for (int i = 0; i < f.size(); ++i) v(i) = f[i] * f.space->sqrt_measure(i);
    return v;
}

inline VertexFunction from_coords(const SpacePtr& sp, const Eigen::VectorXcd& v) {
    auto f = VertexFunction::zero(sp);
    for (int i = 0; i < sp->size(); ++i) f[i] = v(i) / sp->sqrt_measure(i);
    return f;
}

/// (L + i)^{-1} f by LU solve.
inline VertexFunction resolvent_apply(const Kernel& k, const VertexFunction& f) {
    const Eigen::MatrixXcd b = to_eigen(k);
    const int n = k.size();
    Eigen::MatrixXcd shifted = b + cplx(0.0, 1.0) * Eigen::MatrixXcd::Identity(n, n);
    return from_coords(k.space(), shifted.partialPivLu().solve(to_coords(f)));
}

/// e^{-tL} f by Pade scaling-and-squaring.
inline VertexFunction heat_apply(const Kernel& k, double t, const VertexFunction& f) {
    const Eigen::MatrixXcd b = to_eigen(k);
    const Eigen::MatrixXcd e = (-t * b).exp();
    return from_coords(k.space(), e * to_coords(f));
}

/// L^p f by repeated dense multiplication.
inline VertexFunction power_apply(const Kernel& k, int p, const VertexFunction& f) {
    const Eigen::MatrixXcd b = to_eigen(k);
    Eigen::VectorXcd v = to_coords(f);
    for (int i = 0; i < p; ++i) v = b * v;
    return from_coords(k.space(), v);
}

/// Spectral projector onto [lo, hi] through Eigen's selfadjoint solver.
inline VertexFunction band_projector_apply(const Kernel& k, double lo, double hi,
                                           const VertexFunction& f) {
    const Eigen::MatrixXcd b = to_eigen(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b);
    const Eigen::VectorXcd v = to_coords(f);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam >= lo && lam <= hi) {
            const Eigen::VectorXcd col = es.eigenvectors().col(i);
            out += col * (col.adjoint() * v);
        }
    }
    return from_coords(k.space(), out);
}

inline Eigen::VectorXd eigenvalue_oracle(const Kernel& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(k));
    return es.eigenvalues();
}

/// ||(L+i)^{-1} M_w||_HS by LU inverse and Frobenius norm.
inline double resolvent_hs_oracle(const Kernel& k, const std::vector<double>& w) {
    const Eigen::MatrixXcd b = to_eigen(k);
    const int n = k.size();
    const Eigen::MatrixXcd inv =
        (b + cplx(0.0, 1.0) * Eigen::MatrixXcd::Identity(n, n)).partialPivLu().inverse();
    Eigen::MatrixXcd prod = inv;
    for (int c = 0; c < n; ++c) prod.col(c) *= w[static_cast<std::size_t>(c)];
    return prod.norm();
}

inline double vf_distance(const VertexFunction& a, const VertexFunction& b) {
    double g2 = 0.0;
    for (int i = 0; i < a.size(); ++i) g2 += std::norm(a[i] - b[i]) * a.space->measure(i);
    return std::sqrt(g2);
}

}  // namespace oracles
