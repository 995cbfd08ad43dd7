#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eigenfiber/fibers.hpp"
#include "eigenfiber/growth.hpp"
#include "eigenfiber/kernel.hpp"
#include "eigenfiber/rng.hpp"
#include "eigenfiber/space.hpp"

namespace eigenfiber {

/// Normalized error measures for the identity suite. Every function returns
/// a dimensionless worst case; the caller compares against the pinned
/// tolerance. Randomized inputs come from named substreams of one seed.

inline std::vector<VertexFunction> random_test_functions(const SpacePtr& sp, RngStream& rng,
                                                         int count) {
    std::vector<VertexFunction> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        auto f = VertexFunction::zero(sp);
        for (int i = 0; i < sp->size(); ++i) f[i] = rng.complex_box();
        out.push_back(std::move(f));
    }
    return out;
}

inline double phi_sup_on_atoms(const DirectIntegralDecomposition& dec, const SpectralFunction& phi) {
    double m = 0.0;
    for (const auto& atom : dec.measure.atoms) m = std::max(m, std::abs(phi(atom.lambda)));
    return m;
}

/// Relative Plancherel gap, worst case over the test functions.
inline double check_plancherel(const DirectIntegralDecomposition& dec,
                               const std::vector<VertexFunction>& fns,
                               const SpectralFunction& phi) {
    double worst = 0.0;
    for (const auto& f : fns) {
        const PlancherelResult r = plancherel_check(dec, f, phi);
        const double denom = std::max(std::max(r.lhs, r.rhs), 1e-300);
        worst = std::max(worst, r.abs_gap / denom);
    }
    return worst;
}

/// || W Phi(L) f - M_Phi W f || in the direct-sum norm, over
/// (1 + sup|Phi|) ||f||.
inline double check_intertwining(const DirectIntegralDecomposition& dec,
                                 const std::vector<VertexFunction>& fns,
                                 const SpectralFunction& phi) {
    const double sup = phi_sup_on_atoms(dec, phi);
    double worst = 0.0;
    for (const auto& f : fns) {
        const FiberCoefficients left = transform(dec, functional_calculus(dec, phi, f));
        FiberCoefficients right = transform(dec, f);
        for (std::size_t a = 0; a < right.per_atom.size(); ++a) {
            const cplx v = phi(dec.measure.atoms[a].lambda);
            for (cplx& x : right.per_atom[a]) x *= v;
        }
        double gap2 = 0.0;
        for (std::size_t a = 0; a < right.per_atom.size(); ++a)
            for (std::size_t j = 0; j < right.per_atom[a].size(); ++j)
                gap2 += dec.measure.atoms[a].mass * std::norm(left.per_atom[a][j] - right.per_atom[a][j]);
        const double scale = (1.0 + sup) * std::sqrt(norm_sq(f));
        worst = std::max(worst, std::sqrt(gap2) / std::max(scale, 1e-300));
    }
    return worst;
}

/// Weak expansion identity against delta test functions and the supplied u's.
inline double check_pairing_identity(const DirectIntegralDecomposition& dec,
                                     const std::vector<VertexFunction>& fns,
                                     const SpectralFunction& phi) {
    const double sup = phi_sup_on_atoms(dec, phi);
    const int n = dec.space()->size();
    const std::vector<int> spots = {0, n / 2, n - 1};
    double worst = 0.0;
    for (const auto& u : fns) {
        for (int x : spots) {
            const CompactFunction g = delta(dec.space(), x);
            const double gap = pairing_identity_check(dec, u, g, phi);
            const double scale =
                (1.0 + sup) * std::sqrt(norm_sq(u)) * std::sqrt(norm_sq(g.f));
            worst = std::max(worst, gap / std::max(scale, 1e-300));
        }
    }
    return worst;
}

/// || W^{-1} W f - f || / || f ||.
inline double check_reconstruction(const DirectIntegralDecomposition& dec,
                                   const std::vector<VertexFunction>& fns) {
    double worst = 0.0;
    for (const auto& f : fns) {
        const VertexFunction back = inverse_transform(dec, transform(dec, f));
        double gap2 = 0.0;
        for (int i = 0; i < f.size(); ++i)
            gap2 += std::norm(back[i] - f[i]) * f.space->measure(i);
        worst = std::max(worst, std::sqrt(gap2) / std::max(std::sqrt(norm_sq(f)), 1e-300));
    }
    return worst;
}

/// Worst normalized generalized-eigenfunction residual over the fiber bases.
inline double check_eigen_residuals(const DirectIntegralDecomposition& dec) {
    double worst = 0.0;
    for (const auto& fiber : dec.fibers)
        for (const auto& phi : fiber.basis)
            worst = std::max(worst, eigen_residual(dec.op, phi, fiber.lambda) /
                                        std::max(residual_scale(phi, fiber.lambda), 1e-300));
    return worst;
}

inline double check_cc_residuals(const DirectIntegralDecomposition& dec) {
    double worst = 0.0;
    for (const auto& fiber : dec.fibers)
        for (const auto& phi : fiber.basis)
            worst = std::max(worst, cc_eigen_residual(dec.op, phi, fiber.lambda) /
                                        std::max(residual_scale(phi, fiber.lambda), 1e-300));
    return worst;
}

/// Agreement of the direct and dual residual routes, normalized by the
/// residual scale. The two notions of eigenfunction must coincide.
inline double check_residual_agreement(const DirectIntegralDecomposition& dec) {
    double worst = 0.0;
    for (const auto& fiber : dec.fibers) {
        for (const auto& phi : fiber.basis) {
            const double a = eigen_residual(dec.op, phi, fiber.lambda);
            const double b = cc_eigen_residual(dec.op, phi, fiber.lambda);
            worst = std::max(worst,
                             std::abs(a - b) / std::max(residual_scale(phi, fiber.lambda), 1e-300));
        }
    }
    return worst;
}

/// max |<phi_j, A f> - lambda <phi_j, f>| / ((1 + max|lambda|) ||f||).
inline double check_eigenvalue_pairing(const DirectIntegralDecomposition& dec,
                                const std::vector<VertexFunction>& fns) {
    double lam_max = 0.0;
    for (const auto& atom : dec.measure.atoms) lam_max = std::max(lam_max, std::abs(atom.lambda));
    double worst = 0.0;
    for (const auto& f : fns) {
        const double scale = (1.0 + lam_max) * std::sqrt(norm_sq(f));
        worst = std::max(worst, eigenvalue_pairing_check(dec, f) / std::max(scale, 1e-300));
    }
    return worst;
}

/// Rank deficit of {W_lambda delta_x : x in V} against the fiber dimension,
/// summed over atoms. Zero exactly when every fiber is spanned by the
/// transforms of the delta basis.
inline int check_completeness_rank(const DirectIntegralDecomposition& dec) {
    int deficit = 0;
    const int n = dec.space()->size();
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const auto& fiber = dec.fibers[a];
        const int dim = fiber.dim();
        std::vector<std::vector<cplx>> vecs;
        for (int x = 0; x < n; ++x) {
            std::vector<cplx> e(static_cast<std::size_t>(dim));
            const CompactFunction dx = delta(dec.space(), x);
            for (int j = 0; j < dim; ++j)
                e[static_cast<std::size_t>(j)] = dual_pairing(fiber.basis[static_cast<std::size_t>(j)], dx);
            vecs.push_back(std::move(e));
        }
        // modified Gram-Schmidt rank count
        int rank = 0;
        std::vector<std::vector<cplx>> ortho;
        for (auto& v : vecs) {
            double orig = 0.0;
            for (const cplx& c : v) orig += std::norm(c);
            if (orig == 0.0) continue;
            for (const auto& q : ortho) {
                cplx proj(0, 0);
                for (std::size_t i = 0; i < v.size(); ++i) proj += std::conj(q[i]) * v[i];
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * q[i];
            }
            double rest = 0.0;
            for (const cplx& c : v) rest += std::norm(c);
            if (std::sqrt(rest) > 1e-10 * std::sqrt(orig)) {
                for (cplx& c : v) c /= std::sqrt(rest);
                ortho.push_back(v);
                ++rank;
                if (rank == dim) break;
            }
        }
        deficit += dim - rank;
    }
    return deficit;
}

/// Spectral projector through a narrow indicator against the explicit
/// rank-dim projector sum_j phi_j <phi_j, .>, worst relative gap.
inline double check_projector_consistency(const DirectIntegralDecomposition& dec,
                                          const std::vector<VertexFunction>& fns) {
    double worst = 0.0;
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const double lam = dec.measure.atoms[a].lambda;
        double gap_lo = a > 0 ? lam - dec.measure.atoms[a - 1].lambda : 1.0;
        double gap_hi = a + 1 < dec.fibers.size() ? dec.measure.atoms[a + 1].lambda - lam : 1.0;
        const double halfwin = 0.4 * std::min(gap_lo, gap_hi);
        const double lo = lam - halfwin, hi = lam + halfwin;
        const SpectralFunction ind = [lo, hi](double s) {
            return cplx(s >= lo && s <= hi ? 1.0 : 0.0, 0.0);
        };
        const auto& fiber = dec.fibers[a];
        const double mass = dec.measure.atoms[a].mass;
        for (const auto& f : fns) {
            const VertexFunction via_calculus = functional_calculus(dec, ind, f);
            auto direct = VertexFunction::zero(dec.space());
            for (const auto& phi : fiber.basis) {
                const cplx c = mass * inner_product(phi, f);
                for (int i = 0; i < direct.size(); ++i) direct[i] += c * phi[i];
            }
            double gap2 = 0.0;
            for (int i = 0; i < direct.size(); ++i)
                gap2 += std::norm(direct[i] - via_calculus[i]) * f.space->measure(i);
            worst = std::max(worst, std::sqrt(gap2) / std::max(std::sqrt(norm_sq(f)), 1e-300));
        }
    }
    return worst;
}

/// The kernel expansion <g, Phi(L) f> = sum_lambda mass Phi sum conj(g) w f
/// checked on delta pairs, normalized like the pairing identity check.
inline double check_kernel_expansion(const DirectIntegralDecomposition& dec,
                                     const SpectralFunction& phi) {
    const SpectralKernel w = spectral_kernel(dec);
    const double sup = phi_sup_on_atoms(dec, phi);
    const int n = dec.space()->size();
    const std::vector<int> spots = {0, n / 2, n - 1};
    double worst = 0.0;
    for (int y : spots) {
        for (int x : spots) {
            const CompactFunction gy = delta(dec.space(), y);
            const CompactFunction fx = delta(dec.space(), x);
            const cplx lhs = inner_product(gy.f, functional_calculus(dec, phi, fx.f));
            cplx rhs(0, 0);
            for (int a = 0; a < w.atom_count(); ++a)
                rhs += dec.measure.atoms[static_cast<std::size_t>(a)].mass * phi(w.lambda(a)) *
                       w(a, y, x);
            const double scale = (1.0 + sup) * dec.space()->measure(x) * dec.space()->measure(y);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(scale, 1e-300));
        }
    }
    return worst;
}

/// y -> w(lambda, y, x) / m(y) is a generalized eigenfunction at every atom
/// (verbatim w for unit measure); worst normalized residual over sample
/// columns.
inline double check_kernel_eigenfunction(const DirectIntegralDecomposition& dec) {
    const SpectralKernel w = spectral_kernel(dec);
    const int n = dec.space()->size();
    const std::vector<int> spots = {0, n / 2, n - 1};
    double worst = 0.0;
    for (int a = 0; a < w.atom_count(); ++a) {
        for (int x : spots) {
            auto col = VertexFunction::zero(dec.space());
            for (int y = 0; y < n; ++y) col[y] = w(a, y, x) / dec.space()->measure(y);
            if (col.max_abs() == 0.0) continue;  // kernel column may vanish when phi_j(x) = 0
            const double lam = w.lambda(a);
            worst = std::max(worst, eigen_residual(dec.op, col, lam) /
                                        std::max(residual_scale(col, lam), 1e-300));
        }
    }
    return worst;
}

}  // namespace eigenfiber
