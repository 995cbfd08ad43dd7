#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eigenfiber/eigensolve.hpp"
#include "eigenfiber/kernel.hpp"
#include "eigenfiber/rng.hpp"
#include "eigenfiber/space.hpp"

namespace eigenfiber {

/// Bounded multiplier on the spectrum; evaluated only at the atoms.
using SpectralFunction = std::function<cplx(double)>;

/// Purely atomic spectral measure: atoms strictly increasing, masses > 0.
struct SpectralMeasure {
    struct Atom {
        double lambda = 0.0;
        double mass = 1.0;
    };
    std::vector<Atom> atoms;
};

/// One fiber H_lambda: the eigenvalue together with the basis declared
/// orthonormal. The fiber inner product is the coefficient l2 inner product
/// in this basis; on a finite space it coincides with the l2(V,m) inner
/// product restricted to the eigenspace (asserted by tests, not assumed).
struct Fiber {
    double lambda = 0.0;
    std::vector<VertexFunction> basis;

    int dim() const { return static_cast<int>(basis.size()); }
};

enum class MassNormalization {
    kUnitAtom,      // mass 1 per distinct eigenvalue (default)
    kMultiplicity,  // mass = fiber dimension; basis rescaled to keep W unitary
};

struct BuildOptions {
    double tol_verify = 1e-9;
    MassNormalization normalization = MassNormalization::kUnitAtom;
    // When nonzero, applies a seeded random unitary rotation inside every
    // fiber of dimension > 1. Used to exercise uniqueness:
    // rotated decompositions must carry identical invariant data.
    std::uint64_t degenerate_rotation_seed = 0;
    bool validate = true;
};

/// The direct-integral (here: direct-sum) decomposition of a finite
/// selfadjoint kernel: atomic spectral measure, fibers of generalized
/// eigenfunctions, and the data of the unitary transform W.
struct DirectIntegralDecomposition {
    Kernel op;
    SpectralMeasure measure;
    std::vector<Fiber> fibers;  // aligned with measure.atoms

    const SpacePtr& space() const { return op.space(); }
    int atom_count() const { return static_cast<int>(fibers.size()); }
    int total_dimension() const {
        int d = 0;
        for (const auto& f : fibers) d += f.dim();
        return d;
    }
};

/// Coefficients of W f: per atom, the vector e_f(lambda)(j) = <phi_j(lambda), f>.
struct FiberCoefficients {
    std::vector<std::vector<cplx>> per_atom;
};

namespace detail {

// Modified Gram-Schmidt in the l2(V,m) inner product, in index order.
inline void orthonormalize_in_place(std::vector<VertexFunction>& basis) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const cplx c = inner_product(basis[i], basis[j]);
            for (int x = 0; x < basis[j].size(); ++x) basis[j][x] -= c * basis[i][x];
        }
        const double nn = std::sqrt(norm_sq(basis[j]));
        if (!(nn > 0.0))
            throw std::runtime_error("fiber basis: linearly dependent eigenvectors");
        for (int x = 0; x < basis[j].size(); ++x) basis[j][x] /= nn;
    }
}

// Random unitary d x d from a seeded stream (Gram-Schmidt on a random
// complex matrix), applied to the basis on the right.
inline void rotate_basis(std::vector<VertexFunction>& basis, RngStream& rng) {
    const int d = static_cast<int>(basis.size());
    if (d < 2) return;
    std::vector<std::vector<cplx>> q(static_cast<std::size_t>(d),
                                     std::vector<cplx>(static_cast<std::size_t>(d)));
    for (auto& col : q)
        for (auto& v : col) v = rng.complex_box();
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < j; ++i) {
            cplx c(0, 0);
            for (int r = 0; r < d; ++r) c += std::conj(q[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)]) * q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            for (int r = 0; r < d; ++r) q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] -= c * q[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
        }
        double nn = 0.0;
        for (int r = 0; r < d; ++r) nn += std::norm(q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)]);
        nn = std::sqrt(nn);
        if (!(nn > 1e-12)) {  // essentially impossible; retry deterministically
            for (int r = 0; r < d; ++r) q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] = rng.complex_box();
            --j;
            continue;
        }
        for (int r = 0; r < d; ++r) q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] /= nn;
    }
    const int n = basis.front().size();
    std::vector<VertexFunction> rotated;
    rotated.reserve(basis.size());
    for (int j = 0; j < d; ++j) {
        auto f = VertexFunction::zero(basis.front().space);
        for (int r = 0; r < d; ++r)
            for (int x = 0; x < n; ++x) f[x] += q[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] * basis[static_cast<std::size_t>(r)][x];
        rotated.push_back(std::move(f));
    }
    basis = std::move(rotated);
}

}  // namespace detail

/// Builds the expansion for a Hermitian kernel on a finite space: one atom
/// per distinct eigenvalue, fiber bases from the l2(V,m)-orthonormal
/// eigenbasis of each eigenspace. Every fiber basis element is validated as
/// a generalized eigenfunction against tol_verify * (1+|lambda|) * max|phi|.
inline DirectIntegralDecomposition build_decomposition(const Kernel& k, double tol_group,
                                                       const BuildOptions& opts = {}) {
    const EigenDecomposition dec = eigendecompose(k);
    const GroupedSpectrum grouped = group_eigenvalues(dec, tol_group);

    DirectIntegralDecomposition out{k, {}, {}};
    for (std::size_t g = 0; g < grouped.groups.size(); ++g) {
        const auto& grp = grouped.groups[g];
        Fiber fiber;
        fiber.lambda = grp.lambda;
        for (int idx : grp.indices) fiber.basis.push_back(dec.eigenfunction(idx));
        if (opts.degenerate_rotation_seed != 0) {
            RngStream rng(opts.degenerate_rotation_seed, "fiber-rotation/" + std::to_string(g));
            detail::rotate_basis(fiber.basis, rng);
        }
        detail::orthonormalize_in_place(fiber.basis);

        double mass = 1.0;
        if (opts.normalization == MassNormalization::kMultiplicity) {
            mass = static_cast<double>(fiber.dim());
            const double scale = 1.0 / std::sqrt(mass);
            for (auto& phi : fiber.basis)
                for (int x = 0; x < phi.size(); ++x) phi[x] *= scale;
        }
        out.measure.atoms.push_back({fiber.lambda, mass});
        out.fibers.push_back(std::move(fiber));
    }

    if (opts.validate) {
        if (out.total_dimension() != k.size())
            throw std::runtime_error("decomposition: fiber dimensions do not account for the space");
        for (const auto& fiber : out.fibers) {
            for (const auto& phi : fiber.basis) {
                const double res = eigen_residual(k, phi, fiber.lambda);
                if (res > opts.tol_verify * residual_scale(phi, fiber.lambda))
                    throw std::runtime_error("decomposition: fiber basis element fails the eigenfunction residual");
            }
        }
    }
    return out;
}

/// W f in fiber coordinates: (W_lambda f)(j) = <phi_j(lambda), f>.
/// Linear in f.
inline FiberCoefficients transform(const DirectIntegralDecomposition& dec,
                                   const VertexFunction& f) {
    require_same_space(dec.space(), f.space, "transform");
    FiberCoefficients c;
    c.per_atom.reserve(dec.fibers.size());
    for (const auto& fiber : dec.fibers) {
        std::vector<cplx> coeff;
        coeff.reserve(static_cast<std::size_t>(fiber.dim()));
        for (const auto& phi : fiber.basis) coeff.push_back(inner_product(phi, f));
        c.per_atom.push_back(std::move(coeff));
    }
    return c;
}

/// sum_lambda mass(lambda) sum_j c_lambda(j) phi_j(lambda). Inverse of
/// `transform` on the nose for coefficients produced by it.
inline VertexFunction inverse_transform(const DirectIntegralDecomposition& dec,
                                        const FiberCoefficients& c) {
    if (c.per_atom.size() != dec.fibers.size())
        throw std::invalid_argument("inverse_transform: coefficient shape mismatch");
    auto f = VertexFunction::zero(dec.space());
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const auto& fiber = dec.fibers[a];
        const auto& coeff = c.per_atom[a];
        if (static_cast<int>(coeff.size()) != fiber.dim())
            throw std::invalid_argument("inverse_transform: coefficient shape mismatch");
        const double mass = dec.measure.atoms[a].mass;
        for (int j = 0; j < fiber.dim(); ++j) {
            const cplx w = mass * coeff[static_cast<std::size_t>(j)];
            const auto& phi = fiber.basis[static_cast<std::size_t>(j)];
            for (int x = 0; x < f.size(); ++x) f[x] += w * phi[x];
        }
    }
    return f;
}

/// Phi(L) f through the decomposition: multiply the fiber coordinates by
/// Phi(lambda) and transform back. Throws when Phi is not finite at an atom.
inline VertexFunction functional_calculus(const DirectIntegralDecomposition& dec,
                                          const SpectralFunction& phi_fn,
                                          const VertexFunction& f) {
    FiberCoefficients c = transform(dec, f);
    for (std::size_t a = 0; a < c.per_atom.size(); ++a) {
        const cplx v = phi_fn(dec.measure.atoms[a].lambda);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("functional_calculus: multiplier not finite at atom lambda=" +
                                        std::to_string(dec.measure.atoms[a].lambda));
        for (cplx& x : c.per_atom[a]) x *= v;
    }
    return inverse_transform(dec, c);
}

struct PlancherelResult {
    double lhs = 0.0;  // ||Phi(L) f||^2 in l2(V,m)
    double rhs = 0.0;  // sum over atoms of mass |Phi|^2 ||W_lambda f||^2
    double abs_gap = 0.0;
};

/// Both sides of the Plancherel identity
///   ||Phi(L) f||^2 = sum_lambda mass |Phi(lambda)|^2 ||W_lambda f||^2.
inline PlancherelResult plancherel_check(const DirectIntegralDecomposition& dec,
                                         const VertexFunction& f, const SpectralFunction& phi_fn) {
    PlancherelResult r;
    r.lhs = norm_sq(functional_calculus(dec, phi_fn, f));
    const FiberCoefficients c = transform(dec, f);
    double rhs = 0.0;
    for (std::size_t a = 0; a < c.per_atom.size(); ++a) {
        double fiber_norm_sq = 0.0;
        for (const cplx& v : c.per_atom[a]) fiber_norm_sq += std::norm(v);
        rhs += dec.measure.atoms[a].mass * std::norm(phi_fn(dec.measure.atoms[a].lambda)) * fiber_norm_sq;
    }
    r.rhs = rhs;
    r.abs_gap = std::abs(r.lhs - r.rhs);
    return r;
}

/// The weak expansion identity
///   <Phi(L) u, g> = sum_lambda mass ( Phi(lambda) (W u)(lambda), g )_m.
/// Fiber elements are plain functions and the multiplier enters the first
/// (antilinear) pairing slot by plain scalar multiplication, which is the
/// same as weighting the pairing by conj(Phi(lambda)) from outside. Under
/// these conventions the identity holds verbatim; returns |lhs - rhs|.
inline double pairing_identity_check(const DirectIntegralDecomposition& dec,
                                     const VertexFunction& u, const CompactFunction& g,
                                     const SpectralFunction& phi_fn) {
    const cplx lhs = inner_product(functional_calculus(dec, phi_fn, u), g.f);
    const FiberCoefficients c = transform(dec, u);
    cplx rhs(0.0, 0.0);
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const auto& fiber = dec.fibers[a];
        auto wu = VertexFunction::zero(dec.space());
        for (int j = 0; j < fiber.dim(); ++j)
            for (int x = 0; x < wu.size(); ++x)
                wu[x] += c.per_atom[a][static_cast<std::size_t>(j)] * fiber.basis[static_cast<std::size_t>(j)][x];
        const cplx phival = phi_fn(dec.measure.atoms[a].lambda);
        for (int x = 0; x < wu.size(); ++x) wu[x] *= phival;
        rhs += dec.measure.atoms[a].mass * dual_pairing(wu, g);
    }
    return std::abs(lhs - rhs);
}

/// The spectral kernel w(lambda, y, x) = m(y) m(x) sum_j phi_j(y) conj(phi_j(x)).
/// With the measure factors absorbed this way the expansion
///   <g, Phi(L) f> = sum_lambda mass Phi(lambda) sum_{x,y} conj(g(y)) w(lambda,y,x) f(x)
/// holds verbatim for any m; for m == 1 the first vertex argument
/// y -> w(lambda, y, x) is itself a generalized eigenfunction, and in general
/// y -> w(lambda, y, x) / m(y) is one.
class SpectralKernel {
public:
    explicit SpectralKernel(const DirectIntegralDecomposition& dec) : dec_(&dec) {}

    cplx operator()(int atom, int y, int x) const {
        const auto& fiber = dec_->fibers[static_cast<std::size_t>(atom)];
        cplx s(0.0, 0.0);
        for (const auto& phi : fiber.basis) s += phi[y] * std::conj(phi[x]);
        const auto& sp = *dec_->space();
        return s * sp.measure(y) * sp.measure(x);
    }

    double lambda(int atom) const { return dec_->fibers[static_cast<std::size_t>(atom)].lambda; }
    int atom_count() const { return dec_->atom_count(); }

private:
    const DirectIntegralDecomposition* dec_;
};

inline SpectralKernel spectral_kernel(const DirectIntegralDecomposition& dec) {
    return SpectralKernel(dec);
}

struct UniquenessResult {
    double atom_gap = 0.0;      // mismatch of the atom sets (relative)
    double max_angle = 0.0;     // principal-angle surrogate between fiber spans
    double max_gram_gap = 0.0;  // entrywise gap of the fiber Gram matrices
    double max_gap = 0.0;
};

/// Compares two decompositions of the same kernel over a spanning family of
/// test functions: atom sets, fiber spans (principal angles measured through
/// the orthogonal projectors in the symmetrized picture), and the fiber Gram
/// matrices [<W_lambda v_j, W_lambda v_k>], which are basis independent
/// (they equal <v_j, P_lambda v_k>). Basis arbitrariness inside degenerate
/// eigenspaces must leave all of this invariant.
inline UniquenessResult uniqueness_compare(const DirectIntegralDecomposition& dec1,
                                           const DirectIntegralDecomposition& dec2,
                                           const std::vector<CompactFunction>& basis) {
    if (!dec1.op.same_kernel(dec2.op))
        throw std::invalid_argument("uniqueness_compare: decompositions of different kernels");
    UniquenessResult r;
    if (dec1.atom_count() != dec2.atom_count()) {
        r.atom_gap = std::numeric_limits<double>::infinity();
        r.max_gap = r.atom_gap;
        return r;
    }
    const int n = dec1.space()->size();
    for (int a = 0; a < dec1.atom_count(); ++a) {
        const auto& f1 = dec1.fibers[static_cast<std::size_t>(a)];
        const auto& f2 = dec2.fibers[static_cast<std::size_t>(a)];
        r.atom_gap = std::max(r.atom_gap,
                              std::abs(f1.lambda - f2.lambda) / (1.0 + std::abs(f1.lambda)));

        // Span comparison in the symmetrized (standard-orthonormal) picture:
        // psi_j(x) = phi_j(x) sqrt(m(x)). For equal-dimension fibers,
        // ||P1 - P2||_F / sqrt(2) = sqrt(sum_i sin^2 theta_i) bounds the
        // largest principal angle from above.
        auto projector = [n](const Fiber& fiber, const SpacePtr& sp) {
            std::vector<cplx> p(static_cast<std::size_t>(n) * n, cplx(0, 0));
            for (const auto& phi : fiber.basis)
                for (int x = 0; x < n; ++x) {
                    const cplx px = phi[x] * sp->sqrt_measure(x);
                    for (int y = 0; y < n; ++y)
                        p[static_cast<std::size_t>(x) * n + y] +=
                            px * std::conj(phi[y] * sp->sqrt_measure(y));
                }
            return p;
        };
        const auto p1 = projector(f1, dec1.space());
        const auto p2 = projector(f2, dec2.space());
        double fro2 = 0.0;
        for (std::size_t i = 0; i < p1.size(); ++i) fro2 += std::norm(p1[i] - p2[i]);
        const double angle = std::sqrt(fro2 / 2.0);
        r.max_angle = std::max(r.max_angle, f1.dim() == f2.dim()
                                                ? angle
                                                : std::numeric_limits<double>::infinity());

        // Basis-independent Gram data over the supplied test functions:
        // G_{jk} = <W_lambda v_j, W_lambda v_k>_{H_lambda}. Coefficients are
        // precomputed once per fiber.
        const std::size_t nb = basis.size();
        auto coeffs = [&basis, nb](const Fiber& fiber) {
            std::vector<std::vector<cplx>> e(nb);
            for (std::size_t j = 0; j < nb; ++j) {
                e[j].reserve(fiber.basis.size());
                for (const auto& phi : fiber.basis) e[j].push_back(inner_product(phi, basis[j].f));
            }
            return e;
        };
        const auto e1 = coeffs(f1);
        const auto e2 = coeffs(f2);
        for (std::size_t j = 0; j < nb; ++j) {
            for (std::size_t k = 0; k < nb; ++k) {
                cplx g1(0, 0), g2(0, 0);
                for (std::size_t i = 0; i < e1[j].size(); ++i) g1 += std::conj(e1[j][i]) * e1[k][i];
                for (std::size_t i = 0; i < e2[j].size(); ++i) g2 += std::conj(e2[j][i]) * e2[k][i];
                r.max_gram_gap = std::max(r.max_gram_gap, std::abs(g1 - g2));
            }
        }
    }
    r.max_gap = std::max({r.atom_gap, r.max_angle, r.max_gram_gap});
    return r;
}

/// max over (lambda, j) of |<phi_j(lambda), A f> - lambda <phi_j(lambda), f>|.
inline double eigenvalue_pairing_check(const DirectIntegralDecomposition& dec, const VertexFunction& f) {
    require_same_space(dec.space(), f.space, "eigenvalue_pairing_check");
    const VertexFunction af = apply_formal_all(dec.op, f);
    double worst = 0.0;
    for (const auto& fiber : dec.fibers)
        for (const auto& phi : fiber.basis)
            worst = std::max(worst,
                             std::abs(inner_product(phi, af) - fiber.lambda * inner_product(phi, f)));
    return worst;
}

}  // namespace eigenfiber
