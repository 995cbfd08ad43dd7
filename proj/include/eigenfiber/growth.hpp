#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eigenfiber/eigensolve.hpp"
#include "eigenfiber/fibers.hpp"
#include "eigenfiber/kernel.hpp"
#include "eigenfiber/metric.hpp"
#include "eigenfiber/space.hpp"

namespace eigenfiber {

/// Smoothing weight: omega(x) in (0,1] with sum omega^2 <= 1.
class WeightSequence {
public:
    WeightSequence(SpacePtr space, std::vector<double> omega)
        : space_(std::move(space)), omega_(std::move(omega)) {
        if (static_cast<int>(omega_.size()) != space_->size())
            throw std::invalid_argument("weight: omega does not match the vertex set");
        sum_sq_ = 0.0;
        for (double w : omega_) {
            if (!(w > 0.0) || w > 1.0 || !std::isfinite(w))
                throw std::invalid_argument("weight: omega values must lie in (0, 1]");
            sum_sq_ += w * w;
        }
        if (sum_sq_ > 1.0 + 1e-12)
            throw std::invalid_argument("weight: sum of omega^2 exceeds 1");
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<double>& omega() const { return omega_; }
    double omega_at(int i) const { return omega_[static_cast<std::size_t>(i)]; }
    double sum_sq() const { return sum_sq_; }

private:
    SpacePtr space_;
    std::vector<double> omega_;
    double sum_sq_ = 0.0;
};

/// Geometric default weight omega(x_k) = c r^k with the constant chosen so
/// that sum omega^2 = 1 (saturating the normalization).
inline WeightSequence geometric_weight(SpacePtr space, double ratio = 0.5) {
    if (!(ratio > 0.0) || ratio >= 1.0)
        throw std::invalid_argument("geometric weight: ratio must lie in (0, 1)");
    const int n = space->size();
    std::vector<double> w(static_cast<std::size_t>(n));
    double ssq = 0.0;
    for (int k = 0; k < n; ++k) {
        w[static_cast<std::size_t>(k)] = std::pow(ratio, k);
        ssq += w[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
    }
    const double c = 1.0 / std::sqrt(ssq);
    for (double& v : w) v = std::min(1.0, v * c);
    return WeightSequence(std::move(space), std::move(w));
}

/// The pair S = M_omega, T = M_{1/omega} with the smoothed space
/// H_+ = { u : sum |u|^2 / omega^2 m < inf } and its rough counterpart
/// H_- = { u : sum omega^2 |u|^2 m < inf }, realized as norm evaluators.
struct SmoothingPair {
    WeightSequence weight;

    explicit SmoothingPair(WeightSequence w) : weight(std::move(w)) {}

    VertexFunction apply_smoothing(const VertexFunction& u) const {  // S = M_omega
        require_same_space(weight.space(), u.space, "smoothing pair");
        VertexFunction out = u;
        for (int i = 0; i < out.size(); ++i) out[i] *= weight.omega_at(i);
        return out;
    }
    VertexFunction apply_roughening(const VertexFunction& u) const {  // T = M_{1/omega} = S^{-1}
        require_same_space(weight.space(), u.space, "smoothing pair");
        VertexFunction out = u;
        for (int i = 0; i < out.size(); ++i) out[i] /= weight.omega_at(i);
        return out;
    }

    double plus_norm_sq(const VertexFunction& u) const {  // <u,u>_+ = ||T u||^2
        require_same_space(weight.space(), u.space, "smoothing pair");
        double s = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            const double a = std::abs(u[i]);
            const double w = weight.omega_at(i);
            s += a * a / (w * w) * u.space->measure(i);
        }
        return s;
    }
    double minus_norm_sq(const VertexFunction& u) const {  // <u,u>_- = ||S u||^2
        require_same_space(weight.space(), u.space, "smoothing pair");
        double s = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            const double a = std::abs(u[i]);
            const double w = weight.omega_at(i);
            s += w * w * a * a * u.space->measure(i);
        }
        return s;
    }
};

/// ||S||_HS^2 on l2(V,m) = sum_x omega(x)^2; the measure factors cancel
/// against the m-orthonormal basis e_x / sqrt(m(x)).
inline double hs_norm_sq(const SmoothingPair& p) { return p.weight.sum_sq(); }

struct HsGammaResult {
    double hs = 0.0;     // ||gamma(L) M_{omega b}||_HS
    double bound = 0.0;  // sup_{lambda in spec} |gamma(lambda)| * ||M_{omega b}||_HS
    bool within_bound = false;
};

/// Hilbert-Schmidt norm of gamma(L) S by dense spectral calculus, against
/// the bound sup|gamma| ||S||_HS. The optional second weight b generalizes
/// the multiplication operator (default b == 1). gamma defaults to the
/// resolvent s -> 1/(s+i).
inline HsGammaResult hs_gamma_check(const Kernel& k, const SmoothingPair& p,
                                    const SpectralFunction& gamma = {},
                                    const std::vector<double>& b = {}) {
    require_same_space(k.space(), p.weight.space(), "hs_gamma_check");
    const int n = k.size();
    std::vector<double> bw(static_cast<std::size_t>(n), 1.0);
    if (!b.empty()) {
        if (static_cast<int>(b.size()) != n)
            throw std::invalid_argument("hs_gamma_check: second weight does not match the vertex set");
        bw = b;
    }
    const SpectralFunction g = gamma ? gamma : SpectralFunction([](double s) { return 1.0 / cplx(s, 1.0); });

    const EigenDecomposition dec = eigendecompose(k);
    // In the m-orthonormal basis the operator matrix of L is the symmetrized
    // B and M_omega is diag(omega); column x of gamma(B) diag(omega b) has
    // squared norm (omega b)(x)^2 sum_i |gamma(lambda_i)|^2 |psi_i(x)|^2.
    std::vector<double> gabs2(static_cast<std::size_t>(n));
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx gv = g(dec.eigenvalues[static_cast<std::size_t>(i)]);
        gabs2[static_cast<std::size_t>(i)] = std::norm(gv);
        gmax = std::max(gmax, std::abs(gv));
    }
    double hs2 = 0.0;
    double wsum2 = 0.0;
    for (int x = 0; x < n; ++x) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += gabs2[static_cast<std::size_t>(i)] * std::norm(dec.vec(x, i));
        const double w = p.weight.omega_at(x) * bw[static_cast<std::size_t>(x)];
        hs2 += w * w * col;
        wsum2 += w * w;
    }
    HsGammaResult r;
    r.hs = std::sqrt(hs2);
    r.bound = gmax * std::sqrt(wsum2);
    r.within_bound = r.hs <= r.bound + 1e-10;
    return r;
}

struct InclusionResult {
    double max_weighted_norm = 0.0;  // max over (lambda, j) of ||phi_j(lambda)||_{C_omega}^2
    double aggregate = 0.0;          // sum_lambda mass sum_{j,n} |omega(n) <phi_j, v_n>|^2
    double budget = 0.0;             // sum omega(n)^2
    bool within_budget = false;
};

/// Quantitative form of the inclusion of fibers into C_omega(V): the
/// aggregate sum_lambda mass sum_{j,n} |omega(n) <phi_j(lambda), v_n>|^2 over
/// the m-orthonormal basis v_n = delta_n / sqrt(m(n)) must not exceed
/// sum omega(n)^2. On a finite space it meets the budget with equality.
/// omega only needs to be nonnegative here.
inline InclusionResult c_omega_inclusion_check(const DirectIntegralDecomposition& dec,
                                               const std::vector<double>& omega) {
    const int n = dec.space()->size();
    if (static_cast<int>(omega.size()) != n)
        throw std::invalid_argument("c_omega_inclusion_check: omega does not match the vertex set");
    InclusionResult r;
    for (double w : omega) r.budget += w * w;
    for (std::size_t a = 0; a < dec.fibers.size(); ++a) {
        const double mass = dec.measure.atoms[a].mass;
        for (const auto& phi : dec.fibers[a].basis) {
            r.max_weighted_norm = std::max(r.max_weighted_norm, weighted_norm_sq(phi, omega));
            for (int x = 0; x < n; ++x) {
                // |<phi, v_x>| with v_x = delta_x / sqrt(m(x))
                const double coeff = std::abs(phi[x]) * dec.space()->sqrt_measure(x);
                r.aggregate += mass * omega[static_cast<std::size_t>(x)] *
                               omega[static_cast<std::size_t>(x)] * coeff * coeff;
            }
        }
    }
    r.within_budget = r.aggregate <= r.budget + 1e-10;
    return r;
}

/// <phi, f>_d as the concrete measure-weighted sum; on finite spaces this is
/// the dual pairing evaluated term by term (same summation order, so the two
/// agree exactly).
inline cplx fourier_coefficient(const VertexFunction& phi, const VertexFunction& f) {
    require_same_space(phi.space, f.space, "fourier_coefficient");
    cplx s(0.0, 0.0);
    for (int i = 0; i < phi.size(); ++i)
        s += std::conj(phi[i]) * f[i] * phi.space->measure(i);
    return s;
}

struct SubexponentialResult {
    std::vector<std::pair<double, double>> norms;  // (alpha, weighted norm sq)
    bool had_unreachable = false;
};

/// For each alpha, the weighted norm sum e^{-2 alpha rho(x0,x)} |phi|^2 m.
/// Unreachable vertices contribute weight zero and are flagged.
inline SubexponentialResult subexponential_check(const VertexFunction& phi, const Metric& metric,
                                                 int x0, const std::vector<double>& alphas) {
    SubexponentialResult out;
    const int n = phi.size();
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        dist[static_cast<std::size_t>(i)] = metric(x0, i);
        if (std::isinf(dist[static_cast<std::size_t>(i)])) out.had_unreachable = true;
    }
    for (double alpha : alphas) {
        if (!(alpha > 0.0))
            throw std::invalid_argument("subexponential_check: alpha must be positive");
        std::vector<double> w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double d = dist[static_cast<std::size_t>(i)];
            w[static_cast<std::size_t>(i)] = std::isinf(d) ? 0.0 : std::exp(-alpha * d);
        }
        out.norms.emplace_back(alpha, weighted_norm_sq(phi, w));
    }
    return out;
}

/// Measure of the closed metric ball: sum of m(y) over rho(x,y) <= R.
inline double ball_volume(const SpacePtr& sp, const Metric& metric, int x, double R) {
    if (R < 0.0) throw std::invalid_argument("ball_volume: negative radius");
    double s = 0.0;
    for (int y = 0; y < sp->size(); ++y)
        if (metric(x, y) <= R) s += sp->measure(y);
    return s;
}

}  // namespace eigenfiber
