// Acceptance suite: runs every gate criterion end to end and prints one
// pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "eigenfiber/checks.hpp"
#include "eigenfiber/config.hpp"
#include "eigenfiber/fibers.hpp"
#include "eigenfiber/growth.hpp"
#include "eigenfiber/io.hpp"
#include "eigenfiber/report.hpp"
#include "eigenfiber/sierpinski.hpp"
#include "support/corpus.hpp"

using namespace eigenfiber;

namespace {

struct Criterion {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Criterion> results;

void add(const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

constexpr std::uint64_t kSeed = 20240811;

int corpus_size_for_case(RngStream& rng, int case_id) {
    if (case_id < 3) return 200;  // pin a few cases at the size ceiling
    const double r = rng.uniform01();
    if (r < 0.85) return rng.uniform_int(2, 40);
    if (r < 0.95) return rng.uniform_int(41, 120);
    return rng.uniform_int(121, 200);
}

void corpus_suites() {
    const int kCases = 1000;
    double worst_plancherel = 0.0, worst_intertwining = 0.0, worst_reconstruction = 0.0;
    double worst_eigen = 0.0, worst_cc = 0.0, worst_agree = 0.0;
    double worst_inclusion = 0.0, worst_hs_excess = 0.0;
    int sizes_hi = 0;

    for (int case_id = 0; case_id < kCases; ++case_id) {
        RngStream rng(kSeed, "corpus/case" + std::to_string(case_id));
        const int n = corpus_size_for_case(rng, case_id);
        if (n > 120) ++sizes_hi;
        auto sp = corpus::random_space(rng, n, 0.1, 10.0);
        Kernel k = laplacian_from_graph(corpus::random_graph(rng, sp));
        const DirectIntegralDecomposition dec = build_decomposition(k, 1e-8);

        const auto fns = random_test_functions(sp, rng, 2);
        const double lam_lo = dec.measure.atoms.front().lambda;
        const double lam_hi = dec.measure.atoms.back().lambda;
        const double span = std::max(lam_hi - lam_lo, 1.0);
        double a = rng.uniform(lam_lo - 0.1 * span, lam_hi + 0.1 * span);
        double b = rng.uniform(lam_lo - 0.1 * span, lam_hi + 0.1 * span);
        if (a > b) std::swap(a, b);
        const std::vector<SpectralFunction> phis = {
            [](double) { return cplx(1, 0); },
            [](double s) { return cplx(s, 0); },
            [](double s) { return cplx(s * s, 0); },
            [](double s) { return cplx(std::exp(-s), 0); },
            [](double s) { return 1.0 / cplx(s, 1.0); },
            [a, b](double s) { return cplx(s >= a && s <= b ? 1 : 0, 0); },
        };
        for (const auto& phi : phis) {
            worst_plancherel = std::max(worst_plancherel, check_plancherel(dec, fns, phi));
            worst_intertwining = std::max(worst_intertwining, check_intertwining(dec, fns, phi));
        }
        worst_reconstruction = std::max(worst_reconstruction, check_reconstruction(dec, fns));
        worst_eigen = std::max(worst_eigen, check_eigen_residuals(dec));
        worst_cc = std::max(worst_cc, check_cc_residuals(dec));
        worst_agree = std::max(worst_agree, check_residual_agreement(dec));

        const WeightSequence omega = geometric_weight(sp, 0.5);
        const InclusionResult inc = c_omega_inclusion_check(dec, omega.omega());
        worst_inclusion = std::max(worst_inclusion, inc.aggregate - inc.budget);
        const HsGammaResult hs = hs_gamma_check(k, SmoothingPair{omega});
        worst_hs_excess = std::max(worst_hs_excess, hs.hs - std::sqrt(hs_norm_sq(SmoothingPair{omega})));
    }

    add("plancherel",
        worst_plancherel <= 1e-9,
        std::to_string(kCases) + " cases (" + std::to_string(sizes_hi) +
            " above 120 vertices), 6 multipliers, worst relative gap " +
            fmt("%.2e", worst_plancherel) + " (tol 1e-9)");
    add("intertwining", worst_intertwining <= 1e-9,
        "worst normalized transform gap " + fmt("%.2e", worst_intertwining) + " (tol 1e-9)");
    add("reconstruction", worst_reconstruction <= 1e-10,
        "worst relative round-trip error " + fmt("%.2e", worst_reconstruction) + " (tol 1e-10)");
    add("eigenfunction_residuals", worst_eigen <= 1e-9 && worst_cc <= 1e-9,
        "worst normalized residuals: direct " + fmt("%.2e", worst_eigen) + ", dual " +
            fmt("%.2e", worst_cc) + " (tol 1e-9)");
    add("residual_route_agreement", worst_agree <= 1e-12,
        "worst gap between the two residual routes " + fmt("%.2e", worst_agree) + " (tol 1e-12)");
    add("growth_inclusion", worst_inclusion <= 1e-10,
        "worst aggregate excess over the weight budget " + fmt("%.2e", worst_inclusion) +
            " (tol 1e-10)");
    add("growth_hs_bound", worst_hs_excess <= 1e-10,
        "worst excess of ||resolvent * smoothing||_HS over ||S||_HS " +
            fmt("%.2e", worst_hs_excess) + " (tol 1e-10)");
}

void growth_closed_form() {
    auto sp = make_uniform_space(2);
    Kernel k2 = laplacian_from_graph(GraphSpec(sp, {{0, 1, 1.0}}));
    SmoothingPair p{WeightSequence(sp, {0.5, 0.5})};
    const HsGammaResult r = hs_gamma_check(k2, p);
    const double err = std::abs(r.hs * r.hs - 0.3);
    add("growth_k2_closed_form", err <= 1e-12,
        "hs^2 = " + fmt("%.15f", r.hs * r.hs) + ", |hs^2 - 3/10| = " + fmt("%.2e", err) +
            " (tol 1e-12)");
}

void uniqueness_suite() {
    const int kCases = 100;
    double worst_angle = 0.0, worst_gram = 0.0, worst_atoms = 0.0;
    for (int case_id = 0; case_id < kCases; ++case_id) {
        RngStream rng(kSeed, "uniqueness/case" + std::to_string(case_id));
        const int n = rng.uniform_int(6, 24);
        auto sp = corpus::random_space(rng, n);
        // eigenvalue list with at least one forced double (and often more)
        std::vector<double> spectrum;
        double v = rng.uniform(-3.0, -2.0);
        for (int i = 0; i < n; ++i) {
            spectrum.push_back(v);
            v += rng.uniform(0.05, 1.0);
        }
        const int dup = rng.uniform_int(0, n - 2);
        spectrum[static_cast<std::size_t>(dup) + 1] = spectrum[static_cast<std::size_t>(dup)];
        std::sort(spectrum.begin(), spectrum.end());
        Kernel k = corpus::kernel_with_spectrum(rng, sp, spectrum);

        BuildOptions oa, ob;
        oa.degenerate_rotation_seed = 1000 + static_cast<std::uint64_t>(case_id);
        ob.degenerate_rotation_seed = 5000 + static_cast<std::uint64_t>(case_id);
        const auto da = build_decomposition(k, 1e-8, oa);
        const auto db = build_decomposition(k, 1e-8, ob);
        std::vector<CompactFunction> basis;
        for (int x = 0; x < n; ++x) basis.push_back(delta(sp, x));
        const UniquenessResult u = uniqueness_compare(da, db, basis);
        worst_angle = std::max(worst_angle, u.max_angle);
        worst_gram = std::max(worst_gram, u.max_gram_gap);
        worst_atoms = std::max(worst_atoms, u.atom_gap);
    }
    add("uniqueness",
        worst_angle <= 1e-8 && worst_gram <= 1e-10,
        std::to_string(kCases) + " degenerate cases with independent rotations: worst principal "
                                 "angle " +
            fmt("%.2e", worst_angle) + " (tol 1e-8), worst Gram gap " + fmt("%.2e", worst_gram) +
            " (tol 1e-10), atom gap " + fmt("%.2e", worst_atoms));
}

void gasket_suite() {
    const DecimationAnalysis an = decimation_analysis(4, 1e-8);

    bool counts_ok = true;
    long pow3 = 1;
    for (int n = 0; n <= 4; ++n) {
        const auto& g = an.graphs[static_cast<std::size_t>(n)];
        counts_ok = counts_ok && g.space->size() == 3 * (pow3 + 1) / 2 &&
                    static_cast<long>(g.edges.size()) == 3 * pow3;
        pow3 *= 3;
    }
    add("gasket_counts", counts_ok, "levels 0..4 match |V| = 3(3^n+1)/2 and |E| = 3^{n+1} exactly");

    bool zero_ok = true;
    for (int n = 0; n <= 4; ++n) {
        const auto grouped = group_eigenvalues(an.spectra[static_cast<std::size_t>(n)], 1e-8);
        zero_ok = zero_ok && std::abs(grouped.groups.front().lambda) < 1e-9 &&
                  grouped.groups.front().indices.size() == 1;
    }
    double zero_res = 0.0;
    for (const auto& recs : an.transitions)
        zero_res = std::max(zero_res, recs.front().restriction_vanishes ? 1.0 : recs.front().residual);
    add("gasket_zero_mode", zero_ok && zero_res <= 1e-8,
        "eigenvalue 0 simple at every level; constant restricts with residual " +
            fmt("%.2e", zero_res));

    double worst_res = 0.0;
    for (const auto& recs : an.transitions)
        for (const auto& r : recs)
            if (r.persistent) worst_res = std::max(worst_res, r.residual);
    add("gasket_restriction_residuals", worst_res <= 1e-8,
        "worst persistent restriction residual " + fmt("%.2e", worst_res) + " (tol 1e-8)");

    // quadratic fit: report residuals; confirmed on every transition from
    // level 1 up, explicitly flagged at 0 -> 1 where the all-boundary level-0
    // graph breaks the relation
    bool fits_ok = true;
    std::string fit_detail = "per-transition hypothesis residuals:";
    for (std::size_t t = 0; t < an.per_transition_fit.size(); ++t) {
        const auto& f = an.per_transition_fit[t];
        fit_detail += " " + std::to_string(t) + "->" + std::to_string(t + 1) + ": " +
                      fmt("%.2e", f.hypothesis_residual) +
                      (f.hypothesis_confirmed ? " (confirmed)" : " (flagged)");
        if (t == 0)
            fits_ok = fits_ok && !f.hypothesis_confirmed;  // must be flagged, not assumed
        else
            fits_ok = fits_ok && f.hypothesis_confirmed && f.hypothesis_residual <= 1e-6;
    }
    add("gasket_decimation_quadratic", fits_ok, fit_detail);

    const auto series = enumerate_series(an);
    const auto distinct = distinct_contracting_series(series);
    int rich = 0;
    double worst_ratio = 0.0;
    double worst_pointwise = 0.0;
    bool all_persist = true;
    for (const auto& s : distinct) {
        if (s.nonconstant && s.increments.size() >= 2) {
            ++rich;
            worst_ratio = std::max(worst_ratio, s.fitted_ratio);
        }
        const auto& g0 = an.graphs[static_cast<std::size_t>(s.m0)];
        std::vector<int> xs(g0.corners.begin(), g0.corners.end());
        // also the strongest point of the restriction
        {
            const auto& top = an.spectra[4];
            VertexFunction cur = top.eigenfunction(s.eigen_index);
            for (int n = 3; n >= s.m0; --n) {
                const auto& inj = an.injections[static_cast<std::size_t>(n)];
                auto r = VertexFunction::zero(an.graphs[static_cast<std::size_t>(n)].space);
                for (std::size_t i = 0; i < inj.size(); ++i) r[static_cast<int>(i)] = cur[inj[i]];
                cur = std::move(r);
            }
            int argmax = 0;
            for (int i = 0; i < cur.size(); ++i)
                if (std::abs(cur[i]) > std::abs(cur[argmax])) argmax = i;
            xs.push_back(argmax);
        }
        for (int x : xs) {
            const RenormalizedLimitReport rep = renormalized_limit_check(an, s.eigen_index, x, s.m0);
            all_persist = all_persist && rep.persistent_to_m0;
            if (rep.persistent_to_m0)
                worst_pointwise = std::max(worst_pointwise, rep.pointwise_max_gap);
        }
    }
    add("gasket_series_count", rich >= 3,
        std::to_string(rich) + " distinct nonconstant contracting series across transitions "
                               "0..4 (need >= 3)");
    add("gasket_series_ratio", worst_ratio <= 0.5 && rich >= 1,
        "worst fitted increment ratio " + fmt("%.4f", worst_ratio) +
            " (envelope 0.5, expected about 0.2)");
    add("gasket_pointwise", all_persist && worst_pointwise <= 1e-8,
        "renormalized pointwise identity: worst normalized gap " + fmt("%.2e", worst_pointwise) +
            " (tol 1e-8)");
}

void determinism_suite() {
    auto run_once = []() {
        RngStream rng(kSeed, "determinism/case");
        auto sp = corpus::random_space(rng, 12);
        Kernel k = laplacian_from_graph(corpus::random_graph(rng, sp));
        const auto dec = build_decomposition(k, 1e-8);
        const auto fns = random_test_functions(sp, rng, 2);
        Report rep;
        rep.command = "decompose";
        rep.emit_timestamp = false;
        rep.config_echo = RunConfig().echo();
        rep.set_spectrum(dec);
        rep.add_check("plancherel_one",
                      check_plancherel(dec, fns, [](double) { return cplx(1, 0); }), 1e-9);
        rep.add_check("reconstruction", check_reconstruction(dec, fns), 1e-10);
        return rep.to_json().dump(2) + decomposition_to_json(dec).dump(2);
    };
    const std::string a = run_once();
    const std::string b = run_once();
    add("determinism", a == b,
        "two seeded runs serialize byte-identically with the timestamp suppressed (" +
            std::to_string(a.size()) + " bytes)");
}

void truncation_stability_note() {
    std::printf(
        "[NOTE] the continuum statements (strong local domains, subexponential bounds on the\n"
        "       infinite fractafold, the n -> infinity limit itself) are not reproducible at\n"
        "       desk scale; substituted: truncation stability of subexponential norms across\n"
        "       levels 2..5 and the finite-level pointwise decimation identity above.\n");

    const DecimationAnalysis an = decimation_analysis(5, 1e-8);
    const auto distinct = distinct_contracting_series(enumerate_series(an));
    const DecimationSeries* pick = nullptr;
    for (const auto& s : distinct)
        if (s.nonconstant && s.m0 <= 2 && s.increments.size() >= 2 &&
            (pick == nullptr || s.lambdas.back() < pick->lambdas.back()))
            pick = &s;
    bool ok = pick != nullptr;
    std::string detail;
    if (ok) {
        // restrictions of the chosen eigenfunction across levels 2..5
        std::vector<VertexFunction> restr(6, VertexFunction());
        restr[5] = an.spectra[5].eigenfunction(pick->eigen_index);
        const double sup = restr[5].max_abs();
        for (int i = 0; i < restr[5].size(); ++i) restr[5][i] /= sup;
        for (int n = 4; n >= 2; --n) {
            const auto& inj = an.injections[static_cast<std::size_t>(n)];
            auto r = VertexFunction::zero(an.graphs[static_cast<std::size_t>(n)].space);
            for (std::size_t i = 0; i < inj.size(); ++i)
                r[static_cast<int>(i)] = restr[static_cast<std::size_t>(n) + 1][inj[i]];
            restr[static_cast<std::size_t>(n)] = std::move(r);
        }
        for (double alpha : {0.5, 1.0}) {
            std::vector<double> series_norms, const_norms;
            for (int n = 2; n <= 5; ++n) {
                const auto& g = an.graphs[static_cast<std::size_t>(n)];
                const Metric rho = hop_metric(g);
                series_norms.push_back(
                    subexponential_check(restr[static_cast<std::size_t>(n)], rho, g.corners[0], {alpha})
                        .norms[0]
                        .second);
                VertexFunction ones(g.space,
                                    std::vector<cplx>(static_cast<std::size_t>(g.space->size()), cplx(1, 0)));
                const_norms.push_back(
                    subexponential_check(ones, rho, g.corners[0], {alpha}).norms[0].second);
            }
            // series: monotone nonincreasing, bounded below by zero
            for (std::size_t i = 0; i + 1 < series_norms.size(); ++i)
                ok = ok && series_norms[i + 1] <= series_norms[i] + 1e-9;
            // constant: monotone nondecreasing and saturating
            for (std::size_t i = 0; i + 1 < const_norms.size(); ++i)
                ok = ok && const_norms[i + 1] + 1e-9 >= const_norms[i];
            ok = ok && const_norms.back() <= 1.5 * const_norms.front();
            detail += "alpha=" + fmt("%.1f", alpha) + ": series " + fmt("%.4f", series_norms.front()) +
                      " -> " + fmt("%.4f", series_norms.back()) + " (monotone down), constant " +
                      fmt("%.4f", const_norms.front()) + " -> " + fmt("%.4f", const_norms.back()) +
                      " (monotone up, bounded); ";
        }
    }
    add("truncation_stability", ok, detail.empty() ? "no contracting series found" : detail);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    corpus_suites();
    growth_closed_form();
    uniqueness_suite();
    gasket_suite();
    determinism_suite();
    truncation_stability_note();
    const auto t1 = std::chrono::steady_clock::now();

    bool all = true;
    for (const auto& c : results) {
        std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        all = all && c.pass;
    }
    std::printf("acceptance: %s (%.1f s)\n", all ? "pass" : "fail",
                std::chrono::duration<double>(t1 - t0).count());
    return all ? 0 : 1;
}
