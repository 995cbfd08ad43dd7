#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eigenfiber/checks.hpp"
#include "eigenfiber/config.hpp"
#include "eigenfiber/fibers.hpp"
#include "eigenfiber/growth.hpp"
#include "eigenfiber/io.hpp"
#include "eigenfiber/report.hpp"
#include "eigenfiber/sierpinski.hpp"

namespace {

using namespace eigenfiber;
namespace fs = std::filesystem;

RunConfig load_run_config(const std::string& config_path) {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ParseError("cannot open config '" + config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        kv = parse_config_text(ss.str());
    }
    apply_env_overrides(kv, RunConfig::known_keys());
    return RunConfig::from_map(kv);
}

std::vector<double> resolve_omega(const RunConfig& cfg, const std::string& omega_path,
                                  const SpacePtr& space) {
    if (!omega_path.empty() || cfg.omega_mode == "file") {
        if (omega_path.empty())
            throw ParseError("omega.mode=file requires --omega");
        return load_omega(omega_path, space);
    }
    return geometric_weight(space, cfg.omega_ratio).omega();
}

int finish(Report& rep, const fs::path& out_dir, const std::string& name) {
    rep.write((out_dir / name).string());
    for (const auto& c : rep.checks)
        std::printf("[%s] %s: max_error=%.3e tolerance=%.3e\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.max_error, c.tolerance);
    std::printf("%s\n", rep.overall_pass() ? "overall: pass" : "overall: fail");
    return rep.overall_pass() ? 0 : 1;
}

int run_decompose(const std::string& space_path, const std::string& kernel_path,
                  const std::string& graph_path, const std::string& omega_path,
                  const std::string& config_path, const std::string& out,
                  bool no_timestamp, std::uint64_t rotate_seed_cli) {
    RunConfig cfg = load_run_config(config_path);
    if (no_timestamp) cfg.emit_timestamp = false;
    if (rotate_seed_cli != 0) cfg.rotate_seed = rotate_seed_cli;

    SpacePtr space = load_space(space_path);
    Kernel kernel = !kernel_path.empty() ? load_kernel(kernel_path, space)
                                         : laplacian_from_graph(load_graph(graph_path, space));
    std::vector<double> omega = resolve_omega(cfg, omega_path, space);

    BuildOptions opts;
    opts.tol_verify = cfg.tol_verify;
    opts.degenerate_rotation_seed = cfg.rotate_seed;
    DirectIntegralDecomposition dec = build_decomposition(kernel, cfg.tol_group, opts);

    RngStream rng(cfg.seed, "decompose/test-functions");
    const auto fns = random_test_functions(space, rng, 8);

    Report rep;
    rep.command = "decompose";
    rep.config_echo = cfg.echo();
    rep.emit_timestamp = cfg.emit_timestamp;
    rep.set_spectrum(dec);

    for (const auto& [name, phi] : make_phi_set(cfg)) {
        rep.add_check("plancherel_" + name, check_plancherel(dec, fns, phi), 1e-9);
        rep.add_check("intertwining_" + name, check_intertwining(dec, fns, phi), 1e-9);
        rep.add_check("pairing_identity_" + name, check_pairing_identity(dec, fns, phi), 1e-10);
        rep.add_check("kernel_expansion_" + name, check_kernel_expansion(dec, phi), 1e-10);
    }
    rep.add_check("reconstruction", check_reconstruction(dec, fns), 1e-10);
    rep.add_check("eigenfunction_residuals", check_eigen_residuals(dec), cfg.tol_verify);
    rep.add_check("cc_eigenfunction_residuals", check_cc_residuals(dec), cfg.tol_verify);
    rep.add_check("residual_route_agreement", check_residual_agreement(dec), 1e-12);
    rep.add_check("eigenvalue_pairing", check_eigenvalue_pairing(dec, fns), 1e-10);
    rep.add_flag("completeness_rank", check_completeness_rank(dec) == 0);
    rep.add_check("projector_consistency", check_projector_consistency(dec, fns), 1e-9);
    rep.add_check("kernel_eigenfunction", check_kernel_eigenfunction(dec), cfg.tol_verify);

    const InclusionResult inc = c_omega_inclusion_check(dec, omega);
    rep.add_check("c_omega_inclusion", std::max(0.0, inc.aggregate - inc.budget), 1e-10);

    // hs bounds need omega in (0,1]; clamp-free: reuse only when valid
    bool omega_valid = true;
    double ssq = 0.0;
    for (double w : omega) {
        if (!(w > 0.0) || w > 1.0) omega_valid = false;
        ssq += w * w;
    }
    if (omega_valid && ssq <= 1.0 + 1e-12) {
        SmoothingPair pair{WeightSequence(space, omega)};
        const HsGammaResult hs_res = hs_gamma_check(kernel, pair);
        rep.add_check("hs_bound_resolvent", std::max(0.0, hs_res.hs - hs_res.bound), 1e-10);
        const double t = cfg.exp_neg_t;
        const HsGammaResult hs_exp = hs_gamma_check(
            kernel, pair, [t](double s) { return cplx(std::exp(-t * s), 0.0); });
        rep.add_check("hs_bound_exp_neg", std::max(0.0, hs_exp.hs - hs_exp.bound), 1e-10);
    }

    fs::create_directories(out);
    save_decomposition(dec, (fs::path(out) / "decomposition.json").string());
    if (cfg.dump_fibers) save_fibers_csv(dec, (fs::path(out) / "fibers.csv").string());
    return finish(rep, out, "report.json");
}

void write_decimation_csv(const DecimationAnalysis& an,
                          const std::vector<DecimationSeries>& series, const std::string& path) {
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("cannot write '" + path + "'");
    csv << "level,eigen_index,lambda,persistent,lambda_coarse,s_m,increment_ratio\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const auto& recs : an.transitions) {
        for (const auto& r : recs) {
            const int level = r.transition + 1;
            csv << level << ',' << r.eigen_index << ',' << num(r.lambda_fine) << ','
                << (r.persistent ? 1 : 0) << ',' << (r.matched ? num(r.lambda_coarse) : "") << ','
                << num(std::pow(5.0, level) * r.lambda_fine) << ',';
            if (level == an.top_level && !std::isnan(series[static_cast<std::size_t>(r.eigen_index)].fitted_ratio))
                csv << num(series[static_cast<std::size_t>(r.eigen_index)].fitted_ratio);
            csv << '\n';
        }
    }
}

int run_gasket(int level, const std::string& config_path, const std::string& out,
               bool no_timestamp) {
    RunConfig cfg = load_run_config(config_path);
    if (no_timestamp) cfg.emit_timestamp = false;
    if (level >= 0) cfg.gasket_level = level;
    if (cfg.gasket_level > cfg.gasket_cap)
        throw ParseError("gasket level " + std::to_string(cfg.gasket_level) + " exceeds cap " +
                         std::to_string(cfg.gasket_cap));
    const int N = cfg.gasket_level;

    DecimationAnalysis an = decimation_analysis(N, cfg.tol_decimate, cfg.gasket_cap);
    const auto series = enumerate_series(an);
    const auto distinct = distinct_contracting_series(series);

    Report rep;
    rep.command = "gasket";
    rep.config_echo = cfg.echo();
    rep.emit_timestamp = cfg.emit_timestamp;
    {
        const auto grouped = group_eigenvalues(an.spectra[static_cast<std::size_t>(N)], cfg.tol_group);
        for (const auto& grp : grouped.groups)
            rep.spectrum.emplace_back(grp.lambda,
                                      std::make_pair(static_cast<int>(grp.indices.size()), 1.0));
    }

    // structural invariants
    {
        bool counts_ok = true;
        long pow3 = 1;
        for (int n = 0; n <= N; ++n) {
            const auto& g = an.graphs[static_cast<std::size_t>(n)];
            counts_ok = counts_ok && g.space->size() == 3 * (pow3 + 1) / 2 &&
                        static_cast<long>(g.edges.size()) == 3 * pow3;
            pow3 *= 3;
        }
        rep.add_flag("counts_closed_form", counts_ok);
    }
    {
        double lo = 0.0, hi = 0.0;
        for (int n = 0; n <= N; ++n) {
            const auto& ev = an.spectra[static_cast<std::size_t>(n)].eigenvalues;
            lo = std::min(lo, ev.front());
            hi = std::max(hi, ev.back());
        }
        rep.add_check("spectral_nonnegative", std::max(0.0, -lo), 1e-10 * std::max(1.0, hi));
        rep.add_flag("spectral_upper_bound", hi <= 2.0 * 4.0 + 1e-9);
    }
    {
        bool simple = true;
        for (int n = 0; n <= N; ++n) {
            const auto grouped = group_eigenvalues(an.spectra[static_cast<std::size_t>(n)], cfg.tol_group);
            simple = simple && std::abs(grouped.groups.front().lambda) <= 1e-9 &&
                     grouped.groups.front().indices.size() == 1;
        }
        rep.add_flag("zero_mode_simple", simple);
        // the constant restricts exactly through every transition
        double worst = 0.0;
        for (const auto& recs : an.transitions) {
            if (recs.empty()) continue;
            const auto& r0 = recs.front();  // ascending eigenvalues: index 0 is the zero mode
            worst = std::max(worst, r0.restriction_vanishes ? 1.0 : r0.residual);
        }
        rep.add_check("zero_mode_persistent", worst, cfg.tol_decimate);
    }
    {
        double worst = 0.0;
        for (const auto& recs : an.transitions)
            for (const auto& r : recs)
                if (r.persistent) worst = std::max(worst, r.residual);
        rep.add_check("persistent_restriction_residuals", worst, cfg.tol_decimate);
    }
    {
        double worst_ratio = 0.0;
        double worst_pointwise = 0.0;
        for (const auto& ser : distinct) {
            if (!std::isnan(ser.fitted_ratio) && ser.nonconstant)
                worst_ratio = std::max(worst_ratio, ser.fitted_ratio);
            // pointwise identity at the three corners of V_{m0} and at the
            // max-|phi| vertex of the restriction
            const auto& g0 = an.graphs[static_cast<std::size_t>(ser.m0)];
            std::vector<int> xs(g0.corners.begin(), g0.corners.end());
            const RenormalizedLimitReport probe = renormalized_limit_check(an, ser.eigen_index, g0.corners[0], ser.m0);
            if (probe.persistent_to_m0) {
                for (int x : xs) {
                    const RenormalizedLimitReport t5 = renormalized_limit_check(an, ser.eigen_index, x, ser.m0);
                    worst_pointwise = std::max(worst_pointwise, t5.pointwise_max_gap);
                }
            }
        }
        rep.add_check("series_ratio_envelope", worst_ratio, 0.5);
        rep.add_check("renormalized_pointwise", worst_pointwise, 1e-8);
    }
    if (N >= 1) {
        // volume-growth premise on the finite truncation: closed balls exhaust the
        // graph beyond the diameter and e^{-alpha R} m(B(x,R)) is then
        // decreasing; alpha-monotonicity of the subexponential norms.
        const auto& g = an.graphs[static_cast<std::size_t>(N)];
        const Metric rho = hop_metric(g);
        const int x0 = g.corners[0];
        double diam = 0.0;
        for (int y = 0; y < g.space->size(); ++y) diam = std::max(diam, rho(x0, y));
        bool monotone = true;
        double prev = -1.0;
        for (int R = 0; R <= static_cast<int>(diam); ++R) {
            const double vol = ball_volume(g.space, rho, x0, R);
            monotone = monotone && vol >= prev;
            prev = vol;
        }
        monotone = monotone && prev == g.space->total_mass();
        rep.add_flag("ball_volume_monotone", monotone);

        const auto& top = an.spectra[static_cast<std::size_t>(N)];
        const VertexFunction phi1 = top.eigenfunction(std::min(1, top.n - 1));
        const SubexponentialResult sub = subexponential_check(phi1, rho, x0, {0.5, 1.0, 2.0});
        bool alpha_monotone = !sub.had_unreachable;
        for (std::size_t i = 0; i + 1 < sub.norms.size(); ++i)
            alpha_monotone = alpha_monotone && sub.norms[i + 1].second <= sub.norms[i].second + 1e-12;
        rep.add_flag("subexponential_alpha_monotone", alpha_monotone);
    }

    // gasket summary block
    nlohmann::ordered_json gj;
    gj["level"] = N;
    auto fit_json = [](const QuadraticFit& f) {
        nlohmann::ordered_json j;
        j["pair_count"] = f.pair_count;
        j["coeffs"] = {f.coeffs[0], f.coeffs[1], f.coeffs[2]};
        j["max_fit_residual"] = f.max_fit_residual;
        j["hypothesis_residual"] = f.hypothesis_residual;
        j["hypothesis_z_times_5_minus_z"] = f.hypothesis_confirmed ? "confirmed" : "unconfirmed";
        return j;
    };
    auto& fits = gj["transition_fits"] = nlohmann::ordered_json::array();
    for (const auto& f : an.per_transition_fit) fits.push_back(fit_json(f));
    gj["pooled_fit"] = fit_json(an.pooled_fit);
    auto& sj = gj["contracting_series"] = nlohmann::ordered_json::array();
    for (const auto& ser : distinct) {
        nlohmann::ordered_json row;
        row["eigen_index"] = ser.eigen_index;
        row["m0"] = ser.m0;
        row["lambdas"] = ser.lambdas;
        row["s"] = ser.s;
        row["nonconstant"] = ser.nonconstant;
        if (!std::isnan(ser.fitted_ratio)) row["fitted_ratio"] = ser.fitted_ratio;
        sj.push_back(std::move(row));
    }
    int nonconstant_count = 0;
    for (const auto& ser : distinct)
        if (ser.nonconstant && ser.increments.size() >= 2) ++nonconstant_count;
    gj["nonconstant_contracting_series"] = nonconstant_count;
    rep.gasket = std::move(gj);

    fs::create_directories(out);
    write_decimation_csv(an, series, (fs::path(out) / "decimation.csv").string());
    return finish(rep, out, "report.json");
}

int run_verify(const std::string& a_path, const std::string& b_path, const std::string& out,
               const std::string& config_path, bool no_timestamp) {
    RunConfig cfg = load_run_config(config_path);
    if (no_timestamp) cfg.emit_timestamp = false;

    const DirectIntegralDecomposition a = load_decomposition(a_path);
    const DirectIntegralDecomposition b = load_decomposition(b_path);
    if (!a.op.same_kernel(b.op))
        throw ParseError("verify: decomposition dumps come from different kernels");

    std::vector<CompactFunction> basis;
    for (int x = 0; x < a.space()->size(); ++x) basis.push_back(delta(a.space(), x));
    const UniquenessResult u = uniqueness_compare(a, b, basis);

    Report rep;
    rep.command = "verify";
    rep.config_echo = cfg.echo();
    rep.emit_timestamp = cfg.emit_timestamp;
    rep.set_spectrum(a);
    rep.add_check("atoms_match", u.atom_gap, cfg.tol_group);
    rep.add_check("span_principal_angles", u.max_angle, 1e-8);
    rep.add_check("gram_invariance", u.max_gram_gap, 1e-10);

    fs::create_directories(out);
    return finish(rep, out, "report.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expansion in generalized eigenfunctions for operators on discrete measure spaces"};
    app.require_subcommand(1);

    std::string space_path, kernel_path, graph_path, omega_path, config_path, out = "out";
    bool no_timestamp = false;
    std::uint64_t rotate_seed = 0;

    auto* dec = app.add_subcommand("decompose", "build the expansion and run the identity suite");
    dec->add_option("--space", space_path, "space file (vertex_id<TAB>measure)")->required();
    auto* kopt = dec->add_option("--kernel", kernel_path, "Hermitian kernel file");
    dec->add_option("--graph", graph_path, "weighted graph file")->excludes(kopt);
    dec->add_option("--omega", omega_path, "weight file (vertex_id<TAB>omega)");
    dec->add_option("--config", config_path, "key=value config file");
    dec->add_option("--out", out, "output directory");
    dec->add_flag("--no-timestamp", no_timestamp, "suppress the report timestamp");
    dec->add_option("--rotate-seed", rotate_seed, "seeded rotation inside degenerate eigenspaces");

    int level = -1;
    auto* gas = app.add_subcommand("gasket", "gasket decimation and renormalized-limit checks");
    gas->add_option("--level", level, "top approximation level")->required();
    gas->add_option("--config", config_path, "key=value config file");
    gas->add_option("--out", out, "output directory");
    gas->add_flag("--no-timestamp", no_timestamp, "suppress the report timestamp");

    std::string a_path, b_path;
    auto* ver = app.add_subcommand("verify", "compare two decomposition dumps of one kernel");
    ver->add_option("--a", a_path, "decomposition dump A")->required();
    ver->add_option("--b", b_path, "decomposition dump B")->required();
    ver->add_option("--config", config_path, "key=value config file");
    ver->add_option("--out", out, "output directory");
    ver->add_flag("--no-timestamp", no_timestamp, "suppress the report timestamp");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (dec->parsed()) {
            if (kernel_path.empty() && graph_path.empty())
                throw eigenfiber::ParseError("decompose: need --kernel or --graph");
            return run_decompose(space_path, kernel_path, graph_path, omega_path, config_path, out,
                                 no_timestamp, rotate_seed);
        }
        if (gas->parsed()) return run_gasket(level, config_path, out, no_timestamp);
        if (ver->parsed()) return run_verify(a_path, b_path, out, config_path, no_timestamp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
