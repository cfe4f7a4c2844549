// Experiment runner: characteristic-root sweeps, asymptotic profiles,
// level-set contact indices, Lp-Lq decay experiments, van der Corput model
// integrals, and dispersive kernel scans.
//
// Exit codes: 0 ok, 1 config/parse, 2 hyperbolicity, 3 convergence,
// 4 resolution/box.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hyplab/asymint.hpp"
#include "hyplab/spectral.hpp"
#include "hyplab/csvio.hpp"
#include "hyplab/experiments.hpp"
#include "hyplab/geometry.hpp"
#include "hyplab/oscillatory.hpp"

namespace fs = std::filesystem;
using namespace hyplab;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    double tol = 1e-8;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open config file " + path);
    json js;
    try {
        in >> js;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return js;
}

symbol::OperatorSpec load_operator(const json& cfg, const fs::path& base) {
    if (!cfg.contains("operator")) throw ConfigError("config needs an \"operator\" file entry");
    fs::path p = cfg.at("operator").get<std::string>();
    if (p.is_relative() && !fs::exists(p)) {
        const fs::path joined = base / p;
        if (fs::exists(joined)) p = joined;
    }
    return symbol::OperatorSpec::from_json(load_json(p.string()));
}

std::vector<double> parse_series(const json& js) {
    std::vector<double> out;
    if (js.is_array()) {
        for (const auto& v : js) out.push_back(v.get<double>());
        return out;
    }
    const double from = js.at("from").get<double>();
    const double to = js.at("to").get<double>();
    const int count = js.at("count").get<int>();
    if (count < 1) throw ConfigError("series count must be positive");
    const bool geometric = js.value("scale", std::string("linear")) == "geometric";
    if (geometric && !(from > 0.0 && to > 0.0))
        throw ConfigError("geometric series need positive endpoints");
    for (int i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(geometric ? from * std::pow(to / from, s) : from + (to - from) * s);
    }
    return out;
}

io::RunManifest make_manifest(const json& cfg, const CommonArgs& args) {
    io::RunManifest man;
    man.config_hash = io::fnv1a(cfg.dump() + "|seed=" + std::to_string(args.seed));
    man.seed = args.seed;
    man.tolerances["tol"] = args.tol;
    return man;
}

// ---------------------------------------------------------------------------

int cmd_roots(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const auto op = load_operator(cfg, fs::path(args.config).parent_path());
    const auto times = parse_series(cfg.value("t", json({{"from", -10.0}, {"to", 10.0}, {"count", 41}})));
    const int samples = cfg.value("samples", 16);

    const auto rf = symbol::hyperbolicity_certificate(op, times, samples);

    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);
    std::vector<std::string> header{"t"};
    for (int d = 0; d < op.n(); ++d) header.push_back("omega" + std::to_string(d + 1));
    for (int k = 0; k < op.m(); ++k) header.push_back("mu" + std::to_string(k + 1));
    for (int k = 0; k < op.m(); ++k) header.push_back("dmu" + std::to_string(k + 1));
    header.push_back("deriv_fd_rel_err");
    io::CsvWriter csv(fs::path(args.out_dir) / "roots.csv", header);

    double worst_fd = 0.0;
    for (const double t : times) {
        for (const auto& w : symbol::sphere_points(op.n(), samples)) {
            const auto mu = symbol::unit_roots(op, t, w);
            std::vector<double> dmu(static_cast<std::size_t>(op.m()));
            symbol::unit_root_time_derivatives(op, t, w, mu, dmu.data());
            const double h = 1e-6;
            const auto fp = symbol::unit_roots(op, t + h, w);
            const auto fm = symbol::unit_roots(op, t - h, w);
            double rel = 0.0;
            for (int k = 0; k < op.m(); ++k) {
                const double fd = (fp[static_cast<std::size_t>(k)] - fm[static_cast<std::size_t>(k)]) / (2 * h);
                rel = std::max(rel, std::abs(fd - dmu[static_cast<std::size_t>(k)]) /
                                        std::max(1.0, std::abs(fd)));
            }
            worst_fd = std::max(worst_fd, rel);
            std::vector<double> row{t};
            for (int d = 0; d < op.n(); ++d) row.push_back(w[d]);
            for (const double v : mu) row.push_back(v);
            for (const double v : dmu) row.push_back(v);
            row.push_back(rel);
            csv.row(row);
        }
    }
    man.outputs.push_back("roots.csv");

    if (cfg.value("dump_diagonalizer", false)) {
        std::vector<std::string> dh{"t"};
        for (int d = 0; d < op.n(); ++d) dh.push_back("omega" + std::to_string(d + 1));
        for (int a = 0; a < op.m(); ++a)
            for (int b = 0; b < op.m(); ++b) dh.push_back("N_" + std::to_string(a) + std::to_string(b));
        for (int k = 0; k < op.m(); ++k) dh.push_back("D_" + std::to_string(k));
        for (int a = 0; a < op.m(); ++a)
            for (int b = 0; b < op.m(); ++b) {
                dh.push_back("reC_" + std::to_string(a) + std::to_string(b));
                dh.push_back("imC_" + std::to_string(a) + std::to_string(b));
            }
        io::CsvWriter diag_csv(fs::path(args.out_dir) / "diagonalizer.csv", dh);
        const spectral::Diagonalizer dg{op, 0.0};
        for (const auto& w : symbol::sphere_points(op.n(), std::min(samples, 8))) {
            spectral::PhaseAccumulator acc(op, w, 1e-9);
            for (const double t : times) {
                const auto d = spectral::diag_point(op, t, w);
                const auto cmat = spectral::coupling(dg, acc, t, w);
                std::vector<double> row{t};
                for (int dd = 0; dd < op.n(); ++dd) row.push_back(w[dd]);
                for (int a = 0; a < op.m(); ++a)
                    for (int b = 0; b < op.m(); ++b) row.push_back(d.N(a, b));
                for (int k = 0; k < op.m(); ++k) row.push_back(d.mu[static_cast<std::size_t>(k)]);
                for (int a = 0; a < op.m(); ++a)
                    for (int b = 0; b < op.m(); ++b) {
                        row.push_back(cmat(a, b).real());
                        row.push_back(cmat(a, b).imag());
                    }
                diag_csv.row(row);
            }
        }
        man.outputs.push_back("diagonalizer.csv");
    }

    json verdict;
    verdict["separation"] = rf.separation;
    verdict["bound_constant"] = rf.bound_constant;
    verdict["max_derivative_fd_rel_err"] = worst_fd;
    std::ofstream vout(fs::path(args.out_dir) / "roots_verdict.json");
    vout << verdict.dump(2) << "\n";
    man.outputs.push_back("roots_verdict.json");
    man.write(args.out_dir);
    std::cout << "separation " << rf.separation << ", bound " << rf.bound_constant << "\n";
    return 0;
}

int cmd_asymint(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const auto op = load_operator(cfg, fs::path(args.config).parent_path());
    if (!cfg.contains("xi")) throw ConfigError("asymint config needs a list of xi points");
    asymint::ProfileOptions popt;
    popt.tail_tol = cfg.value("tol", args.tol);
    popt.rk_tol = cfg.value("rk_tol", 1e-10);
    if (cfg.contains("t_max")) popt.t_max = cfg.at("t_max").get<double>();

    const spectral::Diagonalizer diag{op, 0.0};
    const auto psi = op.psi_function();
    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);

    json alphas = json::array();
    int index = 0;
    for (const auto& xij : cfg.at("xi")) {
        const auto comp = xij.get<std::vector<double>>();
        if (static_cast<int>(comp.size()) != op.n())
            throw ConfigError("xi entries must have n components");
        symbol::Xi xi;
        xi.n = op.n();
        for (int d = 0; d < op.n(); ++d) xi[d] = comp[static_cast<std::size_t>(d)];
        spectral::PhaseAccumulator ph(op, xi.unit(), 1e-10);
        const auto prof = asymint::compute_profile(diag, ph, xi, popt);

        std::vector<std::string> header{"t"};
        for (int a = 0; a < op.m(); ++a)
            for (int b = 0; b < op.m(); ++b) {
                header.push_back("re_eps_" + std::to_string(a) + std::to_string(b));
                header.push_back("im_eps_" + std::to_string(a) + std::to_string(b));
            }
        header.push_back("eps_over_psi_tail");
        const std::string fname = "profile_" + std::to_string(index) + ".csv";
        io::CsvWriter csv(fs::path(args.out_dir) / fname, header);
        for (std::size_t i = 0; i < prof.traj_plus.ts.size(); ++i) {
            const double t = prof.traj_plus.ts[i];
            const auto eps = prof.traj_plus.ys[i] - prof.alpha_plus;
            std::vector<double> row{t};
            for (int a = 0; a < op.m(); ++a)
                for (int b = 0; b < op.m(); ++b) {
                    row.push_back(eps(a, b).real());
                    row.push_back(eps(a, b).imag());
                }
            const double tail = psi.identically_zero() ? 0.0 : psi.tail(t, +1, 1e-12);
            row.push_back(tail > 0.0 ? eps.cwiseAbs().maxCoeff() / tail : 0.0);
            csv.row(row);
        }
        man.outputs.push_back(fname);

        json entry;
        entry["xi"] = comp;
        entry["trunc_time"] = prof.trunc_time;
        entry["trunc_error_bound"] = prof.trunc_error_bound;
        entry["coupling_constant"] = prof.coupling_const;
        json ap = json::array(), am = json::array();
        for (int a = 0; a < op.m(); ++a)
            for (int b = 0; b < op.m(); ++b) {
                ap.push_back({prof.alpha_plus(a, b).real(), prof.alpha_plus(a, b).imag()});
                am.push_back({prof.alpha_minus(a, b).real(), prof.alpha_minus(a, b).imag()});
            }
        entry["alpha_plus"] = ap;
        entry["alpha_minus"] = am;
        alphas.push_back(entry);
        ++index;
    }
    std::ofstream aout(fs::path(args.out_dir) / "alpha.json");
    aout << alphas.dump(2) << "\n";
    man.outputs.push_back("alpha.json");
    man.write(args.out_dir);
    std::cout << "profiles written for " << index << " frequencies\n";
    return 0;
}

int cmd_sugimoto(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const int samples = cfg.value("samples", 256);
    const int planes = cfg.value("planes", 64);
    const int gamma_max = cfg.value("gamma_max", 8);

    geometry::HomogeneousPhase phase;
    if (cfg.contains("phase")) {
        const auto& pj = cfg.at("phase");
        phase = geometry::phase_from_expression(pj.at("expr").get<std::string>(), pj.value("n", 2));
    } else {
        const auto op = load_operator(cfg, fs::path(args.config).parent_path());
        const auto lim = symbol::limiting_roots(op);
        const int branch = cfg.value("branch", 0);
        const bool plus = cfg.value("side", std::string("+")) == "+";
        const auto shifted = geometry::linear_shift(lim, branch, plus);
        if (!shifted.alpha_linear)
            std::cerr << "warning: mid-gap shift is not linear on samples\n";
        phase = shifted.phase;
    }
    const auto rep = geometry::sugimoto_indices(phase, samples, planes, gamma_max);
    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);
    std::ofstream out(fs::path(args.out_dir) / "contact_report.json");
    out << rep.to_json().dump(2) << "\n";
    man.outputs.push_back("contact_report.json");
    man.write(args.out_dir);
    std::cout << "convex=" << (rep.convex ? "true" : "false") << " gamma=" << rep.gamma
              << " gamma0=" << rep.gamma0 << "\n";
    return 0;
}

cauchy::CauchyData data_from_config(const json& cfg, const cauchy::SpectralGrid& grid, int m) {
    std::vector<std::vector<cauchy::GaussianProfile>> slots(static_cast<std::size_t>(m));
    if (!cfg.contains("data")) throw ConfigError("config needs a \"data\" array");
    const auto& dj = cfg.at("data");
    if (static_cast<int>(dj.size()) > m) throw ConfigError("more data slots than the operator order");
    for (std::size_t k = 0; k < dj.size(); ++k) {
        for (const auto& gj : dj[k]) {
            cauchy::GaussianProfile g;
            g.amplitude = gj.value("amplitude", 1.0);
            g.width = gj.value("width", 1.0);
            if (gj.contains("center")) {
                const auto c = gj.at("center").get<std::vector<double>>();
                for (std::size_t d = 0; d < c.size() && d < 3; ++d) g.center[d] = c[d];
            }
            slots[k].push_back(g);
        }
    }
    return make_data(grid, slots);
}

double parse_q(const json& cfg) {
    if (!cfg.contains("q") || cfg.at("q").is_string())
        return std::numeric_limits<double>::infinity();
    return cfg.at("q").get<double>();
}

int cmd_decay(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const auto op = load_operator(cfg, fs::path(args.config).parent_path());
    const auto& gj = cfg.at("grid");
    const int points = gj.at("points").get<int>();
    auto times = parse_series(cfg.at("times"));
    std::sort(times.begin(), times.end());

    cauchy::DecayOptions opt;
    opt.times = times;
    opt.q = parse_q(cfg);
    const double p = cfg.value("p", 1.0);
    const double invq = std::isinf(opt.q) ? 0.0 : 1.0 / opt.q;
    opt.fit_lo = cfg.contains("fit") ? cfg.at("fit").value("lo", 10.0) : 10.0;
    opt.fit_hi = cfg.contains("fit") ? cfg.at("fit").value("hi", times.back()) : times.back();
    opt.zones = cfg.value("zones", true);
    opt.solve.method = cfg.value("method", std::string("asymptotic")) == "direct"
                           ? cauchy::Method::direct
                           : cauchy::Method::asymptotic;
    opt.solve.threads = args.threads;
    opt.slope_tol = cfg.value("slope_tol", 0.1);

    json geometry_info;
    if (cfg.contains("predicted_power")) {
        opt.predicted_power = cfg.at("predicted_power").get<double>();
    } else {
        // gamma from the limiting level sets; certify the moment hypothesis
        const auto lim = symbol::limiting_roots(op);
        int gamma = 2;
        bool all_convex = true;
        int gamma0 = 2;
        for (int k = 0; k < op.m(); ++k) {
            for (const bool plus : {true, false}) {
                geometry::ShiftedPhase sp;
                try {
                    sp = geometry::linear_shift(lim, k, plus);
                } catch (const EvalError&) {
                    continue;  // excluded branch (zero middle root)
                }
                const auto rep = geometry::sugimoto_indices(sp.phase, 128, 32, 8);
                gamma = std::max(gamma, rep.gamma);
                gamma0 = std::max(gamma0, rep.gamma0);
                if (!rep.convex) all_convex = false;
            }
        }
        const int n = op.n();
        const double diff = 1.0 / p - invq;
        opt.predicted_power = all_convex ? -(static_cast<double>(n - 1) / gamma) * diff
                                         : -(1.0 / gamma0) * diff;
        geometry_info["gamma"] = gamma;
        geometry_info["gamma0"] = gamma0;
        geometry_info["convex"] = all_convex;
        const int r_needed = static_cast<int>((n - 1) / gamma) + 1;
        json moments = json::array();
        for (const auto& e : op.entries()) {
            const auto mr = coeffs::moment_check(e.a, r_needed, args.tol);
            json mj;
            mj["expr"] = e.a.source();
            mj["order"] = r_needed;
            mj["value"] = mr.value;
            mj["converged"] = mr.converged;
            moments.push_back(mj);
            if (!mr.converged)
                throw ConvergenceError("moment hypothesis not certified for " + e.a.source());
        }
        geometry_info["moments"] = moments;
    }

    // grid (auto box needs the certificate first)
    double box;
    if (gj.contains("box") && gj.at("box").is_number()) {
        box = gj.at("box").get<double>();
    } else {
        std::vector<double> tg;
        for (double t = 0.0; t <= std::min(times.back(), 64.0); t += 0.5) tg.push_back(t);
        const auto cert = symbol::hyperbolicity_certificate(op, tg, 16);
        // probe the data radius on a unit grid
        double radius = 0.0;
        for (const auto& slot : cfg.at("data"))
            for (const auto& gjj : slot) {
                double c = 0.0;
                if (gjj.contains("center"))
                    for (const auto& v : gjj.at("center")) c = std::max(c, std::abs(v.get<double>()));
                radius = std::max(radius, c + 6.0 * gjj.value("width", 1.0));
            }
        box = cauchy::auto_box(cert.bound_constant, radius, times.back());
    }
    cauchy::SpectralGrid grid(op.n(), points, box);
    const auto data = data_from_config(cfg, grid, op.m());

    const auto rep = cauchy::decay_experiment(op, grid, data, opt);

    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);
    io::CsvWriter csv(fs::path(args.out_dir) / "decay.csv", {"t", "total", "u1", "u2", "u3"});
    for (const auto& r : rep.rows) csv.row({r.t, r.total, r.u1, r.u2, r.u3});
    man.outputs.push_back("decay.csv");
    json verdict = rep.to_json();
    verdict["box"] = box;
    if (!geometry_info.is_null()) verdict["geometry"] = geometry_info;
    std::ofstream vout(fs::path(args.out_dir) / "decay_verdict.json");
    vout << verdict.dump(2) << "\n";
    man.outputs.push_back("decay_verdict.json");
    man.write(args.out_dir);
    std::cout << "slope " << rep.fitted_slope << " (predicted " << opt.predicted_power << ") "
              << (rep.pass ? "PASS" : "FAIL") << "\n";
    return rep.pass ? 0 : 3;
}

int cmd_vdc(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const int gamma = cfg.value("gamma", 2);
    const int dim = cfg.value("N", 1);
    if (dim != 1) throw ConfigError("the vdc driver ships the N=1 model family");
    auto mi = oscillatory::power_phase_model(gamma, cfg.value("cutoff", std::string("bump")),
                                             cfg.value("width", 1.0));
    const auto lambdas = parse_series(cfg.at("lambdas"));
    if (lambdas.size() < 2) throw ConfigError("lambda grid needs at least two points");

    // phase conditions before any envelope claim
    const auto cond = oscillatory::check_phase_conditions(
        [&](double rho, const std::vector<double>& nu) { return mi.phase_line(rho, nu); }, {{}},
        gamma, mi.support);
    if (!cond.all()) throw ConfigError("phase family violates the (F1)-(F4) conditions");

    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);
    io::CsvWriter csv(fs::path(args.out_dir) / "vdc.csv", {"lambda", "abs_I", "arg_I"});
    std::vector<double> mags;
    for (const double lam : lambdas) {
        const auto v = oscillatory::eval_model(mi, lam);
        mags.push_back(std::abs(v));
        csv.row({lam, std::abs(v), std::arg(v)});
    }
    man.outputs.push_back("vdc.csv");

    const double wlo = cfg.contains("window") ? cfg.at("window")[0].get<double>() : lambdas.front();
    const double whi = cfg.contains("window") ? cfg.at("window")[1].get<double>() : lambdas.back();
    const auto fit = oscillatory::fit_envelope(lambdas, mags, static_cast<double>(dim) / gamma, wlo, whi);
    json js;
    js["gamma"] = gamma;
    js["fitted_slope"] = fit.fitted_slope;
    js["predicted_slope"] = -static_cast<double>(dim) / gamma;
    js["sup_constant"] = fit.sup_constant;
    js["f2_constant"] = cond.f2_constant;
    std::ofstream out(fs::path(args.out_dir) / "envelope.json");
    out << js.dump(2) << "\n";
    man.outputs.push_back("envelope.json");
    man.write(args.out_dir);
    std::cout << "slope " << fit.fitted_slope << " (predicted " << -1.0 / gamma << ")\n";
    return 0;
}

int cmd_kernel(const CommonArgs& args) {
    const json cfg = load_json(args.config);
    const auto op = load_operator(cfg, fs::path(args.config).parent_path());
    oscillatory::KernelOptions kopt;
    kopt.l = cfg.value("l", 0);
    kopt.k = cfg.value("k", 0);
    if (cfg.contains("window")) {
        kopt.r_lo = cfg.at("window")[0].get<double>();
        kopt.r_hi = cfg.at("window")[1].get<double>();
    }
    const double t = cfg.at("t").get<double>();
    const double rcut = cfg.value("split_r", 0.0);
    oscillatory::KernelEvaluator ker(op, t, kopt);

    std::vector<std::array<double, 2>> points;
    if (cfg.contains("points")) {
        for (const auto& pj : cfg.at("points"))
            points.push_back({pj[0].get<double>(), pj[1].get<double>()});
    } else {
        const auto radii = parse_series(cfg.at("radii"));
        std::array<double, 2> ray{1.0, 0.0};
        if (cfg.contains("ray")) {
            ray[0] = cfg.at("ray")[0].get<double>();
            ray[1] = cfg.at("ray")[1].get<double>();
            const double nr = std::hypot(ray[0], ray[1]);
            ray[0] /= nr;
            ray[1] /= nr;
        }
        for (const double r : radii) points.push_back({r * ray[0], r * ray[1]});
    }

    fs::create_directories(args.out_dir);
    auto man = make_manifest(cfg, args);
    io::CsvWriter csv(fs::path(args.out_dir) / "kernel.csv",
                      {"t", "x1", "x2", "abs_I", "arg_I", "abs_I1", "abs_I2"});
    for (const auto& p : points) {
        const auto v = ker.eval(p[0], p[1]);
        double a1 = 0.0, a2 = 0.0;
        if (rcut > 0.0) {
            const auto [i1, i2] = ker.split(p[0], p[1], rcut);
            a1 = std::abs(i1);
            a2 = std::abs(i2);
        }
        csv.row({t, p[0], p[1], std::abs(v), std::arg(v), a1, a2});
    }
    man.outputs.push_back("kernel.csv");
    man.write(args.out_dir);
    std::cout << "kernel scan of " << points.size() << " points written\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for dispersive decay of hyperbolic propagators"};
    app.require_subcommand(1);

    CommonArgs args;
    const auto add_common = [&args](CLI::App* sub) {
        sub->add_option("--config", args.config, "JSON config file")->required();
        sub->add_option("--out-dir", args.out_dir, "output directory");
        sub->add_option("--seed", args.seed, "run seed (recorded in the manifest)");
        sub->add_option("--threads", args.threads, "worker threads (1 = reproducibility mode)");
        sub->add_option("--tol", args.tol, "default tolerance");
    };

    auto* roots = app.add_subcommand("roots", "characteristic roots, separation, derivative checks");
    auto* asym = app.add_subcommand("asymint", "asymptotic profiles and bound reports");
    auto* sugi = app.add_subcommand("sugimoto", "level-set contact indices");
    auto* decay = app.add_subcommand("decay", "Lq decay experiment with zone rates");
    auto* vdc = app.add_subcommand("vdc", "van der Corput model envelopes");
    auto* kernel = app.add_subcommand("kernel", "dispersive kernel scan");
    for (auto* sub : {roots, asym, sugi, decay, vdc, kernel}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (roots->parsed()) return cmd_roots(args);
        if (asym->parsed()) return cmd_asymint(args);
        if (sugi->parsed()) return cmd_sugimoto(args);
        if (decay->parsed()) return cmd_decay(args);
        if (vdc->parsed()) return cmd_vdc(args);
        if (kernel->parsed()) return cmd_kernel(args);
    } catch (const NonHyperbolicError& e) {
        std::cerr << "hyperbolicity failure: " << e.what() << " (t = " << e.t << ")\n";
        return 2;
    } catch (const RootCollisionError& e) {
        std::cerr << "root collision: " << e.what() << " (t = " << e.t << ")\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const ResolutionError& e) {
        std::cerr << "resolution failure: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
