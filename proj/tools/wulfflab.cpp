// wulfflab command line front end.
//
//   wulfflab <task> --manifest m.json [--quick] [--out DIR]
//
// Tasks: norm-check, wulff, cheeger1, cheeger2, hk, eigen, sweep, twisted,
// qtilde, reproduce. The manifest is a JSON object holding the domain spec,
// the norm spec, the solver config and the task parameters (see README).
// Exit codes: 0 success, 1 solver failure, 2 bad manifest / bad usage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wulfflab/cheeger.hpp"
#include "wulfflab/eigen.hpp"
#include "wulfflab/geometry.hpp"
#include "wulfflab/io.hpp"
#include "wulfflab/partition.hpp"
#include "wulfflab/reproduce.hpp"
#include "wulfflab/twisted.hpp"

namespace fs = std::filesystem;
using wulfflab::json;

namespace {

struct Ctx {
    json manifest;
    std::string base_dir = ".";
    fs::path out_dir = ".";
    bool quick = false;
};

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw wulfflab::ConfigError("cannot open manifest " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw wulfflab::ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

/// A field that may be given inline or as a path to another JSON file.
json resolve(const Ctx& ctx, const std::string& key) {
    if (!ctx.manifest.contains(key))
        throw wulfflab::ConfigError("manifest is missing field '" + key + "'");
    const json& v = ctx.manifest.at(key);
    if (v.is_string()) {
        fs::path p(v.get<std::string>());
        if (p.is_relative()) p = fs::path(ctx.base_dir) / p;
        return load_json(p.string());
    }
    return v;
}

wulfflab::SolverConfig config_of(const Ctx& ctx) {
    wulfflab::SolverConfig cfg = wulfflab::parse_config(
        ctx.manifest.contains("config") ? ctx.manifest.at("config") : json());
    if (const char* env = std::getenv("WULFFLAB_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) cfg.threads = t;
    }
    return cfg;
}

wulfflab::GridDomain domain_of(const Ctx& ctx) {
    return wulfflab::parse_domain(resolve(ctx, "domain"), ctx.base_dir);
}

wulfflab::NormDescriptor norm_of(const Ctx& ctx) {
    return wulfflab::parse_norm(resolve(ctx, "norm"));
}

std::string out_path(const Ctx& ctx, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    return (ctx.out_dir / name).string();
}

json bounds_json(const wulfflab::LowerBounds& lb) {
    return {{"from_h1", lb.from_h1},
            {"from_volume", lb.from_volume},
            {"best", lb.best()}};
}

int task_norm_check(const Ctx& ctx) {
    wulfflab::NormDescriptor norm = norm_of(ctx);
    int samples = ctx.manifest.value("samples", ctx.quick ? 100 : 1000);
    wulfflab::IdentityReport rep =
        wulfflab::verify_identities(norm, samples, config_of(ctx).seed);
    json out;
    out["norm"] = wulfflab::norm_to_json(norm);
    out["samples"] = samples;
    out["max_euler"] = rep.max_euler;
    out["max_polar_unit"] = rep.max_polar_unit;
    out["max_reconstruct"] = rep.max_reconstruct;
    out["max_hessian_fd"] = rep.max_hessian;
    out["a"] = norm.a;
    out["b"] = norm.b;
    wulfflab::write_json_file(out_path(ctx, "norm_check.json"), out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int task_wulff(const Ctx& ctx) {
    wulfflab::NormDescriptor norm = norm_of(ctx);
    double r = ctx.manifest.value("r", 1.0);
    double kappa = wulfflab::wulff_unit_measure(norm);
    double per = wulfflab::wulff_perimeter(norm, r);
    double meas = wulfflab::wulff_measure(norm, r);
    json out;
    out["norm"] = wulfflab::norm_to_json(norm);
    out["r"] = r;
    out["kappa"] = kappa;
    out["measure"] = meas;
    out["perimeter"] = per;
    out["perimeter_identity"] = double(norm.n) * kappa * std::pow(r, norm.n - 1);
    wulfflab::write_json_file(out_path(ctx, "wulff.json"), out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int task_cheeger1(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    wulfflab::CheegerResult r = wulfflab::solve_h1(d, norm, cfg);
    json out;
    out["h1"] = r.h1;
    out["iterations"] = r.iterations;
    out["dual_gap"] = r.dual_gap;
    out["set_measure"] = r.set.measure();
    out["touches_boundary"] = wulfflab::cheeger_touches_boundary(r);
    json hist = json::array();
    for (const auto& row : r.history)
        hist.push_back({{"hk", row.hk}, {"perimeter", row.perimeter}, {"volume", row.volume}});
    out["history"] = hist;
    wulfflab::write_json_file(out_path(ctx, "cheeger1.json"), out);
    wulfflab::write_subset_pgm(out_path(ctx, "cheeger1_set.pgm"), r.set);
    std::cout << "h1 = " << wulfflab::format_double(r.h1) << "\n";
    return 0;
}

int task_cheeger2(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    wulfflab::CheegerResult c1 = wulfflab::solve_h1(d, norm, cfg);
    wulfflab::CoupledCheegerResult r = wulfflab::solve_h2(d, norm, cfg);
    wulfflab::LowerBounds lb = wulfflab::lower_bounds(d, norm, c1.h1);
    json out;
    out["h2_upper"] = r.h2;
    out["rho1"] = r.rho1;
    out["rho2"] = r.rho2;
    out["adjusted"] = r.adjusted;
    out["connected"] = {r.connected1, r.connected2};
    out["lower_bounds"] = bounds_json(lb);
    wulfflab::write_json_file(out_path(ctx, "cheeger2.json"), out);
    wulfflab::write_subset_pgm(out_path(ctx, "cheeger2_set1.pgm"), r.pair.first);
    wulfflab::write_subset_pgm(out_path(ctx, "cheeger2_set2.pgm"), r.pair.second);
    std::cout << "h2 = " << wulfflab::format_double(r.h2)
              << " (lower bound " << wulfflab::format_double(lb.best()) << ")\n";
    return 0;
}

int task_hk(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    int k = ctx.manifest.value("k", 3);
    wulfflab::KPartitionResult r = wulfflab::solve_hk(d, norm, k, cfg);
    json out;
    out["k"] = k;
    out["hk_upper"] = r.hk;
    out["ratios"] = r.ratios;
    out["lower_bound"] = r.lower_bound;
    wulfflab::write_json_file(out_path(ctx, "hk.json"), out);
    for (size_t i = 0; i < r.sets.size(); ++i)
        wulfflab::write_subset_pgm(out_path(ctx, "hk_set" + std::to_string(i + 1) + ".pgm"),
                                   r.sets[i]);
    std::cout << "h" << k << " = " << wulfflab::format_double(r.hk) << "\n";
    return 0;
}

int task_eigen(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    double p = ctx.manifest.value("p", 2.0);
    int which = ctx.manifest.value("which", 1);
    if (which != 1 && which != 2)
        throw wulfflab::ConfigError("'which' must be 1 or 2");
    wulfflab::EigenResult r = (which == 1) ? wulfflab::solve_lambda1(d, norm, p, cfg)
                                           : wulfflab::solve_lambda2(d, norm, p, cfg);
    json out;
    out["p"] = p;
    out["which"] = which;
    out["lambda"] = r.lambda;
    out["eps_final"] = r.eps_final;
    out["eps_bias_bound"] = r.eps_bias_bound;
    out["iterations"] = r.iterations;
    wulfflab::write_json_file(out_path(ctx, "eigen.json"), out);
    wulfflab::write_field_pgm(out_path(ctx, "eigen_field.pgm"), r.eigenfunction);
    std::cout << "lambda" << which << "(" << wulfflab::format_double(p)
              << ") = " << wulfflab::format_double(r.lambda) << "\n";
    return 0;
}

int task_sweep(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    std::vector<double> ps =
        ctx.manifest.value("p_list", std::vector<double>{1.5, 1.2, 1.1, 1.05});
    wulfflab::SweepResult sw = wulfflab::sweep_p(d, norm, ps, cfg);
    std::vector<std::vector<double>> rows;
    for (const auto& r : sw.rows)
        rows.push_back({r.p, r.lambda1, r.lambda2, sw.h1, sw.h2_upper, r.margin1, r.margin2});
    wulfflab::write_csv(out_path(ctx, "sweep.csv"),
                        {"p", "lambda1", "lambda2", "h1", "h2", "margin1", "margin2"}, rows);
    wulfflab::SvgSeries s1{"lambda1", "#1f6fb2", false, {}};
    wulfflab::SvgSeries s2{"lambda2", "#b2421f", false, {}};
    wulfflab::SvgSeries r1{"h1", "#1f6fb2", true, {}};
    wulfflab::SvgSeries r2{"h2", "#b2421f", true, {}};
    for (const auto& r : sw.rows) {
        s1.points.push_back({r.p, r.lambda1});
        s2.points.push_back({r.p, r.lambda2});
        r1.points.push_back({r.p, sw.h1});
        r2.points.push_back({r.p, sw.h2_upper});
    }
    wulfflab::write_svg_plot(out_path(ctx, "sweep.svg"), "eigenvalues vs p", "p", "lambda",
                             {s1, s2, r1, r2});
    json out;
    out["h1"] = sw.h1;
    out["h2_upper"] = sw.h2_upper;
    out["h2_lower"] = sw.h2_lower;
    json jr = json::array();
    for (const auto& r : sw.rows)
        jr.push_back({{"p", r.p},
                      {"lambda1", r.lambda1},
                      {"lambda2", r.lambda2},
                      {"margin1", r.margin1},
                      {"margin2", r.margin2},
                      {"gap1", r.gap1},
                      {"gap2", r.gap2},
                      {"nodal_min_measure", r.nodal_min_measure},
                      {"nodal_bound", r.nodal_bound}});
    out["rows"] = jr;
    wulfflab::write_json_file(out_path(ctx, "sweep.json"), out);
    std::cout << "sweep: " << sw.rows.size() << " rows written\n";
    return 0;
}

int task_twisted(const Ctx& ctx) {
    wulfflab::GridDomain d = domain_of(ctx);
    wulfflab::NormDescriptor norm = norm_of(ctx);
    wulfflab::SolverConfig cfg = config_of(ctx);
    double q = ctx.manifest.value("q", 1.0);
    wulfflab::TwistedResult r = wulfflab::solve_twisted(d, norm, q, cfg);
    json out;
    out["q"] = q;
    out["value"] = r.value;
    out["rho1"] = r.rho1;
    out["rho2"] = r.rho2;
    out["h1_bracket"] = r.h1_bracket;
    out["h2_pair_value"] = r.h2_pair_value;
    wulfflab::write_json_file(out_path(ctx, "twisted.json"), out);
    wulfflab::write_subset_pgm(out_path(ctx, "twisted_set1.pgm"), r.pair.first);
    wulfflab::write_subset_pgm(out_path(ctx, "twisted_set2.pgm"), r.pair.second);
    std::cout << "K(" << wulfflab::format_double(q)
              << ") <= " << wulfflab::format_double(r.value) << "\n";
    return 0;
}

int task_qtilde(const Ctx& ctx) {
    int n = ctx.manifest.value("n", 2);
    double tol = ctx.manifest.value("tol", 1e-9);
    wulfflab::QTildeResult r = wulfflab::find_q_tilde(n, tol);
    json out;
    out["n"] = n;
    out["q_tilde"] = r.q_tilde;
    out["t_asymmetric"] = r.t_asymmetric;
    out["phi_symmetric"] = r.phi_symmetric;
    out["phi_asymmetric"] = r.phi_asymmetric;
    out["unique_at_qtilde"] = r.unique_at_qtilde;
    out["branch_value_gap"] = r.branch_value_gap;
    wulfflab::write_json_file(out_path(ctx, "qtilde.json"), out);
    // scan of the optimal split against q for the branch plot
    double qmax = double(n) / double(n - 1);
    wulfflab::SvgSeries ts{"t*", "#1f6fb2", false, {}};
    std::vector<std::vector<double>> rows;
    for (int k = 0; k <= 60; ++k) {
        double q = 1.0 + (qmax - 1.0 - 1e-3) * k / 60.0;
        auto scan = wulfflab::detail::two_wulff_scan(n, q, wulfflab::unit_ball_measure(n));
        ts.points.push_back({q, scan.t_star});
        rows.push_back({q, scan.t_star, scan.value, scan.symmetric ? 1.0 : 0.0});
    }
    wulfflab::write_csv(out_path(ctx, "qtilde_scan.csv"), {"q", "t_star", "phi", "symmetric"},
                        rows);
    wulfflab::write_svg_plot(out_path(ctx, "qtilde.svg"), "optimal split vs q", "q", "t*", {ts});
    std::cout << "q_tilde(" << n << ") = " << wulfflab::format_double(r.q_tilde) << "\n";
    return 0;
}

int task_reproduce(const Ctx& ctx) {
    wulfflab::reproduce::Options opt;
    opt.quick = ctx.quick;
    auto results = wulfflab::reproduce::run_all(opt);
    std::string md = wulfflab::reproduce::summary_markdown(results);
    wulfflab::write_text_file(out_path(ctx, "reproduce_summary.md"), md);
    std::cout << md;
    for (const auto& r : results)
        if (!r.pass) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic Cheeger / p-Laplacian solver"};
    app.require_subcommand(1);
    std::string manifest_path, out_dir = ".";
    bool quick = false;
    const std::vector<std::string> tasks = {"norm-check", "wulff",   "cheeger1", "cheeger2",
                                            "hk",         "eigen",   "sweep",    "twisted",
                                            "qtilde",     "reproduce"};
    for (const std::string& t : tasks) {
        CLI::App* sub = app.add_subcommand(t);
        if (t != "reproduce" && t != "qtilde")
            sub->add_option("--manifest", manifest_path, "manifest JSON")->required();
        else
            sub->add_option("--manifest", manifest_path, "manifest JSON");
        sub->add_flag("--quick", quick, "coarse, fast settings");
        sub->add_option("--out", out_dir, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    std::string task = app.get_subcommands().front()->get_name();

    Ctx ctx;
    ctx.quick = quick;
    ctx.out_dir = out_dir;
    try {
        if (!manifest_path.empty()) {
            ctx.manifest = load_json(manifest_path);
            ctx.base_dir = fs::path(manifest_path).parent_path().string();
            if (ctx.base_dir.empty()) ctx.base_dir = ".";
        } else {
            ctx.manifest = json::object();
        }
        if (task == "norm-check") return task_norm_check(ctx);
        if (task == "wulff") return task_wulff(ctx);
        if (task == "cheeger1") return task_cheeger1(ctx);
        if (task == "cheeger2") return task_cheeger2(ctx);
        if (task == "hk") return task_hk(ctx);
        if (task == "eigen") return task_eigen(ctx);
        if (task == "sweep") return task_sweep(ctx);
        if (task == "twisted") return task_twisted(ctx);
        if (task == "qtilde") return task_qtilde(ctx);
        if (task == "reproduce") return task_reproduce(ctx);
        return 2;
    } catch (const wulfflab::ConfigError& e) {
        json err{{"error", "config"}, {"message", e.what()}, {"task", task}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const wulfflab::Error& e) {
        json err{{"error", "solver"}, {"message", e.what()}, {"task", task}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}, {"task", task}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
