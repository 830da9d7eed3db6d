// Command-line driver: sampling, embedding runs, the exact 1D solver,
// continuum/nonlocal energy evaluation, microstructure scans, and
// consistency-rate sweeps. Every run is driven by a canonical JSON config:
// the flags build it, `execute` consumes it, and the config is persisted next
// to the outputs so `rerun --config` reproduces them byte for byte. Outputs
// carry the config hash; failures exit nonzero with a JSON error line.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tsnelim/experiments.hpp"
#include "tsnelim/io.hpp"
#include "tsnelim/microstructure.hpp"

using namespace tsnelim;

namespace {

DensitySpec density_from(const json& d) {
    std::string family = d.value("family", "mixture");
    double a = d.value("a", -1.0), b = d.value("b", 1.0);
    if (family == "uniform") return DensitySpec::uniform1d(a, b);
    if (family == "mixture")
        return DensitySpec::mixture1d(a, b, d.value("p", 0.4), d.value("c", 0.5),
                                      d.value("var", 0.005));
    throw std::invalid_argument("unknown density family: " + family);
}

BandwidthField sigma_from(const std::string& name, const DensitySpec& rho) {
    if (name == "knn") return BandwidthField::knn_proxy(rho);
    if (name == "invpow") return BandwidthField::inverse_density_power(rho);
    if (name.rfind("constant:", 0) == 0) return BandwidthField::constant(std::stod(name.substr(9)));
    if (name == "constant") return BandwidthField::constant(1.0);
    throw std::invalid_argument("unknown bandwidth mode: " + name);
}

PiecewiseLinearMap map_1d_from(const std::string& spec, double a, double b, int cells) {
    if (spec == "identity") return PiecewiseLinearMap::identity(a, b, cells);
    if (spec.rfind("linear:", 0) == 0) {
        double sl = std::stod(spec.substr(7));
        return PiecewiseLinearMap::from_function([sl](double t) { return sl * t; }, a, b, cells);
    }
    if (spec.rfind("sin:", 0) == 0) {
        std::string rest = spec.substr(4);
        auto comma = rest.find(',');
        double amp = std::stod(rest.substr(0, comma));
        double freq = std::stod(rest.substr(comma + 1));
        return PiecewiseLinearMap::from_function(
            [amp, freq](double t) { return t + amp * std::sin(freq * t); }, a, b, cells);
    }
    if (spec.rfind("ramp:", 0) == 0) return heaviside_ramp_map(1.0, std::stoi(spec.substr(5)));
    throw std::invalid_argument("unknown map: " + spec);
}

std::vector<double> parse_list_d(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_list_i(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoi(tok));
    return out;
}

std::string outpath(const std::string& dir, const std::string& name) {
    return dir.empty() || dir == "." ? name : dir + "/" + name;
}

json exec_sample(const json& cfg, const std::string& outdir, const std::string& hash) {
    auto rho = density_from(cfg.at("density"));
    auto cloud = sample(rho, cfg.at("n").get<int>(), cfg.at("seed").get<uint64_t>());
    CsvTable t;
    t.columns = {"x"};
    for (int i = 0; i < cloud.n; ++i) t.add_row({cloud.x1(i)});
    std::string out = cfg.value("out", "points.csv");
    write_text(outpath(outdir, out), t.render(hash));
    return json{{"written", out}};
}

json exec_embed(const json& cfg, const std::string& outdir, const std::string& hash) {
    auto rho = density_from(cfg.at("density"));
    auto kernel = KernelSpec::make(kernel_family_from_string(cfg.value("kernel", "epanechnikov")), 1);
    auto sigma = sigma_from(cfg.value("sigma", "knn"), rho);
    int n = cfg.at("n").get<int>();
    uint64_t seed = cfg.at("seed").get<uint64_t>();
    double h = cfg.value("h", 0.0) > 0 ? cfg["h"].get<double>() : 5.0 / n;
    double dt = cfg.value("dt", 0.0) > 0 ? cfg["dt"].get<double>() : n / 5.0;
    long steps = cfg.value("steps", 10000L);
    std::string init = cfg.value("init", "identity");

    auto cloud = sample(rho, n, seed);
    auto P = build_affinities(cloud, kernel, sigma, h);

    if (cfg.contains("export_p")) {
        CsvTable edges;
        edges.columns = {"i", "j", "p_ij"};
        for (int i = 0; i < P.n; ++i)
            for (int k = P.rowptr[i]; k < P.rowptr[i + 1]; ++k)
                edges.add_row({static_cast<double>(i), static_cast<double>(P.col[k]), P.sym[k]});
        write_text(outpath(outdir, cfg["export_p"].get<std::string>()), edges.render(hash));
    }

    std::vector<double> y0;
    if (init == "random")
        y0 = init_random(n, 1, seed + 99);
    else if (init == "identity")
        y0 = init_identity(cloud, h);
    else if (init == "continuum") {
        auto sol = fixed_point_solve(ScalarPotential::from_kernel(kernel),
                                     Profile1D::on_grid(rho, sigma, 4096));
        y0 = init_from_map(cloud, sol.T_star, h);
    } else
        throw std::invalid_argument("unknown init: " + init);

    auto st = descend(P, y0, 1, steps, dt,
                      cfg.value("mode", "tsne") == "sne" ? DescentMode::sne : DescentMode::tsne,
                      cfg.value("trace_every", 200L), h);
    CsvTable trace;
    trace.columns = {"step", "kl", "a_n", "r_n"};
    for (const auto& r : st.trace) trace.add_row({static_cast<double>(r.step), r.kl, r.a_n, r.r_n});
    write_text(outpath(outdir, "loss_trace.csv"), trace.render(hash));

    auto post = postprocess(st.y, n, 1, h);
    auto Tn = discrete_map_1d(cloud, post);
    CsvTable mapcsv;
    mapcsv.columns = {"x", "T_n"};
    for (size_t i = 0; i < Tn.x.size(); ++i) mapcsv.add_row({Tn.x[i], Tn.y[i]});
    write_text(outpath(outdir, "final_map.csv"), mapcsv.render(hash));
    return json{{"final_kl", st.trace.back().kl}, {"diverged", st.diverged}};
}

json exec_solve1d(const json& cfg, const std::string& outdir, const std::string& hash) {
    auto rho = density_from(cfg.at("density"));
    auto kernel = KernelSpec::make(kernel_family_from_string(cfg.value("kernel", "epanechnikov")), 1);
    auto sigma = sigma_from(cfg.value("sigma", "knn"), rho);
    auto res = fixed_point_solve(
        ScalarPotential::from_kernel(kernel, cfg.value("s", 1.0)),
        Profile1D::on_grid(rho, sigma, cfg.value("grid", 4096)), 1e-3, cfg.value("tol", 1e-10));
    CsvTable t;
    t.columns = {"x", "u_star", "T_star"};
    for (int i = 0; i < res.u_star.size(); ++i)
        t.add_row({res.u_star.x[i], res.u_star.u[i], res.T_star.y[i]});
    write_text(outpath(outdir, "solution.csv"), t.render(hash));
    json rep{{"b_star", res.b_star},
             {"residual", res.residual},
             {"F", res.f_value},
             {"iterations", res.iterations},
             {"config_hash", hash}};
    write_json(outpath(outdir, "solution.json"), rep);
    return rep;
}

json exec_continuum(const json& cfg, const std::string& outdir, const std::string& hash) {
    std::string s_str = cfg.value("s", "1");
    double s = s_str == "inf" ? std::numeric_limits<double>::infinity() : std::stod(s_str);
    auto rho = density_from(cfg.at("density"));
    auto kernel = KernelSpec::make(kernel_family_from_string(cfg.value("kernel", "epanechnikov")), 1);
    auto sigma = sigma_from(cfg.value("sigma", "constant"), rho);
    int m = cfg.value("m", 1);
    std::string mapname = cfg.value("map", "identity");
    json out;
    if (m == 1) {
        int cells = cfg.value("cells", 0) > 0 ? cfg["cells"].get<int>() : 2048;
        auto T = map_1d_from(mapname, rho.domain.lo[0], rho.domain.hi[0], cells);
        auto rep = continuum_energy_1d(T, kernel, sigma, rho, s);
        out = {{"attraction", rep.attraction},
               {"repulsion", rep.repulsion},
               {"total", rep.total},
               {"s", s_str},
               {"regime", rep.regime}};
    } else if (m == 2) {
        // planar maps on the unit square with a uniform density
        auto uni2 = DensitySpec::uniform(Box::square(0.0, 1.0));
        auto k2 = KernelSpec::make(kernel.family, 2);
        int nodes = (cfg.value("cells", 0) > 0 ? cfg["cells"].get<int>() : 64) + 1;
        GridMap T;
        if (mapname == "identity")
            T = GridMap::identity2d(0.0, 1.0, nodes);
        else if (mapname.rfind("shear:", 0) == 0) {
            double a = std::stod(mapname.substr(6));
            T = GridMap::from_function(2, 2, nodes, Box::square(0.0, 1.0),
                                       [a](const double* x, double* y) {
                                           y[0] = x[0] + a * x[1];
                                           y[1] = x[1];
                                       });
        } else
            throw std::invalid_argument("unknown m = 2 map: " + mapname);
        double attraction = continuum_attraction(T, k2, sigma, uni2, s);
        // bins at half the map resolution: four image points per bin
        int bins = std::max(16, (nodes - 1) / 2);
        double repulsion = continuum_repulsion(pushforward_histogram(T, uni2, bins), 2);
        out = {{"attraction", attraction},
               {"repulsion", repulsion},
               {"total", attraction + repulsion},
               {"s", s_str},
               {"regime", "L2"}};
    } else
        throw std::invalid_argument("continuum subcommand evaluates m = 1 or m = 2 maps");
    out["config_hash"] = hash;
    write_json(outpath(outdir, "continuum.json"), out);
    return out;
}

json exec_nonlocal(const json& cfg, const std::string& outdir, const std::string& hash) {
    auto hs = parse_list_d(cfg.value("h_sweep", "0.1,0.05,0.03,0.02,0.01"));
    std::string map = cfg.value("map", "identity");
    std::string kname = cfg.value("kernel", "epanechnikov");
    int grid = cfg.value("grid", 4096);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    CsvTable t;
    if (map.rfind("cutting:", 0) == 0) {
        int k = std::stoi(map.substr(8));
        auto k2 = KernelSpec::make(kernel_family_from_string(kname), 2);
        t.columns = {"h", "A_h"};
        for (double h : hs) {
            auto cmap = build_cutting_map_mu(2, 1, k, 0.005 * std::max(1, k) * h);
            t.add_row({h, cut_sensitivity(cmap, k2, h)});
        }
    } else {
        auto kernel = KernelSpec::make(kernel_family_from_string(kname), 1);
        auto one = BandwidthField::constant(1.0);
        GridMap T = map == "identity"
                        ? GridMap::identity1d(0.0, 1.0, grid)
                        : GridMap::from_function(1, 1, grid, Box::interval(0.0, 1.0),
                                                 [&](const double* x, double* y) {
                                                     y[0] = std::stod(map.substr(7)) * x[0];
                                                 });
        t.columns = {"h", "A_h", "R_h", "exp_R_over_pi_h"};
        for (double h : hs) {
            double a = nonlocal_attraction(T, kernel, one, uni, h);
            double r = nonlocal_repulsion(T, uni, h);
            t.add_row({h, a, r, std::exp(r) / (pi * h)});
        }
    }
    write_text(outpath(outdir, "nonlocal.csv"), t.render(hash));
    return json{{"written", "nonlocal.csv"}};
}

json exec_microstructure(const json& cfg, const std::string& outdir, const std::string& hash) {
    int d = cfg.value("d", 2), m = cfg.value("m", 1), kmax = cfg.value("kmax", 32);
    bool rescaled = cfg.value("rescaled", false);
    std::vector<int> klist;
    if (cfg.contains("klist"))
        klist = parse_list_i(cfg["klist"].get<std::string>());
    else if (cfg.value("all_k", false))
        for (int k = 2; k <= kmax; ++k) klist.push_back(k);
    else
        for (int k = 2; k <= kmax; k *= 2) klist.push_back(k);
    auto kernel = KernelSpec::epanechnikov(d);
    auto scan = cutting_energy_scan(d, m, klist, kernel, cfg.value("alpha", 0.5), rescaled,
                                    cfg.value("samples", 1000000L), cfg.value("seed", 1234ULL));
    CsvTable t;
    t.columns = {"k", "A_sublinear", "A_kernel", "R", "max_density", "mass"};
    for (const auto& r : scan.rows)
        t.add_row({static_cast<double>(r.k), r.a_sublinear, r.a_kernel, r.repulsion, r.max_density,
                   r.mass});
    write_text(outpath(outdir, "microstructure.csv"), t.render(hash));
    json fit{{"slope_repulsion_vs_logk", scan.slope_repulsion},
             {"slope_attraction_vs_logk", scan.slope_attraction},
             {"rescaled", rescaled},
             {"config_hash", hash}};
    write_json(outpath(outdir, "microstructure_fit.json"), fit);
    return fit;
}

json exec_consistency(const json& cfg, const std::string& outdir, const std::string& hash) {
    auto ns = parse_list_i(cfg.value("nlist", "250,500,1000,2000,4000"));
    double hexp = cfg.value("h_exp", 1.0 / 3.0);
    std::string map = cfg.value("map", "identity");
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);
    auto ep = KernelSpec::epanechnikov(1);
    std::function<double(double)> T = [](double x) { return x; };
    if (map.rfind("sin:", 0) == 0) {
        auto rest = map.substr(4);
        auto comma = rest.find(',');
        double amp = std::stod(rest.substr(0, comma));
        double freq = std::stod(rest.substr(comma + 1));
        T = [amp, freq](double x) { return x + amp * std::sin(freq * x); };
    }
    auto res = run_consistency_sweep(
        cfg.value("mode", "attraction") == "repulsion" ? SweepMode::repulsion
                                                       : SweepMode::attraction,
        T, ep, one, uni, ns, [&](int n) { return std::pow(n, -hexp); }, cfg.value("trials", 10),
        cfg.value("seed", 42ULL));
    CsvTable t;
    t.columns = {"n", "h", "mean_err", "sd_err", "median_err"};
    for (const auto& r : res.rows)
        t.add_row({static_cast<double>(r.n), r.h, r.mean_err, r.sd_err, r.median_err});
    write_text(outpath(outdir, "consistency.csv"), t.render(hash));
    return json{{"loglog_slope", res.loglog_slope}, {"limit", res.limit}};
}

json exec_sec33(const json& cfg, const std::string& outdir, const std::string& hash) {
    MixtureRunConfig mc;
    bool full = cfg.value("full", false);
    mc.c = cfg.value("c", 0.5);
    mc.n = full ? 2500 : cfg.value("n", 500);
    mc.steps = full ? 100000L : cfg.value("steps", 10000L);
    mc.h = cfg.value("h", 0.0);
    mc.dt = cfg.value("dt", 0.0);
    mc.seed = cfg.value("seed", 1ULL);
    std::string init = cfg.value("init", "continuum");
    mc.init = init == "random"     ? InitMode::random
              : init == "identity" ? InitMode::identity
                                   : InitMode::continuum;
    auto res = run_mixture_experiment(mc);

    CsvTable trace;
    trace.columns = {"step", "kl", "a_n", "r_n"};
    for (const auto& r : res.state.trace)
        trace.add_row({static_cast<double>(r.step), r.kl, r.a_n, r.r_n});
    write_text(outpath(outdir, "loss_trace.csv"), trace.render(hash));

    CsvTable maps;
    maps.columns = {"x", "T_n", "T_star"};
    for (size_t i = 0; i < res.T_n.x.size(); ++i)
        maps.add_row({res.T_n.x[i], res.T_n.y[i], res.T_star(res.T_n.x[i])});
    write_text(outpath(outdir, "map_comparison.csv"), maps.render(hash));

    CsvTable deriv;
    deriv.columns = {"x", "T_n_prime", "T_star_prime"};
    for (int c2 = 0; c2 < res.T_n.cells(); ++c2) {
        double xm = 0.5 * (res.T_n.x[c2] + res.T_n.x[c2 + 1]);
        double eps = 1e-7;
        double tp = (res.T_star(xm + eps) - res.T_star(xm - eps)) / (2 * eps);
        deriv.add_row({xm, res.T_n.slope(c2), tp});
    }
    write_text(outpath(outdir, "derivative_comparison.csv"), deriv.render(hash));

    json out{{"final_kl", res.final_kl},
             {"final_tsne_loss", res.final_tsne_loss},
             {"initial_kl", res.initial_kl},
             {"diverged", res.state.diverged},
             {"config_hash", hash}};
    write_json(outpath(outdir, "sec33.json"), out);
    return out;
}

json execute(const json& cfg, const std::string& outdir) {
    std::string sub = cfg.at("subcommand").get<std::string>();
    std::string hash = config_hash(cfg);
    write_json(outpath(outdir, "config.json"), cfg);
    json summary;
    if (sub == "sample")
        summary = exec_sample(cfg, outdir, hash);
    else if (sub == "embed")
        summary = exec_embed(cfg, outdir, hash);
    else if (sub == "solve1d")
        summary = exec_solve1d(cfg, outdir, hash);
    else if (sub == "continuum")
        summary = exec_continuum(cfg, outdir, hash);
    else if (sub == "nonlocal")
        summary = exec_nonlocal(cfg, outdir, hash);
    else if (sub == "microstructure")
        summary = exec_microstructure(cfg, outdir, hash);
    else if (sub == "consistency")
        summary = exec_consistency(cfg, outdir, hash);
    else if (sub == "sec33")
        summary = exec_sec33(cfg, outdir, hash);
    else
        throw std::invalid_argument("unknown subcommand in config: " + sub);
    summary["config_hash"] = hash;
    return summary;
}

int run(int argc, char** argv) {
    CLI::App app{"discrete and continuum stochastic-neighbor-embedding energies"};
    app.require_subcommand(1);

    std::string outdir = ".";
    app.add_option("--outdir", outdir, "output directory")->capture_default_str();

    json density{{"family", "mixture"}, {"a", -1.0},     {"b", 1.0},
                 {"p", 0.4},            {"var", 0.005},  {"c", 0.5}};
    auto attach_density = [&density](CLI::App* cmd) {
        cmd->add_option_function<std::string>(
            "--family", [&density](const std::string& v) { density["family"] = v; },
            "density family: uniform | mixture");
        cmd->add_option_function<double>("--a", [&density](double v) { density["a"] = v; });
        cmd->add_option_function<double>("--b", [&density](double v) { density["b"] = v; });
        cmd->add_option_function<double>(
            "--p", [&density](double v) { density["p"] = v; }, "mixture weight");
        cmd->add_option_function<double>(
            "--var", [&density](double v) { density["var"] = v; }, "mixture variance");
        cmd->add_option_function<double>(
            "--c", [&density](double v) { density["c"] = v; }, "mixture center offset");
    };

    auto* c_sample = app.add_subcommand("sample", "draw i.i.d. points from a density");
    attach_density(c_sample);
    int sample_n = 1000;
    uint64_t sample_seed = 1;
    std::string sample_out = "points.csv";
    c_sample->add_option("--n", sample_n);
    c_sample->add_option("--seed", sample_seed);
    c_sample->add_option("--out", sample_out);

    auto* c_embed = app.add_subcommand("embed", "gradient-descent embedding of a sampled cloud");
    c_embed->set_help_flag("--help", "print help");  // frees -h for the bandwidth flag
    attach_density(c_embed);
    int embed_n = 500;
    double embed_h = 0.0, embed_dt = 0.0;
    long embed_steps = 10000, embed_trace = 200;
    std::string embed_init = "identity", embed_mode = "tsne", embed_kernel = "epanechnikov",
                embed_sigma = "knn", embed_export_p;
    uint64_t embed_seed = 1;
    c_embed->add_option("--n", embed_n);
    c_embed->add_option("--h", embed_h, "bandwidth (0: 5/n)");
    c_embed->add_option("--steps", embed_steps);
    c_embed->add_option("--dt", embed_dt, "time step (0: n/5)");
    c_embed->add_option("--init", embed_init, "random | identity | continuum");
    c_embed->add_option("--mode", embed_mode, "tsne | sne");
    c_embed->add_option("--kernel", embed_kernel);
    c_embed->add_option("--sigma", embed_sigma, "constant[:v] | knn | invpow");
    c_embed->add_option("--seed", embed_seed);
    c_embed->add_option("--trace-every", embed_trace);
    c_embed->add_option("--export-p", embed_export_p, "write the affinity edge list (i,j,p_ij)");

    auto* c_solve = app.add_subcommand("solve1d", "exact 1D continuum minimizer");
    attach_density(c_solve);
    std::string solve_sigma = "knn", solve_kernel = "epanechnikov";
    int solve_grid = 4096;
    double solve_s = 1.0, solve_tol = 1e-10;
    c_solve->add_option("--sigma", solve_sigma);
    c_solve->add_option("--kernel", solve_kernel);
    c_solve->add_option("--grid", solve_grid);
    c_solve->add_option("--s", solve_s);
    c_solve->add_option("--tol", solve_tol);

    auto* c_cont = app.add_subcommand("continuum", "continuum energy of a test map");
    attach_density(c_cont);
    std::string cont_map = "identity", cont_s = "1", cont_kernel = "epanechnikov",
                cont_sigma = "constant";
    int cont_m = 1, cont_cells = 0;
    c_cont->add_option("--map", cont_map, "identity | linear:a | sin:amp,freq | ramp:n");
    c_cont->add_option("--s", cont_s, "number or 'inf'");
    c_cont->add_option("--m", cont_m);
    c_cont->add_option("--kernel", cont_kernel);
    c_cont->add_option("--sigma", cont_sigma);
    c_cont->add_option("--cells", cont_cells, "map cells per axis (0: 2048 for m=1, 64 for m=2)");

    auto* c_nl = app.add_subcommand("nonlocal", "nonlocal energies over an h sweep");
    std::string nl_map = "identity", nl_hs = "0.1,0.05,0.03,0.02,0.01", nl_kernel = "epanechnikov";
    int nl_grid = 4096;
    c_nl->add_option("--map", nl_map, "identity | linear:a | cutting:k");
    c_nl->add_option("--h-sweep", nl_hs, "comma-separated bandwidths");
    c_nl->add_option("--kernel", nl_kernel);
    c_nl->add_option("--grid", nl_grid);

    auto* c_micro = app.add_subcommand("microstructure", "cutting-map energy scan");
    int micro_d = 2, micro_m = 1, micro_kmax = 32;
    double micro_alpha = 0.5;
    bool micro_rescaled = false, micro_allk = false;
    long micro_samples = 1000000;
    uint64_t micro_seed = 1234;
    std::string micro_klist;
    c_micro->add_option("--d", micro_d);
    c_micro->add_option("--m", micro_m);
    c_micro->add_option("--kmax", micro_kmax);
    c_micro->add_option("--alpha", micro_alpha);
    c_micro->add_flag("--rescaled", micro_rescaled, "scan k^{-1/(2m)} T_k under Phi_inf");
    c_micro->add_flag("--all-k", micro_allk, "every k in 2..kmax instead of dyadic");
    c_micro->add_option("--klist", micro_klist, "explicit comma-separated k values");
    c_micro->add_option("--samples", micro_samples);
    c_micro->add_option("--seed", micro_seed);

    auto* c_cons = app.add_subcommand("consistency", "discrete-to-continuum rate sweep");
    std::string cons_mode = "attraction", cons_map = "identity",
                cons_nlist = "250,500,1000,2000,4000";
    double cons_hexp = 1.0 / 3.0;
    int cons_trials = 10;
    uint64_t cons_seed = 42;
    c_cons->add_option("--mode", cons_mode, "attraction | repulsion");
    c_cons->add_option("--map", cons_map, "identity | sin:amp,freq");
    c_cons->add_option("--nlist", cons_nlist);
    c_cons->add_option("--h-exp", cons_hexp, "h = n^{-exp}");
    c_cons->add_option("--trials", cons_trials);
    c_cons->add_option("--seed", cons_seed);

    auto* c_exp = app.add_subcommand("sec33", "cluster-mixture reproduction run");
    c_exp->set_help_flag("--help", "print help");
    double exp_c = 0.5, exp_h = 0.0, exp_dt = 0.0;
    int exp_n = 500;
    long exp_steps = 10000;
    std::string exp_init = "continuum";
    uint64_t exp_seed = 1;
    bool exp_full = false;
    c_exp->add_option("--c", exp_c, "cluster separation: 0, 0.1 or 0.5");
    c_exp->add_option("--n", exp_n);
    c_exp->add_option("--steps", exp_steps);
    c_exp->add_option("--h", exp_h, "bandwidth (0: 5/n)");
    c_exp->add_option("--dt", exp_dt, "time step (0: n/5)");
    c_exp->add_option("--init", exp_init, "random | identity | continuum");
    c_exp->add_option("--seed", exp_seed);
    c_exp->add_flag("--full", exp_full, "full-scale preset: n=2500, 1e5 steps");

    auto* c_rerun = app.add_subcommand("rerun", "replay a persisted config");
    std::string rerun_path;
    c_rerun->add_option("--config", rerun_path, "config.json from a previous run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cout << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }

    json cfg;
    if (c_sample->parsed()) {
        cfg = {{"subcommand", "sample"}, {"density", density}, {"n", sample_n},
               {"seed", sample_seed},    {"out", sample_out}};
    } else if (c_embed->parsed()) {
        cfg = {{"subcommand", "embed"}, {"density", density},   {"n", embed_n},
               {"h", embed_h},          {"steps", embed_steps}, {"dt", embed_dt},
               {"init", embed_init},    {"mode", embed_mode},   {"kernel", embed_kernel},
               {"sigma", embed_sigma},  {"seed", embed_seed},   {"trace_every", embed_trace}};
        if (!embed_export_p.empty()) cfg["export_p"] = embed_export_p;
    } else if (c_solve->parsed()) {
        cfg = {{"subcommand", "solve1d"}, {"density", density}, {"sigma", solve_sigma},
               {"kernel", solve_kernel},  {"grid", solve_grid}, {"s", solve_s},
               {"tol", solve_tol}};
    } else if (c_cont->parsed()) {
        cfg = {{"subcommand", "continuum"}, {"density", density}, {"map", cont_map},
               {"s", cont_s},               {"m", cont_m},        {"kernel", cont_kernel},
               {"sigma", cont_sigma},       {"cells", cont_cells}};
    } else if (c_nl->parsed()) {
        cfg = {{"subcommand", "nonlocal"}, {"map", nl_map},   {"h_sweep", nl_hs},
               {"kernel", nl_kernel},      {"grid", nl_grid}};
    } else if (c_micro->parsed()) {
        cfg = {{"subcommand", "microstructure"},
               {"d", micro_d},
               {"m", micro_m},
               {"kmax", micro_kmax},
               {"alpha", micro_alpha},
               {"rescaled", micro_rescaled},
               {"all_k", micro_allk},
               {"samples", micro_samples},
               {"seed", micro_seed}};
        if (!micro_klist.empty()) cfg["klist"] = micro_klist;
    } else if (c_cons->parsed()) {
        cfg = {{"subcommand", "consistency"}, {"mode", cons_mode},  {"map", cons_map},
               {"nlist", cons_nlist},         {"h_exp", cons_hexp}, {"trials", cons_trials},
               {"seed", cons_seed}};
    } else if (c_exp->parsed()) {
        cfg = {{"subcommand", "sec33"}, {"c", exp_c},       {"n", exp_n},
               {"steps", exp_steps},    {"h", exp_h},       {"dt", exp_dt},
               {"init", exp_init},      {"seed", exp_seed}, {"full", exp_full}};
    } else if (c_rerun->parsed()) {
        std::ifstream f(rerun_path);
        if (!f) throw std::runtime_error("cannot read config: " + rerun_path);
        cfg = json::parse(f);
    }

    json summary = execute(cfg, outdir);
    std::cout << summary.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
