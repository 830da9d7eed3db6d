#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsnelim/experiments.hpp"
#include "tsnelim/io.hpp"

using namespace tsnelim;

TEST_CASE("sorted-window attraction agrees with the graph-based energy", "[experiments]") {
    // two independent implementations of A_n on the same cloud
    auto mix = DensitySpec::cluster_mixture(0.1);
    auto ep = KernelSpec::epanechnikov(1);
    auto sigma = BandwidthField::knn_proxy(mix);
    auto cloud = sample(mix, 200, 5);
    double h = 5.0 / 200;
    auto P = build_affinities(cloud, ep, sigma, h);
    std::vector<double> Y(cloud.n);
    for (int i = 0; i < cloud.n; ++i) Y[i] = 0.7 * cloud.x1(i) + 0.05 * std::sin(9 * cloud.x1(i));
    auto rep = rescaled_energy(P, Y, 1, h);

    std::vector<double> xs = cloud.pts;
    std::sort(xs.begin(), xs.end());
    auto T = [](double x) { return 0.7 * x + 0.05 * std::sin(9 * x); };
    double a_direct = discrete_attraction_1d(xs, T, ep, sigma, h);
    CHECK(a_direct == Catch::Approx(rep.a_n).margin(1e-12));

    double r_direct = std::log(discrete_exp_repulsion_1d(xs, T, h));
    CHECK(r_direct == Catch::Approx(rep.r_n).margin(1e-12));
}

TEST_CASE("repulsion consistency sweep target and averaging", "[experiments]") {
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);
    auto ep = KernelSpec::epanechnikov(1);
    auto ident = [](double x) { return x; };
    auto res = run_consistency_sweep(SweepMode::repulsion, ident, ep, one, uni, {400, 800},
                                     [](int) { return 0.02; }, 20, 11);
    // limit target pi ||rho_Y||^2 = pi for the uniform identity pushforward
    CHECK(res.limit == Catch::Approx(pi).margin(1e-6));
    for (const auto& r : res.rows) {
        REQUIRE(r.mean_err < 0.5);
        REQUIRE(r.sd_err > 0.0);
    }
    // the standard error of the mean shrinks with more trials
    auto few = run_consistency_sweep(SweepMode::repulsion, ident, ep, one, uni, {400},
                                     [](int) { return 0.02; }, 5, 11);
    double se_few = few.rows[0].sd_err / std::sqrt(5.0);
    double se_many = res.rows[0].sd_err / std::sqrt(20.0);
    CHECK(se_many < se_few);
}

TEST_CASE("mixture experiment plumbing", "[experiments][slow]") {
    MixtureRunConfig cfg;
    cfg.c = 0.1;
    cfg.n = 150;
    cfg.steps = 800;
    cfg.seed = 3;
    cfg.init = InitMode::continuum;
    auto res = run_mixture_experiment(cfg);
    REQUIRE(!res.state.diverged);
    CHECK(res.h == Catch::Approx(5.0 / 150));
    CHECK(res.final_kl <= res.initial_kl);
    CHECK(res.T_star.strictly_increasing());
    // postprocessed map starts at zero
    double miny = *std::min_element(res.T_n.y.begin(), res.T_n.y.end());
    CHECK(miny == Catch::Approx(0.0).margin(1e-15));
    // zero-step run returns the postprocessed initialization
    cfg.steps = 0;
    auto frozen = run_mixture_experiment(cfg);
    for (size_t i = 0; i < frozen.T_n.y.size(); ++i) {
        double expected = frozen.T_star(frozen.T_n.x[i]);
        double shifted = frozen.T_n.y[i];
        // T* sampled at the data points, shifted so the minimum is zero
        REQUIRE(shifted - (expected - frozen.T_star(frozen.T_n.x[0])) ==
                Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("csv and config hashing", "[io]") {
    json cfg{{"subcommand", "demo"}, {"n", 3}};
    auto h1 = config_hash(cfg);
    auto h2 = config_hash(json{{"n", 3}, {"subcommand", "demo"}});  // key order irrelevant
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);
    CHECK(config_hash(json{{"n", 4}, {"subcommand", "demo"}}) != h1);

    CsvTable t;
    t.columns = {"a", "b"};
    t.add_row({1.0, 2.5});
    auto text = t.render(h1);
    CHECK(text.rfind("# config_hash=" + h1, 0) == 0);
    CHECK(text.find("a,b\n") != std::string::npos);
    CHECK(text.find("1,2.5\n") != std::string::npos);

    // identical tables render identical bytes
    CsvTable t2;
    t2.columns = {"a", "b"};
    t2.add_row({1.0, 2.5});
    CHECK(t2.render(h1) == text);
}

TEST_CASE("potential eval record", "[kernels]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto ev = phi_s_eval(ep, 2.0, Mat::scalar(1.0));
    CHECK(ev.s == 2.0);
    CHECK(ev.value == Catch::Approx(phi_s(ep, 2.0, 1.0)));
}

TEST_CASE("spherical-average constant agrees with the finite-s limit in d = 2",
          "[kernels]") {
    // the radial-marginal evaluation of the s = infinity constant, checked
    // against direct finite-s quadrature
    auto ep2 = KernelSpec::epanechnikov(2);
    Mat A(2, 2);
    A(0, 0) = 1.1;
    A(0, 1) = -0.3;
    A(1, 1) = 0.8;
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(phi_s(ep2, inf, A) == Catch::Approx(phi_s(ep2, 1e7, A)).margin(2e-4));

    auto tg2 = KernelSpec::truncated_gaussian(2);
    CHECK(phi_s(tg2, inf, A) == Catch::Approx(phi_s(tg2, 1e7, A)).margin(2e-4));
}
