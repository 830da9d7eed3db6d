#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsnelim/continuum.hpp"

using namespace tsnelim;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

PiecewiseLinearMap linear_map(double slope, int cells = 64) {
    return PiecewiseLinearMap::from_function([slope](double t) { return slope * t; }, 0.0, 1.0,
                                             cells);
}

}  // namespace

TEST_CASE("continuum attraction basic values", "[continuum]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);

    auto flat = PiecewiseLinearMap::from_function([](double) { return 0.7; }, 0.0, 1.0, 16);
    CHECK(continuum_attraction(flat, ep, one, uni, 1.0) == Catch::Approx(0.0).margin(1e-12));

    auto ident = linear_map(1.0);
    CHECK(continuum_attraction(ident, ep, one, uni, 1.0) ==
          Catch::Approx(phi_s(ep, 1.0, 1.0)).margin(1e-10));

    // s = infinity: halving sigma shifts the value by exactly -2 log 2
    auto half = BandwidthField::constant(0.5);
    double a1 = continuum_attraction(ident, ep, one, uni, kInf);
    double a2 = continuum_attraction(ident, ep, half, uni, kInf);
    CHECK(a2 - a1 == Catch::Approx(-2.0 * std::log(2.0)).margin(1e-9));

    // zero-Jacobian cell at s = infinity diverges, cells named
    std::vector<double> xs{0.0, 0.25, 0.5, 1.0}, ys{0.0, 0.25, 0.25, 0.75};
    auto withflat = PiecewiseLinearMap::from_breakpoints(xs, ys);
    CHECK_THROWS_WITH(continuum_attraction(withflat, ep, one, uni, kInf),
                      Catch::Matchers::ContainsSubstring("zero-Jacobian cells"));

    // the sigma dependence at s = infinity is exactly the constant C2
    auto mix = DensitySpec::cluster_mixture(0.1);
    auto knn = BandwidthField::knn_proxy(mix);
    auto T = PiecewiseLinearMap::from_function([](double t) { return t + 0.3 * t * t; }, -1.0, 1.0,
                                               8192);
    double shift = continuum_attraction(T, ep, knn, mix, kInf) -
                   continuum_attraction(T, ep, BandwidthField::constant(1.0), mix, kInf);
    double c2_shift = attraction_constant_c2(ep, knn, mix) -
                      attraction_constant_c2(ep, BandwidthField::constant(1.0), mix);
    CHECK(shift == Catch::Approx(c2_shift).margin(1e-6));
}

TEST_CASE("continuum repulsion m <= 2", "[continuum]") {
    auto uni01 = DensitySpec::uniform1d(0.0, 1.0);
    auto ident = linear_map(1.0);
    auto p1 = pushforward_density_1d(ident, uni01);
    CHECK(continuum_repulsion(p1, 1) == Catch::Approx(0.0).margin(1e-12));

    auto stretch = linear_map(2.0);
    auto p2 = pushforward_density_1d(stretch, uni01);
    CHECK(continuum_repulsion(p2, 1) == Catch::Approx(std::log(0.5)).margin(1e-12));

    // unnormalized input rejected
    auto bad = p2;
    for (auto& v : bad.values) v *= 1.02;
    CHECK_THROWS_AS(continuum_repulsion(bad, 1), std::invalid_argument);
}

TEST_CASE("riesz repulsion: ball value, MC oracle, Fourier route", "[continuum][slow]") {
    // exact uniform ball density sampled on a lattice
    const int M = 32;
    PushforwardDensity ball;
    ball.repr = DensityRepr::histogram;
    ball.dim = 3;
    ball.box = Box::cube(3, -1.0, 1.0);
    ball.bins = {M, M, M};
    ball.values.assign(static_cast<size_t>(M) * M * M, 0.0);
    double w = 2.0 / M;
    const int sub = 6;  // partial volumes for boundary cells
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) {
                int inside = 0;
                for (int a = 0; a < sub; ++a)
                    for (int b = 0; b < sub; ++b)
                        for (int c2 = 0; c2 < sub; ++c2) {
                            double x = -1 + (i + (a + 0.5) / sub) * w;
                            double y = -1 + (j + (b + 0.5) / sub) * w;
                            double z = -1 + (k + (c2 + 0.5) / sub) * w;
                            if (x * x + y * y + z * z <= 1.0) ++inside;
                        }
                ball.values[(static_cast<size_t>(i) * M + j) * M + k] =
                    3.0 / (4.0 * pi) * inside / (sub * sub * sub);
            }
    double mass = ball.mass();
    for (auto& v : ball.values) v /= mass;

    double direct = riesz_interaction(ball);
    CHECK(direct == Catch::Approx(2.25).epsilon(0.01));  // derived: E[|Y-Y'|^{-2}] = 9/4

    // Monte Carlo oracle with 1e7 pairs
    Rng rng(4);
    auto ball_point = [&](double* out) {
        double n2;
        double g[3];
        do {
            n2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                g[a] = rng.normal();
                n2 += g[a] * g[a];
            }
        } while (n2 < 1e-20);
        double r = std::cbrt(rng.uniform());
        double inv = r / std::sqrt(n2);
        for (int a = 0; a < 3; ++a) out[a] = g[a] * inv;
    };
    double acc = 0.0;
    const long pairs = 10000000;
    for (long t = 0; t < pairs; ++t) {
        double a[3], b[3];
        ball_point(a);
        ball_point(b);
        double d2 = 0.0;
        for (int q = 0; q < 3; ++q) d2 += (a[q] - b[q]) * (a[q] - b[q]);
        acc += 1.0 / d2;
    }
    double mc = acc / pairs;
    CHECK(direct == Catch::Approx(mc).epsilon(0.01));

    // Fourier route on a smooth radial profile c (1 - r^2)^2_+
    const double c = 105.0 / (32.0 * pi);
    auto bump = [c](double r) { return r < 1.0 ? c * (1 - r * r) * (1 - r * r) : 0.0; };
    PushforwardDensity smooth = ball;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) {
                double x = -1 + (i + 0.5) * w, y = -1 + (j + 0.5) * w, z = -1 + (k + 0.5) * w;
                smooth.values[(static_cast<size_t>(i) * M + j) * M + k] =
                    bump(std::sqrt(x * x + y * y + z * z));
            }
    double smass = smooth.mass();
    for (auto& v : smooth.values) v /= smass;
    double direct_s = riesz_interaction(smooth);
    double fourier_s = riesz_interaction_fourier_radial(bump, 1.0);
    CHECK(direct_s == Catch::Approx(fourier_s).epsilon(0.01));
}

TEST_CASE("scaling identity, m = 1", "[continuum]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto mix = DensitySpec::cluster_mixture(0.1);
    auto one = BandwidthField::constant(1.0);
    auto T = PiecewiseLinearMap::from_function([](double t) { return t + 0.2 * std::sin(3 * t); },
                                               -1.0, 1.0, 256);

    auto same = scaling_identity_check(T, ep, one, mix, 1.0, 1.0);
    CHECK(same.lhs == Catch::Approx(same.rhs).margin(1e-12));

    for (double lam : {0.5, 2.0}) {
        for (double s : {0.5, 1.0, 2.0}) {
            auto chk = scaling_identity_check(T, ep, one, mix, s, lam);
            REQUIRE(std::abs(chk.lhs - chk.rhs) < 1e-6);
        }
    }
}

TEST_CASE("scaling identity, m = 2", "[continuum]") {
    auto ep2 = KernelSpec::epanechnikov(2);
    auto uni2 = DensitySpec::uniform(Box::square(0.0, 1.0));
    auto one = BandwidthField::constant(1.0);
    auto T = GridMap::from_function(2, 2, 33, Box::square(0.0, 1.0), [](const double* x, double* y) {
        y[0] = x[0] + 0.1 * std::sin(2 * x[1]);
        y[1] = 1.3 * x[1];
    });
    for (double lam : {0.5, 3.0}) {
        auto chk = scaling_identity_check(T, ep2, one, uni2, 1.0, lam, 64);
        REQUIRE(std::abs(chk.lhs - chk.rhs) < 1e-6);
    }
}

TEST_CASE("scale invariance and shifts at s = infinity", "[continuum]") {
    auto ep2 = KernelSpec::epanechnikov(2);
    auto uni2 = DensitySpec::uniform(Box::square(0.0, 1.0));
    auto one = BandwidthField::constant(1.0);
    auto T = GridMap::from_function(2, 2, 33, Box::square(0.0, 1.0), [](const double* x, double* y) {
        y[0] = x[0] + 0.2 * x[1];
        y[1] = x[1] - 0.1 * x[0] * x[0];
    });
    auto rho_y = pushforward_histogram(T, uni2, 64);
    double base = continuum_attraction(T, ep2, one, uni2, kInf) + continuum_repulsion(rho_y, 2);
    for (double lam : {0.1, 2.0, 10.0}) {
        double scaled = continuum_attraction(T.scaled(lam), ep2, one, uni2, kInf) +
                        continuum_repulsion(dilated(rho_y, lam), 2);
        REQUIRE(std::abs(scaled - base) < 1e-8);
    }

    // m = 1: E[lambda T; Phi_inf] - E[T; Phi_inf] = log lambda
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto T1 = PiecewiseLinearMap::from_function([](double t) { return t + 0.1 * t * t; }, 0.0, 1.0,
                                                128);
    double e0 = continuum_energy_1d(T1, ep, one, uni, kInf).total;
    for (double lam : {0.2, 5.0}) {
        double e1 = continuum_energy_1d(T1.scaled(lam), ep, one, uni, kInf).total;
        REQUIRE(e1 - e0 == Catch::Approx(std::log(lam)).margin(1e-8));
    }
}

TEST_CASE("scale stability at finite s for m = 1", "[continuum][property]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);
    auto T = linear_map(1.0, 32);
    std::vector<double> lams, es;
    for (int i = 0; i <= 24; ++i) {
        double lam = std::pow(10.0, -3.0 + 6.0 * i / 24.0);
        lams.push_back(lam);
        es.push_back(continuum_energy_1d(T.scaled(lam), ep, one, uni, 1.0).total);
    }
    CHECK(es[1] < es[0]);
    CHECK(es[2] < es[1]);
    CHECK(es[24] > es[23]);
    CHECK(es[23] > es[22]);
}

TEST_CASE("rearrangement", "[continuum]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);

    // already increasing: T* = T - T(0)
    auto inc = PiecewiseLinearMap::from_function([](double t) { return 2 * t + 1.0; }, 0.0, 1.0, 32);
    auto incr = rearrange_1d(inc);
    for (size_t i = 0; i < inc.y.size(); ++i)
        REQUIRE(incr.y[i] == Catch::Approx(inc.y[i] - 1.0).margin(1e-14));

    // tent map: T* has unit slope
    auto tent = PiecewiseLinearMap::from_function([](double t) { return std::abs(t - 0.5); }, 0.0,
                                                  1.0, 64);
    auto tentr = rearrange_1d(tent);
    REQUIRE(tentr.strictly_increasing());
    for (int c = 0; c < tentr.cells(); ++c) REQUIRE(tentr.slope(c) == Catch::Approx(1.0));
    double a_before = continuum_attraction(tent, ep, one, uni, 1.0);
    double a_after = continuum_attraction(tentr, ep, one, uni, 1.0);
    CHECK(a_before == Catch::Approx(a_after).margin(1e-10));
    CHECK(l2_pushforward_1d(tentr, uni) < l2_pushforward_1d(tent, uni) - 0.1);

    // random zig-zags: attraction preserved, repulsion non-increasing
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        int cells = 8 + static_cast<int>(rng.uniform() * 24);
        std::vector<double> xs(cells + 1), ys(cells + 1);
        for (int i = 0; i <= cells; ++i) xs[i] = static_cast<double>(i) / cells;
        ys[0] = 0.0;
        for (int i = 1; i <= cells; ++i) {
            double slope = (rng.uniform() < 0.4 ? -1.0 : 1.0) * (0.2 + 2.0 * rng.uniform());
            ys[i] = ys[i - 1] + slope * (xs[i] - xs[i - 1]);
        }
        auto T = PiecewiseLinearMap::from_breakpoints(xs, ys);
        auto R = rearrange_1d(T);
        double aT = continuum_attraction(T, ep, one, uni, 1.0);
        double aR = continuum_attraction(R, ep, one, uni, 1.0);
        REQUIRE(std::abs(aT - aR) < 1e-10);
        REQUIRE(l2_pushforward_1d(R, uni) <= l2_pushforward_1d(T, uni) + 1e-10);
    }
}

TEST_CASE("discontinuity insensitivity of the ramp family", "[continuum]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);
    double base = continuum_energy_1d(linear_map(1.0, 2), ep, one, uni, 1.0).total;

    double prev = std::numeric_limits<double>::infinity();
    for (int n : {10, 100, 1000, 10000}) {
        auto Tn = heaviside_ramp_map(1.0, n);
        double e = continuum_energy_1d(Tn, ep, one, uni, 1.0).total;
        double err = std::abs(e - base);
        // closed form: A = Phi1(1)(1 - 1/n) + Phi1(1+n)/n, exp(R) = 1 - 1/n + 1/(n(n+1))
        double a_closed = phi_s(ep, 1.0, 1.0) * (1.0 - 1.0 / n) + phi_s(ep, 1.0, 1.0 + n) / n;
        double r_closed = std::log(1.0 - 1.0 / n + 1.0 / (static_cast<double>(n) * (n + 1)));
        REQUIRE(e == Catch::Approx(a_closed + r_closed).margin(1e-8));
        REQUIRE(err < prev);
        prev = err;
    }
    CHECK(prev < 2e-3);
}

TEST_CASE("SNE continuum energy", "[continuum]") {
    auto ep = KernelSpec::epanechnikov(1);
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    auto one = BandwidthField::constant(1.0);
    double c_eta = directional_second_moment(ep);

    auto ident = linear_map(1.0);
    CHECK(sne_continuum_energy(ident, ep, one, uni) == Catch::Approx(c_eta).margin(1e-10));

    // T -> 2T: attraction x4, repulsion -log 2
    auto twice = linear_map(2.0);
    double e1 = sne_continuum_energy(ident, ep, one, uni);
    double e2 = sne_continuum_energy(twice, ep, one, uni);
    CHECK(e2 - e1 == Catch::Approx(4.0 * c_eta - c_eta - std::log(2.0)).margin(1e-10));

    auto flat = PiecewiseLinearMap::from_function([](double) { return 0.3; }, 0.0, 1.0, 8);
    CHECK_THROWS_AS(sne_continuum_energy(flat, ep, one, uni), std::runtime_error);
}

TEST_CASE("Perona-Malik energy", "[continuum]") {
    auto uni = DensitySpec::uniform1d(0.0, 1.0);
    Profile1D p = Profile1D::on_grid(uni, BandwidthField::constant(1.0), 257, 1.0);
    CHECK(perona_malik_energy(p, 1.0) == Catch::Approx(std::log(2.0)).margin(1e-12));
    CHECK_THROWS_AS(perona_malik_energy(p, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(perona_malik_energy(p, 0.0), std::invalid_argument);

    // blow-up mechanism: with density mass below lambda/2 the energy
    // decreases along u = C as C grows
    auto thin = uni.rescaled_mass(0.1);
    auto pthin = Profile1D::on_grid(thin, BandwidthField::constant(1.0), 257);
    double lambda = 0.3;
    double prev = std::numeric_limits<double>::infinity();
    for (double C : {10.0, 100.0, 1000.0, 10000.0}) {
        pthin.u.assign(pthin.size(), C);
        double e = perona_malik_energy(pthin, lambda);
        REQUIRE(e < prev);
        prev = e;
    }

    // minimizer from the solver satisfies the critical-point equation
    auto mix = DensitySpec::cluster_mixture(0.1);
    auto res = perona_malik_minimize(mix, 0.8, 1025);
    CHECK(res.residual < 1e-8);
    // and its energy is below nearby perturbations
    Profile1D q = res.u_star;
    // the solver ran on the rescaled density; evaluate I_lambda with the raw one
    for (int i = 0; i < q.size(); ++i) q.rho[i] = mix.pdf1(q.x[i]);
    double istar = perona_malik_energy(q, 0.8);
    Rng rng(3);
    for (int t = 0; t < 25; ++t) {
        Profile1D qq = q;
        for (int i = 0; i < qq.size(); ++i)
            qq.u[i] = std::max(1e-5, qq.u[i] * (1.0 + 0.3 * (rng.uniform() - 0.5)));
        REQUIRE(perona_malik_energy(qq, 0.8) >= istar - 1e-10);
    }
}
