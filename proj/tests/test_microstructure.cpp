#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsnelim/microstructure.hpp"

using namespace tsnelim;

TEST_CASE("cutting map geometry", "[microstructure]") {
    CHECK_THROWS_AS(build_cutting_map(2, 2, 4, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(build_cutting_map(1, 1, 4, 0.5), std::invalid_argument);

    // k = 1: the plain projection everywhere
    auto proj = build_cutting_map(2, 1, 1, 0.5);
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        double x[2] = {rng.uniform(), rng.uniform()};
        double y[1];
        proj.apply(x, y);
        REQUIRE(y[0] == x[0]);
    }

    // d=2, m=1, k=2: past the first cut the image is offset by exactly 1
    auto two = build_cutting_map(2, 1, 2, 0.5);
    double x[2] = {0.3, 0.9};  // e.x = 0.9 > 1/2
    double y[1];
    two.apply(x, y);
    CHECK(y[0] == Catch::Approx(0.3 + 1.0).margin(1e-12));
    // before the transition starts, no offset
    double x2[2] = {0.3, 0.2};
    two.apply(x2, y);
    CHECK(y[0] == Catch::Approx(0.3).margin(1e-12));

    // ramp slope (Lipschitz constant in the cut direction) is k/mu
    auto m8 = build_cutting_map(3, 2, 8, 0.5);
    double mid = (3.0 - 0.5 * m8.mu) / 8.0;  // inside the third transition interval
    double eps = 1e-9;
    double slope = (m8.ramp(mid + eps) - m8.ramp(mid - eps)) / (2 * eps);
    CHECK(slope == Catch::Approx(8.0 / m8.mu).epsilon(1e-6));
    CHECK(m8.jacobian_transition()(0, 2) == Catch::Approx(8.0 / m8.mu));

    // maps onto [0,k] x [0,1]^{m-1}
    auto k4 = build_cutting_map(3, 2, 4, 0.5);
    double top[3] = {1.0, 1.0, 1.0}, out[2];
    k4.apply(top, out);
    CHECK(out[0] == Catch::Approx(4.0).margin(1e-12));
    CHECK(out[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cutting scan, d=2 m=1", "[microstructure][slow]") {
    auto ep2 = KernelSpec::epanechnikov(2);
    std::vector<int> klist;
    for (int k = 2; k <= 32; ++k) klist.push_back(k);
    auto scan = cutting_energy_scan(2, 1, klist, ep2, 0.5, false, 400000, 99);

    // R[T_k] falls like -log k
    CHECK(scan.slope_repulsion > -1.15);
    CHECK(scan.slope_repulsion < -0.85);

    // attraction bounded for the alpha = 1/2 potential: spread <= 25% of mean
    double mn = 1e300, mx = -1e300, mean = 0.0;
    for (auto& r : scan.rows) {
        mn = std::min(mn, r.a_sublinear);
        mx = std::max(mx, r.a_sublinear);
        mean += r.a_sublinear / scan.rows.size();
    }
    CHECK((mx - mn) / mean <= 0.25);

    // mass conservation and max-density bound k max rho <= C within factor 4
    double ref = scan.rows.front().max_density * scan.rows.front().k;
    for (auto& r : scan.rows) {
        REQUIRE(std::abs(r.mass - 1.0) < 1e-9);
        double v = r.max_density * r.k;
        REQUIRE(v < 4.0 * ref);
        REQUIRE(v > ref / 4.0);
    }
}

TEST_CASE("rescaled cutting scan, d=3 m=2", "[microstructure][slow]") {
    auto ep3 = KernelSpec::epanechnikov(3);
    // at desk-scale k the transition term f * Phi_inf(A1) ~ 4 (k-1) log(k) / k^2
    // steepens the fit to about -0.78; the -1/(2m) law needs larger k
    auto desk = cutting_energy_scan(3, 2, {2, 4, 8, 16, 32}, ep3, 0.5, true, 200000, 7);
    CHECK(desk.slope_attraction <= -0.5 + 0.15);  // upper bound holds at any scale
    auto scan = cutting_energy_scan(3, 2, {64, 128, 256, 512, 1024}, ep3, 0.5, true, 400000, 7);

    // A[k^{-1/(2m)} T_k; Phi_inf] falls like -(1/m) log k = -(1/2) log k
    CHECK(scan.slope_attraction > -0.65);
    CHECK(scan.slope_attraction < -0.35);

    // repulsion stays bounded above
    double first = scan.rows.front().repulsion;
    for (auto& r : scan.rows) REQUIRE(r.repulsion <= first + 0.25);
}

TEST_CASE("riesz branch of the scan, d=4 m=3", "[microstructure][slow]") {
    auto ep4 = KernelSpec::epanechnikov(4);
    auto scan = cutting_energy_scan(4, 3, {2, 4, 8, 16}, ep4, 0.5, false, 300000, 17);
    // slope of R vs log k <= -2/m + 0.2
    CHECK(scan.slope_repulsion <= -2.0 / 3.0 + 0.2);
}

TEST_CASE("k = 1 energies equal the plain projection", "[microstructure]") {
    auto ep2 = KernelSpec::epanechnikov(2);
    auto scan = cutting_energy_scan(2, 1, {1}, ep2, 0.5, false, 200000, 5);
    const auto& r = scan.rows.front();
    CHECK(r.a_kernel == Catch::Approx(phi_s(ep2, 1.0, build_cutting_map(2, 1, 1, 0.5).jacobian_base()))
                            .margin(1e-10));
    // projection pushforward is uniform on [0,1]: log l2 = 0 up to MC noise
    CHECK(r.repulsion == Catch::Approx(0.0).margin(5e-3));
}
