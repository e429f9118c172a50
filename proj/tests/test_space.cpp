#include <catch2/catch_amalgamated.hpp>

#include "bmvd/campaigns.hpp"
#include "bmvd/rng.hpp"
#include "bmvd/space.hpp"

using namespace bmvd;

namespace {

GluedPoint random_point(PhiloxRng& rng, const SpaceParams& sp) {
    const double u = rng.uniform();
    if (u < 0.1) return GluedPoint::junction();
    const bool primary = u < 0.55;
    const int k = sp.side_dim(primary);
    const double r = 0.02 + 4.0 * rng.uniform();
    const double R = sp.side_eps(primary) + r;
    std::vector<double> c(k, 0.0);
    if (k == 1) {
        c[0] = R;
    } else {
        double n2 = 0.0;
        for (int i = 0; i < k; ++i) {
            c[i] = rng.normal();
            n2 += c[i] * c[i];
        }
        for (int i = 0; i < k; ++i) c[i] *= R / std::sqrt(n2);
    }
    return {primary ? Part::SideD : Part::SideDPrime, std::move(c)};
}

}  // namespace

TEST_CASE("junction weights and skew parameter") {
    SpaceParams sp(3, 1, 1.0, 1.0, 1.0);
    CHECK(sp.w_plus == Catch::Approx(4.0 * M_PI));
    CHECK(sp.w_minus == Catch::Approx(1.0));
    CHECK(sp.beta() > -1.0);
    CHECK(sp.beta() < 1.0);

    // p = |boundary sphere| makes the junction symmetric
    SpaceParams bal(3, 1, 1.0, 1.0, 4.0 * M_PI);
    CHECK(bal.beta() == Catch::Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(SpaceParams(1, 2, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SpaceParams(3, 1, -1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("radial excess") {
    SpaceParams sp3(3, 1, 1.0, 1.0, 1.0);
    CHECK(radial_excess(GluedPoint::junction(), sp3) == 0.0);
    CHECK(radial_excess(GluedPoint::side_d({2, 0, 0}), sp3) == Catch::Approx(1.0));

    SpaceParams sp22(2, 2, 1.0, 0.5, 1.0);
    CHECK(radial_excess(GluedPoint::side_dp({0.6, 0.8}), sp22) == Catch::Approx(0.5));

    CHECK_THROWS_AS(radial_excess(GluedPoint::side_d({0.5, 0, 0}), sp3), std::domain_error);
    CHECK_THROWS_AS(radial_excess(GluedPoint::side_dp({-1.0}), sp3), std::domain_error);
}

TEST_CASE("shortest-path metric") {
    SpaceParams sp(3, 2, 1.0, 1.0, 1.0);
    CHECK(rho(GluedPoint::junction(), GluedPoint::junction(), sp) == 0.0);

    // cross-part distance is the sum of radial excesses
    CHECK(rho(GluedPoint::side_d({2, 0, 0}), GluedPoint::side_dp({3, 0}), sp) ==
          Catch::Approx(1.0 + 2.0));

    // same part: direct segment against the route through a*
    CHECK(rho(GluedPoint::side_d({2, 0, 0}), GluedPoint::side_d({0, 2, 0}), sp) ==
          Catch::Approx(2.0));
}

TEST_CASE("signed radial coordinate") {
    SpaceParams sp(3, 2, 1.0, 1.0, 1.0);
    CHECK(signed_radial(GluedPoint::junction(), sp) == 0.0);
    CHECK(signed_radial(GluedPoint::side_d({3, 0, 0}), sp) == Catch::Approx(2.0));
    const double r = 0.7;
    CHECK(signed_radial(GluedPoint::side_dp({1.0 + r, 0}), sp) == Catch::Approx(-r));
}

TEST_CASE("metric axioms on sampled triples") {
    SpaceParams sp(3, 2, 1.0, 0.7, 2.0);
    PhiloxRng rng(99, 0);
    for (int i = 0; i < 10000; ++i) {
        const GluedPoint x = random_point(rng, sp);
        const GluedPoint y = random_point(rng, sp);
        const GluedPoint z = random_point(rng, sp);
        const double xy = rho(x, y, sp), yx = rho(y, x, sp);
        REQUIRE(xy == yx);  // symmetry is exact
        const double xz = rho(x, z, sp), zy = rho(z, y, sp);
        REQUIRE(xy <= xz + zy + 1e-12 * (1.0 + xy));
    }
}

TEST_CASE("ball measure closed cases") {
    // tangent interior ball on a 2-dimensional side is the full disc
    SpaceParams sp21(2, 1, 1.0, 1.0, 1.0);
    const double r = 0.5;
    const GluedPoint x = GluedPoint::side_d({1.0 + r, 0});
    CHECK(ball_measure(x, r, sp21) == Catch::Approx(M_PI * r * r).epsilon(1e-6));

    // ball disjoint from the junction sphere: exactly the d-ball volume
    SpaceParams sp3(3, 1, 1.0, 1.0, 1.0);
    const GluedPoint far = GluedPoint::side_d({5, 0, 0});
    CHECK(ball_measure(far, 1.0, sp3) ==
          Catch::Approx(ball_volume(3)).epsilon(1e-7));

    // ball around a*: both junction shells
    SpaceParams sp32(3, 2, 1.0, 0.5, 2.0);
    const double rr = 0.4;
    const double expect = ball_volume(3) * (std::pow(1.0 + rr, 3) - 1.0) +
                          2.0 * ball_volume(2) * (std::pow(0.5 + rr, 2) - 0.25);
    CHECK(ball_measure(GluedPoint::junction(), rr, sp32) == Catch::Approx(expect).epsilon(1e-7));

    CHECK_THROWS_AS(ball_measure(far, -1.0, sp3), std::domain_error);
}

TEST_CASE("ball measure is monotone and continuous in r") {
    SpaceParams sp(3, 2, 1.0, 0.8, 1.5);
    const GluedPoint x = GluedPoint::side_d({1.7, 0.4, 0});
    double prev = 0.0;
    const double r_hi = 3.0;
    for (double r = 0.05; r <= r_hi; r += 0.05) {
        const double m = ball_measure(x, r, sp);
        REQUIRE(m >= prev);
        // crude surface bound: total sphere area at the maximal reach
        const double reach_d = euclid_norm(x.coords) + r;
        const double reach_p = 0.8 + r;
        const double surf = sphere_area(3) * reach_d * reach_d +
                            1.5 * sphere_area(2) * reach_p;
        if (prev > 0.0) REQUIRE(m - prev <= surf * 0.05 * 1.05);
        prev = m;
    }
}

TEST_CASE("ball measure agrees with the rejection oracle") {
    SpaceParams sp(3, 2, 1.0, 0.6, 2.0);
    PhiloxRng rng(7, 3);
    size_t ok = 0;
    const size_t cases = 12;
    for (size_t c = 0; c < cases; ++c) {
        const bool primary = rng.uniform() < 0.5;
        const double rx = 0.2 + 2.0 * rng.uniform();
        const double r = 0.3 + 2.0 * rng.uniform();
        const int k = sp.side_dim(primary);
        std::vector<double> coords(k, 0.0);
        coords[0] = sp.side_eps(primary) + rx;
        GluedPoint x{primary ? Part::SideD : Part::SideDPrime, coords};
        const double det = ball_measure(x, r, sp);
        const auto [mc, se] = ball_measure_rejection(x, r, sp, 40000, 1000 + c);
        if (std::abs(det - mc) <= 3.0 * se) ++ok;
    }
    CHECK(ok >= cases - 1);
}

TEST_CASE("volume doubling ratio") {
    // symmetric gluing far from a*: Euclidean scaling 2^d
    SpaceParams sym(3, 3, 1.0, 1.0, 1.0);
    const GluedPoint far = GluedPoint::side_d({7, 0, 0});
    CHECK(vd_ratio(far, 0.01, sym) == Catch::Approx(8.0).epsilon(1e-3));

    // junction placement: ratio grows like r^{d'-d} = r^{-2} for (3,1)
    SpaceParams sp(3, 1, 1.0, 1.0, 1.0);
    auto at = [&](double r) {
        return vd_ratio(GluedPoint::side_d({r + 1.0, 0, 0}), r, sp);
    };
    const double growth = at(0.001) / at(0.01);
    CHECK(growth > 50.0);
    CHECK(growth < 200.0);
}

TEST_CASE("volume doubling failure scaling certificate") {
    // gluing radii far below the probed window; the product
    // vd_ratio * r^{d-d'} must stay within a factor 4
    for (int dp : {1, 2}) {
        CampaignConfig cfg;
        cfg.params = SpaceParams(3, dp, 1e-6, 1e-6, 1.0);
        const VdReport rep = vd_check_campaign(cfg, 6, 20000);
        INFO("d'=" << dp << " band=" << rep.product_band);
        CHECK(rep.product_band <= 4.0);
    }
}
