#include "adswave/errors.hpp"
#include "adswave/odi.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace adswave;
using namespace adswave::odi;

namespace {

// Exponential variant with k1 + alpha1 = r.
OdiProblem with_rate(double b, double m2, double q, double r) {
    OdiProblem p;
    p.b = b;
    p.m2 = m2;
    p.q = q;
    p.k1 = r - p.alpha1();
    p.k0 = -(q - 1.0) * p.k1;
    return p;
}

OdiProblem random_problem(std::mt19937_64& rng, bool poly) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double b = 3.0 * u(rng);
    const double m2 = u(rng) * b * b / 4.0;
    const double q = 1.2 + 2.8 * u(rng);
    OdiProblem p = with_rate(b, m2, q, 0.05 + 1.95 * u(rng));
    p.B = 0.1 + 4.9 * u(rng);
    p.T0 = 3.0 * u(rng);
    p.G0 = u(rng);
    p.G0p = 0.05 + u(rng);
    if (poly) {
        p.ell0 = -(0.1 + 0.9 * u(rng));
        p.ell1 = (-p.ell0 + 0.5 * u(rng) + 0.05) / (q - 1.0);
    }
    return p;
}

}  // namespace

TEST_CASE("T tilde") {
    OdiProblem p = with_rate(2.0, 1.0, 2.0, 1.0);
    p.G0 = 0.0;
    CHECK(t_tilde0(p) == 0.0);
    p.G0 = 1.0;
    p.G0p = 1.0;
    CHECK(p.equal_roots());
    CHECK(t_tilde0(p) == doctest::Approx(0.5).epsilon(1e-15));

    OdiProblem d = with_rate(3.0, 2.0, 2.0, 1.0);
    CHECK(d.alpha1() == doctest::Approx(2.0));
    CHECK(d.alpha2() == doctest::Approx(1.0));
    d.G0 = 1.0;
    d.G0p = 0.0;
    CHECK(t_tilde0(d) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
    d.G0 = 0.0;
    d.G0p = 1.0;
    CHECK(t_tilde0(d) == 0.0);
}

TEST_CASE("threshold constants") {
    OdiProblem p = with_rate(0.0, 0.0, 2.0, 1.0);
    p.B = 1.0;
    const auto th = threshold_constants(p, 0.25, 0.0);
    CHECK(th.K0 == doctest::Approx(3.0 / std::pow(1.0 - std::exp(-0.25), 2)).epsilon(1e-14));
    CHECK(th.K0 == doctest::Approx(61.31).epsilon(1e-4));

    OdiProblem z = with_rate(0.0, 0.0, 3.0, 0.0);
    z.B = 2.0;
    z.T0 = 2.0;
    CHECK(threshold_constants(z, 0.5, 1.0).K0 == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(threshold_constants(z, 0.5, 1.0).T1 == doctest::Approx(2.0));

    OdiProblem m = with_rate(2.0, 0.5, 2.0, 2.0);
    m.T0 = 5.0;
    m.G0 = 0.3;
    CHECK(threshold_constants(m, 0.25, 0.0).T1 == 5.0);

    CHECK_THROWS_AS(threshold_constants(p, 0.5, 0.0), ValidationError);  // theta = (q-1)/2
    CHECK_THROWS_AS(threshold_constants(p, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(threshold_constants(z, 0.5, 2.0), ValidationError);  // kappa = T0
    CHECK_NOTHROW(threshold_constants(p, 0.25, 100.0));                   // kappa unused off the degenerate branch

    OdiProblem poly = with_rate(1.0, 0.0, 3.0, 1.0);
    poly.ell0 = -0.5;
    poly.ell1 = 0.5;  // ell0 + (q-1) ell1 = 0.5
    CHECK_THROWS_AS(threshold_constants(poly, 0.9, 0.0), ValidationError);  // 2 theta ell1 = 0.9 > 0.5
    CHECK(default_theta(poly) == doctest::Approx(0.5));
    CHECK_NOTHROW(threshold_constants(poly, default_theta(poly), 0.0));
}

TEST_CASE("problem validation") {
    OdiProblem p = with_rate(1.0, 0.1, 2.0, 0.5);
    CHECK(p.violations().empty());
    p.k0 += 0.1;
    CHECK_THROWS_AS(p.validate(), ValidationError);

    OdiProblem deg = with_rate(1.0, 0.25, 2.0, 0.0);
    deg.T0 = 0.0;
    CHECK_THROWS_AS(deg.validate(), ValidationError);
    deg.T0 = 1.0;
    CHECK_NOTHROW(deg.validate());

    OdiProblem neg = with_rate(1.0, 0.0, 2.0, 0.5);
    neg.G0 = 0.0;
    neg.G0p = 0.0;
    CHECK_THROWS_AS(neg.validate(), ValidationError);

    // Below -alpha2 but above -alpha1: accepted, flagged.
    OdiProblem low = with_rate(3.0, 2.0, 2.0, 0.5);  // k1 = -1.5, alpha2 = 1
    CHECK_NOTHROW(low.validate());
    CHECK_FALSE(low.normalized());
    CHECK(with_rate(3.0, 2.0, 2.0, 1.5).normalized());

    OdiProblem badpoly = with_rate(1.0, 0.0, 2.0, 1.0);
    badpoly.ell0 = 0.3;
    CHECK(badpoly.violations().size() == 1);
}

TEST_CASE("linear lower bound") {
    OdiProblem p = with_rate(0.0, 0.0, 2.0, 1.0);
    p.G0 = 0.7;
    p.G0p = 0.4;
    CHECK(g_lin(0.0, p) == doctest::Approx(0.7));
    CHECK(g_lin(2.5, p) == doctest::Approx(0.7 + 2.5 * 0.4).epsilon(1e-15));

    OdiProblem d = with_rate(3.0, 2.0, 2.0, 1.0);
    d.G0 = 0.0;
    d.G0p = 1.0;
    CHECK(g_lin(1.0, d) == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-14));
    d.G0 = 0.6;
    CHECK(g_lin(0.0, d) == doctest::Approx(0.6).epsilon(1e-15));

    // Distinct-roots formula approaches the equal-roots one.
    OdiProblem eq = with_rate(1.4, 0.49, 2.0, 1.0);
    eq.G0 = 0.8;
    eq.G0p = 0.3;
    OdiProblem near = eq;
    near.m2 = 0.49 - 1e-8;
    CHECK(eq.equal_roots());
    CHECK_FALSE(near.equal_roots());
    for (double t : {0.1, 1.0, 3.0, 10.0}) CHECK(std::abs(g_lin(t, near) - g_lin(t, eq)) <= 1e-5);
}

TEST_CASE("integrator: linear case, comparison and factorization") {
    OdiProblem p = with_rate(1.3, 0.3, 2.0, 0.4);
    p.G0 = 0.5;
    p.G0p = 0.2;
    p.B = 0.0;
    const auto lin = integrate_odi(p, 8.0);
    CHECK_FALSE(lin.blew_up());
    double worst = 0.0;
    for (std::size_t i = 0; i < lin.t.size(); ++i) worst = std::max(worst, std::abs(lin.G[i] - g_lin(lin.t[i], p)));
    CHECK(worst <= 1e-9);
    CHECK(lin.t.back() == 8.0);

    p.B = 0.8;
    const auto nl = integrate_odi(p, 30.0);
    const double a1 = p.alpha1(), a2 = p.alpha2();
    double prev = -1.0;
    for (std::size_t i = 0; i < nl.t.size(); ++i) {
        CHECK(nl.G[i] >= g_lin(nl.t[i], p) - 1e-12);
        const double fac = std::exp(a2 * nl.t[i]) * (nl.Gp[i] + a1 * nl.G[i]);
        CHECK(fac >= prev * (1.0 - 1e-9));
        prev = fac;
    }
}

TEST_CASE("blow-up detection is insensitive to the sentinel") {
    OdiProblem p = with_rate(0.5, 0.0, 2.0, 0.5);
    p.G0 = 1.0;
    p.G0p = 1.0;
    p.B = 1.0;
    std::vector<double> times;
    for (double s : {1e10, 1e12, 1e14}) {
        OdiOptions o;
        o.sentinel = s;
        const auto tr = integrate_odi(p, 50.0, true, o);
        REQUIRE(tr.blew_up());
        times.push_back(tr.blowup_time);
    }
    MESSAGE("blow-up times " << times[0] << " " << times[1] << " " << times[2]);
    CHECK(std::abs(times[0] - times[2]) <= 1e-4 * times[1]);

    // Doubling the source blows up earlier.
    const auto strict = integrate_odi(p, 50.0, false);
    CHECK(strict.blowup_time < times[1]);
}

TEST_CASE("lemma verdict on random admissible problems") {
    std::mt19937_64 rng(2024);
    int restarted = 0, failed = 0;
    for (int i = 0; i < 100; ++i) {
        OdiProblem p = random_problem(rng, i % 3 == 2);
        const double theta = default_theta(p);
        p.K = 1.01 * threshold_constants(p, theta, default_kappa(p)).K0;
        const auto v = verify_lemma(p);
        CHECK(v.K_above_threshold);
        CHECK(v.T1 >= p.T0);
        CHECK(v.K0_threshold > 0.0);
        CHECK(v.lower_bound_held);
        if (!v.bound_satisfied) {
            ++failed;
            MESSAGE("problem " << i << " b=" << p.b << " m2=" << p.m2 << " q=" << p.q << " k1=" << p.k1
                               << " T0=" << p.T0 << " blow-up " << v.blowup_time << " 2T1 " << 2 * v.T1);
        }
        restarted += v.restarted;
    }
    MESSAGE(restarted << " of 100 restarted at T0");
    CHECK(failed == 0);
}

TEST_CASE("lemma verdict on the equal-roots degenerate family") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double b = 0.2 + 2.0 * u(rng);
        OdiProblem p = with_rate(b, b * b / 4.0, 1.5 + 2.0 * u(rng), 0.0);
        p.T0 = 0.5 + 2.5 * u(rng);
        p.B = 0.2 + 3.0 * u(rng);
        p.G0 = u(rng);
        p.G0p = 0.1 + u(rng);
        p.K = 1.01 * threshold_constants(p, default_theta(p), 0.5 * p.T0).K0;
        const auto v = verify_lemma(p);
        CHECK(v.kappa_used == doctest::Approx(0.5 * p.T0));
        CHECK(v.bound_satisfied);
    }
}

TEST_CASE("below threshold the verdict is only recorded") {
    std::mt19937_64 rng(5);
    OdiProblem p = random_problem(rng, false);
    p.K = 0.01 * threshold_constants(p, default_theta(p), default_kappa(p)).K0;
    const auto v = verify_lemma(p);
    CHECK_FALSE(v.K_above_threshold);
    CHECK(v.T1 > 0.0);
}
