#include "adswave/hypfun.hpp"
#include "adswave/radon.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <array>
#include <numbers>
#include <random>

using namespace adswave;
using namespace adswave::radon;

namespace {

RadialProfile unit_ball(int n) {
    return {[](double) { return 1.0; }, 1.0, n};
}

// exp(-1/(1-(r/a)^2)) scaled by amp.
RadialProfile smooth_bump(int n, double a, double amp = 1.0) {
    return {[a, amp](double r) {
                const double s = r / a;
                return s < 1.0 ? amp * std::exp(-1.0 / (1.0 - s * s)) : 0.0;
            },
            a, n};
}

Model model_n(int n, double R = 1.0) {
    ModelParams p;
    p.n = n;
    p.R = R;
    return Model(p);
}

}  // namespace

TEST_CASE("unit ball transforms") {
    for (double rho : {0.0, 0.1, 0.35, 0.5, 0.77, 0.9, 0.99}) {
        CHECK(std::abs(radon_radial(unit_ball(3), rho) - std::numbers::pi * (1 - rho * rho)) <= 1e-8);
        CHECK(std::abs(radon_radial(unit_ball(2), rho) - 2.0 * std::sqrt(1 - rho * rho)) <= 1e-8);
    }
    CHECK(radon_radial(unit_ball(3), 1.2) == 0.0);
    CHECK(radon_radial(unit_ball(2), -1.0001) == 0.0);
}

TEST_CASE("mass identity") {
    const auto ball = radon_mass(unit_ball(3));
    CHECK(std::abs(ball.via_transform - 4.0 * std::numbers::pi / 3.0) <= 1e-8);
    CHECK(std::abs(ball.direct - 4.0 * std::numbers::pi / 3.0) <= 1e-12);

    const auto zero = radon_mass({[](double) { return 0.0; }, 1.0, 3});
    CHECK(zero.via_transform == 0.0);
    CHECK(zero.direct == 0.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> rad(0.5, 2.0), amp(0.2, 3.0);
    for (int n : {2, 3, 4}) {
        for (int k = 0; k < 4; ++k) {
            const auto m = radon_mass(smooth_bump(n, rad(rng), amp(rng)));
            CHECK(std::abs(m.via_transform - m.direct) <= 1e-6 * m.direct);
        }
    }
}

TEST_CASE("evenness and positivity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.6, 1.6);
    for (int n : {2, 3, 5}) {
        const auto v = smooth_bump(n, 1.5);
        for (int k = 0; k < 50; ++k) {
            const double rho = u(rng);
            const double a = radon_radial(v, rho);
            CHECK(a == radon_radial(v, -rho));
            CHECK(a >= 0.0);
        }
    }
}

TEST_CASE("sampled profile interpolates") {
    std::vector<double> rs, vs;
    for (int i = 0; i <= 2000; ++i) {
        rs.push_back(i * 5e-4);
        vs.push_back(1.0);
    }
    const auto v = RadialProfile::from_samples(rs, vs, 3, 1.0);
    CHECK(std::abs(radon_radial(v, 0.4) - std::numbers::pi * 0.84) <= 1e-8);
    CHECK_THROWS(RadialProfile::from_samples({0.0, 1.0}, {1.0}, 3, 1.0));
}

TEST_CASE("operator T") {
    const auto m3 = model_n(3);
    const double L = amplitude(1.0, m3.params) + 1.0;
    for (double tau : {-3.0, 0.0, 1.0, L - 0.01, L}) {
        CHECK(operator_T([](double) { return 0.0; }, 1.0, tau, m3) == 0.0);
        CHECK(operator_T([](double) { return 1.0; }, 1.0, tau, m3) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS(operator_T([](double) { return 1.0; }, 1.0, L + 0.1, m3));

    // n = 2 with h = 1: 2 sqrt(gap)/sqrt(gap), n = 5: int (r-tau) dr / gap^2 = 1/2.
    const auto m2 = model_n(2), m5 = model_n(5);
    CHECK(operator_T([](double) { return 1.0; }, 1.0, 0.3, m2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(operator_T([](double) { return 1.0; }, 1.0, 0.3, m5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("operator T: observed Lp bound is stable in t") {
    // Random h on [-L, L], normalised in Lp; the discrete norm of T h over
    // tau in [-40 L, L] is compared across t.
    const double p = 2.0;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> coef(0.0, 1.0);
    for (int n : {2, 3, 4}) {
        const auto m = model_n(n);
        std::vector<double> ratios_by_t;
        const auto seed = rng();
        for (double t : {1.0, 2.0, 4.0}) {
            const double L = amplitude(t, m.params) + m.params.R;
            double worst = 0.0;
            std::mt19937_64 local(seed);
            for (int trial = 0; trial < 20; ++trial) {
                std::array<double, 5> a{};
                for (double& c : a) c = coef(local);
                auto raw = [a, L](double r) {
                    if (std::abs(r) > L) return 0.0;
                    double s = 0.0;
                    for (int k = 0; k < 5; ++k) s += a[k] * std::sin((k + 1) * std::numbers::pi * (r + L) / (2 * L));
                    return s;
                };
                auto lp = [&](auto&& fn, double lo, double hi, int cells) {
                    double acc = 0.0;
                    const double w = (hi - lo) / cells;
                    for (int i = 0; i < cells; ++i) acc += std::pow(std::abs(fn(lo + (i + 0.5) * w)), p) * w;
                    return std::pow(acc, 1.0 / p);
                };
                const double hn = lp(raw, -L, L, 4000);
                auto h = [&](double r) { return raw(r) / hn; };
                auto Th = [&](double tau) { return operator_T(h, t, tau, m, {1e-8, 1e-14, 40, 20000}); };
                const double tn = lp(Th, -40 * L, L, 1500);
                worst = std::max(worst, tn);
            }
            ratios_by_t.push_back(worst);
        }
        MESSAGE("n=" << n << " observed bounds " << ratios_by_t[0] << " " << ratios_by_t[1] << " "
                     << ratios_by_t[2]);
        const double lo = *std::min_element(ratios_by_t.begin(), ratios_by_t.end());
        const double hi = *std::max_element(ratios_by_t.begin(), ratios_by_t.end());
        CHECK(std::isfinite(hi));
        CHECK(hi / lo <= 1.05);
    }
}

TEST_CASE("Laplacian identity") {
    const auto v = smooth_bump(3, 1.0);
    std::vector<double> rhos;
    for (int i = -9; i <= 9; ++i) rhos.push_back(0.1 * i + 0.013);
    const double r1 = radon_laplacian_identity_check(v, 2e-3, rhos);
    const double r2 = radon_laplacian_identity_check(v, 1e-3, rhos);
    MESSAGE("residuals " << r1 << " " << r2);
    CHECK(r2 <= 1e-4);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.3));
    CHECK(radon_laplacian_identity_check({[](double) { return 0.0; }, 1.0, 3}, 1e-3, rhos) == 0.0);
}

TEST_CASE("spherical means of radial functions satisfy Jensen with equality") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int n : {2, 3, 4}) {
        const auto v = smooth_bump(n, 1.0, 2.0);
        for (double r : {0.2, 0.6}) {
            double mean_pow = 0.0, mean = 0.0;
            const int N = 200;
            for (int k = 0; k < N; ++k) {
                double norm2 = 0.0;
                std::vector<double> x(n);
                for (double& xi : x) {
                    xi = g(rng);
                    norm2 += xi * xi;
                }
                double rad = 0.0;
                for (double& xi : x) {
                    xi *= r / std::sqrt(norm2);
                    rad += xi * xi;
                }
                const double val = v(std::sqrt(rad));
                mean_pow += std::pow(std::abs(val), 3.0) / N;
                mean += val / N;
            }
            CHECK(mean_pow == doctest::Approx(std::pow(std::abs(mean), 3.0)).epsilon(1e-12));
        }
    }
}
