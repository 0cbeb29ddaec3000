#include "adswave/errors.hpp"
#include "adswave/iteration.hpp"

#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>

using namespace adswave;
using namespace adswave::iteration;
using boost::multiprecision::cpp_rational;

namespace {

Model model3(double b = 0.0, double m2 = 0.0, double beta = 0.0, double varsigma = 0.0) {
    ModelParams p;
    p.n = 3;
    p.p = 2.0;
    p.b = b;
    p.m2 = m2;
    p.beta = beta;
    p.varsigma = varsigma;
    return Model(p);
}

}  // namespace

TEST_CASE("a_j and b_j: closed form equals recursion in exact arithmetic") {
    for (const auto& delta : {cpp_rational(3, 4), cpp_rational(51, 100), cpp_rational(2, 3), cpp_rational(9, 10)}) {
        const cpp_rational a0 = std::max({cpp_rational(2), cpp_rational(1 / (2 * delta - 1)), cpp_rational(1 / delta)});
        const cpp_rational b0(1, 3);
        for (int j = 0; j <= 20; ++j) {
            const auto c = seq_ab_closed<cpp_rational>(j, a0, b0, delta);
            const auto r = seq_ab_recursive<cpp_rational>(j, a0, b0, delta);
            CHECK(c.a == r.a);
            CHECK(c.b == r.b);
            const auto n = seq_ab_closed<cpp_rational>(j + 1, a0, b0, delta);
            CHECK(n.a >= 8 * c.a + 1);
            CHECK(n.b >= 4 * (2 * c.b + 1));
        }
    }
    const auto one = seq_ab_closed<cpp_rational>(1, cpp_rational(2), cpp_rational(1), cpp_rational(1, 2));
    CHECK(one.a == 9);
    CHECK(one.b == 22);

    IterationConfig cfg(model3());
    CHECK(cfg.a0 == 2.0);
    CHECK(seq_ab(0, cfg).a == 2.0);
    CHECK(seq_ab(0, cfg).b == 1.0);
}

TEST_CASE("config validation") {
    IterationConfig cfg(model3(), 0.6);
    CHECK(cfg.a0 == doctest::Approx(5.0));
    CHECK(cfg.violations().empty());
    cfg.a0 = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.delta = 1.0;
    CHECK_FALSE(cfg.violations().empty());
    ModelParams flat;  // n = 1, p = 2: n/2 - nu - 1/p = 0
    CHECK_THROWS_AS(IterationConfig(Model(flat)).validate(), ValidationError);
}

TEST_CASE("ln B_j closed form against the recursion") {
    IterationConfig a(model3());
    a.B0 = 1.0;
    a.D = 1.0;
    CHECK(log_B(0, a) == doctest::Approx(0.0));
    CHECK(log_B(1, a) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    CHECK(log_B_recursive(1, a) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

    IterationConfig b(model3(0.0, 0.0, 0.5));  // q = 3
    b.B0 = 2.0;
    b.D = 5.0;
    CHECK(log_B(0, b) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    for (int j = 1; j <= 40; ++j) {
        const double c = log_B(j, b), r = log_B_recursive(j, b);
        CHECK(std::abs(c - r) <= 1e-10 * std::abs(r));
    }
}

TEST_CASE("lower bound at step minus one") {
    IterationConfig cfg(model3(1.0, 0.0));
    cfg.Btilde = 0.7;
    CHECK(lower_bound_step_minus1(0.0, 0.3, cfg) == doctest::Approx(0.7 * 0.09));
    CHECK(lower_bound_step_minus1(1.0, 0.3, cfg) == doctest::Approx(0.7 * 0.09 * std::exp(-2.0)).epsilon(1e-14));
    ModelParams p;
    p.n = 1;
    p.p = 3.0;
    p.b = 0.4;
    IterationConfig one(Model{p});
    CHECK(lower_bound_step_minus1(2.0, 1.0, one) == doctest::Approx(std::exp(-(1.4) * 3.0 / 2.0 * 2.0)));
}

TEST_CASE("onset times") {
    ModelParams p;
    p.n = 3;
    p.c = 1.0;
    p.H = 1.0;
    p.R = 1.0;
    IterationConfig cfg(Model{p}, 0.6);
    cfg.a0 = 2.0;
    cfg.b0 = 1.0;
    // a = 2, b = 1: A^{-1}(28) = ln 29, A^{-1}(16 (2.5 + 7.5)^2) = ln 1601, 2 ln 2, 1.
    CHECK(onset_sigma(0, cfg) == doctest::Approx(std::log(1601.0)).epsilon(1e-14));

    ModelParams fast = p;
    fast.H = 100.0;
    fast.R = 1e-6;
    IterationConfig tiny(Model{fast});
    CHECK(onset_sigma(0, tiny) == 1.0);

    IterationConfig mono(model3());
    for (int j = 0; j < 20; ++j) CHECK(onset_sigma(j + 1, mono) >= onset_sigma(j, mono));
}

TEST_CASE("L and T0") {
    for (double vs : {0.0, 0.3, -0.2}) {
        IterationConfig cfg(model3(0.5, 0.05, 0.2, vs));
        cfg.B0 = 0.8;
        cfg.D = 1.7;
        for (double eps : {1e-3, 0.05, 0.4}) {
            const double T0 = L_and_T0(1.0, eps, cfg).T0;
            CHECK(std::abs(L_and_T0(T0, eps, cfg).L - 1.0) <= 1e-10);
            const double ratio = L_and_T0(1.0, eps / 2, cfg).T0 / T0;
            const auto& p = cfg.model.params;
            const double q = cfg.model.derived.q;
            CHECK(ratio == doctest::Approx(std::pow(2.0, p.p * (q - 1) / (1 + vs * p.p))).epsilon(1e-12));
        }
    }
    IterationConfig flat(model3());
    const double e = std::log(L_and_T0(1.0, 0.01, flat).T0 / L_and_T0(1.0, 0.02, flat).T0) / std::log(0.5);
    CHECK(e == doctest::Approx(lifespan_exponent(flat.model.params)).epsilon(1e-12));
    CHECK(e == doctest::Approx(-2.0).epsilon(1e-12));

    IterationConfig crit(model3(0.0, 0.0, 0.0, 0.0));
    crit.model.params.varsigma = -0.5;
    CHECK_THROWS_AS(L_and_T0(1.0, 0.1, crit), ValidationError);
}

TEST_CASE("gamma sequences") {
    IterationConfig cfg(model3(0.6, 0.05));
    double g = 0.0, gt = 0.0;
    for (int j = 0; j <= 20; ++j) {
        const double a = gamma_j(j, cfg), b = gamma_tilde_j(j, cfg);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
        CHECK(b > 0.0);
        CHECK(b < 1.0);
        // Strict while distinguishable in double; a_j grows like 16^j.
        if (j <= 8) {
            CHECK(a > g);
            CHECK(b > gt);
        } else {
            CHECK(a >= g);
            CHECK(b >= gt);
        }
        g = a;
        gt = b;
    }
    CHECK(std::abs(gamma_j(20, cfg) - gamma_limit(cfg)) <= 0.01 * gamma_limit(cfg));
    CHECK(gamma_limit(cfg) == doctest::Approx(1.0 - std::pow(2.0, -(1.5 + cfg.model.derived.nu - 0.5))));
}

TEST_CASE("log K_j: finite, identity and divergence") {
    IterationConfig cfg(model3(0.4, 0.02, 0.3, 0.2));
    cfg.B0 = 1.3;
    cfg.D = 0.6;
    const auto& p = cfg.model.params;
    const double q = cfg.model.derived.q, b1 = p.beta + 1.0;
    const Constants k = constants(cfg);
    const double eps = 0.05;
    const double T0 = L_and_T0(1.0, eps, cfg).T0;

    for (int j = 0; j <= 30; ++j) {
        const double t = std::max(T0, onset_sigma(j, cfg));
        const double lk = log_K_j(j, t, eps, cfg);
        CHECK(std::isfinite(lk));

        // Rearranged form: q^{j+1} L plus the lower-order remainder.
        const double L = L_and_T0(t, eps, cfg).L;
        const double rem = b1 * (j + 1) * std::log(q) / (q - 1) + std::log(gamma_j(j, cfg) * gamma_tilde_j(j, cfg)) -
                           (p.varsigma + b1) / (q - 1) * std::log(t) + std::log(k.N) +
                           b1 * std::log(q) / ((q - 1) * (q - 1)) - b1 * std::log(cfg.D) / (q - 1);
        const double alt = std::pow(q, j + 1) * L + rem;
        CHECK(std::abs(lk - alt) <= 1e-9 * std::max(1.0, std::abs(lk)));

        if (j <= 15) {
            CHECK(L >= 1.0 - 1e-12);
            CHECK(lk >= std::pow(q, j + 1) + rem - 1e-9 * std::abs(lk));
            if (j >= 10) CHECK(std::abs(rem) <= 0.01 * std::pow(q, j + 1));
        }
    }
    CHECK_THROWS(log_K_j(3, 0.5 * onset_sigma(3, cfg), eps, cfg));
}

TEST_CASE("constants") {
    IterationConfig cfg(model3());
    const Constants k = constants(cfg);
    // n = 3, p = 2, beta = 0, mu = 1, c = H = 1: N_tilde = 1, N_hat = 1/(1*1).
    CHECK(k.N_tilde == doctest::Approx(1.0));
    CHECK(k.N_hat == doctest::Approx(1.0));
    CHECK(k.Q == doctest::Approx(0.25));
    CHECK(k.N == doctest::Approx(4.0));
    CHECK(k.R1 == 0.0);
}
