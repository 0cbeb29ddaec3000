#include "adswave/hypfun.hpp"

#include "adswave/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace adswave::hypfun {

namespace {

// Neumaier variant of Kahan summation.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

void check_domain(const HypParams& hp) {
    if (hp.c != 1.0 && hp.c != 2.0) throw std::domain_error("hyp2f1: c must be 1 or 2");
    if (!(hp.zeta >= 0.0 && hp.zeta < 1.0))
        throw std::domain_error("hyp2f1: zeta must lie in [0, 1)");
}

}  // namespace

double hyp2f1(const HypParams& hp, const SeriesOptions& opt) {
    check_domain(hp);
    const double a = hp.a, c = hp.c, z = hp.zeta;
    if (z == 0.0) return 1.0;

    CompensatedSum acc;
    double term = 1.0;
    acc.add(term);
    for (std::size_t k = 0; k < opt.max_terms; ++k) {
        const double kk = static_cast<double>(k);
        const double ratio = (a + kk) * (a + kk) / ((c + kk) * (kk + 1.0)) * z;
        term *= ratio;
        if (term == 0.0) return acc.value();  // terminating polynomial
        acc.add(term);
        // All terms share the sign of a^2 z >= 0, so the tail is bounded by a
        // geometric series once the ratio has settled below 1.
        const double r = std::max(ratio, z);
        if (kk > 2.0 * std::abs(a) + c && r < 1.0) {
            const double tail = term * r / (1.0 - r);
            if (tail <= opt.rel_tol * std::abs(acc.value())) return acc.value();
        }
    }
    std::ostringstream os;
    os << "hyp2f1: term cap " << opt.max_terms << " reached at zeta=" << z << " a=" << a;
    throw NumericalError(os.str(), term / std::abs(acc.value()));
}

double hyp2f1_deriv(const HypParams& hp, const SeriesOptions& opt) {
    if (hp.c != 1.0) throw std::domain_error("hyp2f1_deriv: only c = 1 supported");
    check_domain(hp);
    const double a = hp.a;
    if (a == 0.0) return 0.0;
    return a * a * hyp2f1({a + 1.0, 2.0, hp.zeta}, opt);
}

double hyp2f1_euler(const HypParams& hp, const SeriesOptions& opt) {
    check_domain(hp);
    const double ap = hp.c - hp.a;
    return std::pow(1.0 - hp.zeta, hp.c - 2.0 * hp.a) * hyp2f1({ap, hp.c, hp.zeta}, opt);
}

double log_gamma(double x) {
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    if (!(x > 0)) throw std::domain_error("log_gamma: x must be positive");
    if (x < 0.5) {
        // Reflection keeps the approximation in its accurate half-plane.
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double xm = x - 1.0;
    double s = coef[0];
    for (int i = 1; i < 9; ++i) s += coef[i] / (xm + i);
    const double t = xm + g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) - t + std::log(s);
}

double gauss_value_at_one(double nu) {
    if (!(nu > 0)) throw std::domain_error("gauss_value_at_one: nu must be positive");
    return std::exp(log_gamma(2.0 * nu) - 2.0 * log_gamma(0.5 + nu));
}

double sphere_area(int n) {
    if (n < 1) throw std::domain_error("sphere_area: n must be ≥ 1");
    const double h = 0.5 * n;
    return 2.0 * std::exp(h * std::log(std::numbers::pi) - log_gamma(h));
}

}  // namespace adswave::hypfun
