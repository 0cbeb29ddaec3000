#include "adswave/params.hpp"

#include "adswave/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace adswave {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::ostringstream os;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) os << "; ";
        os << items[i];
    }
    return os.str();
}

double discriminant_root(const ModelParams& p) {
    // Clip tiny negative round-off on the b^2 = 4 m2 parabola.
    return std::sqrt(std::max(0.0, p.b * p.b - 4.0 * p.m2));
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::invalid_argument("invalid parameters: " + join(violations)),
      violations_(std::move(violations)) {}

std::vector<std::string> ModelParams::violations() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    need(std::isfinite(c) && c > 0, "c > 0 violated");
    need(std::isfinite(H) && H > 0, "H > 0 violated");
    need(std::isfinite(b) && b >= 0, "b ≥ 0 violated");
    need(std::isfinite(m2) && m2 >= 0, "m2 ≥ 0 violated");
    // Relative slack so parameters placed on the parabola survive rounding.
    need(b * b - 4.0 * m2 >= -1e-14 * std::max(1.0, b * b), "b² ⩾ 4m² violated");
    need(std::isfinite(p) && p > 1, "p > 1 violated");
    need(std::isfinite(beta) && beta >= 0, "beta ≥ 0 violated");
    need(std::isfinite(mu) && mu > 0, "mu > 0 violated");
    need(std::isfinite(varsigma), "varsigma finite violated");
    need(std::isfinite(varrho), "varrho finite violated");
    need(n >= 1, "n ≥ 1 violated");
    need(std::isfinite(R) && R > 0, "R > 0 violated");
    return out;
}

const char* to_string(RhoBranch b) {
    return b == RhoBranch::LowDimension ? "n<=N" : "n>N";
}

double rho_crit_low(const ModelParams& p) {
    const double q = (p.beta + 1.0) * p.p;
    const double s = discriminant_root(p);
    return 0.5 * (p.b - s) * (q - 1.0) + p.n * p.H * (p.beta + 1.0) * (p.p - 1.0);
}

double rho_crit_high(const ModelParams& p) {
    const double q = (p.beta + 1.0) * p.p;
    const double n = p.n;
    return 0.5 * (p.b + n * p.H) * (q - 1.0) + n * p.H - (n - 1.0) * p.H * (p.beta + 1.0) -
           p.H / p.p;
}

DerivedParams derive(const ModelParams& params) {
    auto bad = params.violations();
    if (!bad.empty()) throw ValidationError(std::move(bad));

    DerivedParams d;
    const double s = discriminant_root(params);
    d.alpha1 = 0.5 * params.b + 0.5 * s;
    d.alpha2 = 0.5 * params.b - 0.5 * s;
    if (d.alpha2 < 0) d.alpha2 = 0;
    d.nu = s / (2.0 * params.H);
    d.q = (params.beta + 1.0) * params.p;
    d.N_threshold = 2.0 / params.p + s / params.H;
    d.sigma_crit = -1.0 / params.p;
    if (params.n <= d.N_threshold) {
        d.branch = RhoBranch::LowDimension;
        d.rho_crit = rho_crit_low(params);
    } else {
        d.branch = RhoBranch::HighDimension;
        d.rho_crit = rho_crit_high(params);
    }
    d.hypothesis_holds = 0.5 * params.n - d.nu > 1.0 / params.p;
    return d;
}

double amplitude(double t, const ModelParams& p) {
    return (p.c / p.H) * std::expm1(p.H * t);
}

double amplitude_inv(double sigma, const ModelParams& p) {
    if (!(sigma >= 0)) throw std::invalid_argument("amplitude_inv: sigma must be ≥ 0");
    return std::log1p(p.H * sigma / p.c) / p.H;
}

double gamma_factor(double t, const ModelParams& p) {
    return p.mu * std::exp(p.varrho * t) * std::pow(1.0 + t, p.varsigma);
}

double lifespan_exponent(const ModelParams& p) {
    const double q = (p.beta + 1.0) * p.p;
    const double s = p.varsigma;
    if (!(s > -1.0 / p.p)) throw ValidationError({"ς ⩽ −1/p: lifespan rate undefined"});
    if (s <= 0) return -p.p * (q - 1.0) / (1.0 + s * p.p);
    if (s < 1.0 / p.p) return -p.p * (q - 1.0);
    return -(q - 1.0) / s;
}

double lifespan_exponent_flat(const ModelParams& p) {
    const double q = (p.beta + 1.0) * p.p;
    return -p.p * (q - 1.0);
}

double lifespan_exponent_growth(const ModelParams& p) {
    if (!(p.varsigma > 0)) throw std::invalid_argument("growth-rate bound needs varsigma > 0");
    const double q = (p.beta + 1.0) * p.p;
    return -(q - 1.0) / p.varsigma;
}

}  // namespace adswave
