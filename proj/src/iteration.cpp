#include "adswave/iteration.hpp"

#include "adswave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adswave::iteration {

namespace {

double kappa_plus(const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    return 0.5 * p.n + cfg.model.derived.nu - 1.0 / p.p;
}

double kappa_minus(const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    return 0.5 * p.n - cfg.model.derived.nu - 1.0 / p.p;
}

}  // namespace

IterationConfig::IterationConfig(const Model& m, double d) : model(m), delta(d), a0(min_a0(d)) {}

double IterationConfig::min_a0(double delta) { return std::max({2.0, 1.0 / (2.0 * delta - 1.0), 1.0 / delta}); }

std::vector<std::string> IterationConfig::violations() const {
    std::vector<std::string> out;
    if (!(delta > 0.5 && delta < 1.0)) out.push_back("δ must lie in (1/2, 1)");
    else if (!(a0 >= min_a0(delta))) out.push_back("a0 must be ≥ max{2, 1/(2δ−1), 1/δ}");
    if (!(b0 > 0.0)) out.push_back("b0 must be > 0");
    if (!(B0 > 0.0)) out.push_back("B0 must be > 0");
    if (!(D > 0.0)) out.push_back("D must be > 0");
    if (!(Btilde > 0.0)) out.push_back("Btilde must be > 0");
    if (!(kappa_minus(*this) > 0.0)) out.push_back("n/2 − ν − 1/p > 0 violated");
    return out;
}

void IterationConfig::validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
}

AB<double> seq_ab(int j, const IterationConfig& cfg) {
    if (j < 0) throw std::invalid_argument("seq_ab: j must be ≥ 0");
    return seq_ab_closed<double>(j, cfg.a0, cfg.b0, cfg.delta);
}

double log_E(const IterationConfig& cfg) {
    const double q = cfg.model.derived.q;
    return std::log(cfg.B0) - q / ((q - 1) * (q - 1)) * std::log(q) + std::log(cfg.D) / (q - 1);
}

double log_B(int j, const IterationConfig& cfg) {
    const double q = cfg.model.derived.q, lq = std::log(q);
    return std::pow(q, j) * log_E(cfg) + (j + 1) * lq / (q - 1) + lq / ((q - 1) * (q - 1)) -
           std::log(cfg.D) / (q - 1);
}

double log_B_recursive(int j, const IterationConfig& cfg) {
    const double q = cfg.model.derived.q, lq = std::log(q), lD = std::log(cfg.D);
    long double x = std::log(cfg.B0);
    for (int i = 0; i < j; ++i) x = q * x - (i + 1) * lq + lD;
    return static_cast<double>(x);
}

double lower_bound_step_minus1(double t, double epsilon, const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    const double rate = -(p.b + p.H) * p.p / 2.0 + (p.n - 1) * p.H * (1.0 - p.p / 2.0);
    return cfg.Btilde * std::pow(epsilon, p.p) * std::exp(rate * t);
}

double onset_sigma(int j, const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    const auto [a, b] = seq_ab(j, cfg);
    const double cH = p.c / p.H;
    const double s1 = amplitude_inv(8.0 * a * p.R + 4.0 * (2.0 * b + 1.0) * cH, p);
    const double inner = (a - 1.0) / (1.0 - cfg.delta) * p.R + (b + 2.0) / (1.0 - cfg.delta) * cH;
    const double s2 = amplitude_inv(16.0 * inner * inner, p);
    const double s3 = 2.0 / p.H * std::log(p.H / p.c + 1.0);
    return std::max({s1, s2, s3, 1.0});
}

Constants constants(const IterationConfig& cfg) {
    cfg.validate();
    const auto& p = cfg.model.params;
    const double q = cfg.model.derived.q, beta1 = p.beta + 1.0;
    Constants k;
    k.Q = std::pow(2.0, p.varsigma * q / (q - 1)) * std::pow(p.H / 4.0, beta1 / (q - 1));
    k.log_E = log_E(cfg);
    const double w = beta1 + p.varsigma * q;
    if (w > 0.0) k.E1 = std::pow(std::exp(1.0 - k.log_E / p.p) / k.Q, (q - 1) / w);
    const double nd = (p.n - 1) * beta1;
    k.N_tilde = std::pow(2.0, -nd * std::abs(1.0 - p.p / 2.0)) * p.mu * std::pow(p.c / p.H, nd * (1.0 - p.p / 2.0));
    k.N_hat = k.N_tilde / (kappa_plus(cfg) * kappa_minus(cfg) * p.H * p.H);
    k.N = std::pow(2.0, -p.varsigma / (q - 1)) * k.N_hat * std::pow(p.H / 4.0, -beta1 / (q - 1));
    k.R1 = cfg.model.derived.nu <= 0.5 ? 0.0 : p.c / p.H - p.R;
    return k;
}

LT0 L_and_T0(double t, double epsilon, const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    if (!(p.varsigma > -1.0 / p.p)) throw ValidationError({"ς ⩽ −1/p: T0(ε) undefined"});
    if (!(t > 0.0 && epsilon > 0.0)) throw std::invalid_argument("L_and_T0: t and ε must be > 0");
    const Constants k = constants(cfg);
    const double q = cfg.model.derived.q;
    const double w = p.beta + 1.0 + p.varsigma * q;
    LT0 out;
    out.L = q * std::log(epsilon) + std::log(k.Q) + k.log_E / p.p + w / (q - 1) * std::log(t);
    out.T0 = k.E1 * std::pow(epsilon, -p.p * (q - 1) / (1.0 + p.varsigma * p.p));
    return out;
}

double gamma_j(int j, const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    const auto [a, b] = seq_ab(j, cfg);
    const double cH = p.c / p.H;
    return 1.0 - std::pow(0.5 + 0.5 * cH / (4.0 * a * p.R + (4.0 * b + 3.0) * cH), kappa_plus(cfg));
}

double gamma_tilde_j(int j, const IterationConfig& cfg) {
    const auto& p = cfg.model.params;
    const auto [a, b] = seq_ab(j, cfg);
    const double cH = p.c / p.H;
    return 1.0 - std::pow(0.5 + 0.5 * cH / (8.0 * a * p.R + (8.0 * b + 5.0) * cH), kappa_minus(cfg));
}

double gamma_limit(const IterationConfig& cfg) { return 1.0 - std::pow(2.0, -kappa_plus(cfg)); }

double log_K_j(int j, double t, double epsilon, const IterationConfig& cfg) {
    if (t < onset_sigma(j, cfg)) throw std::invalid_argument("log_K_j: t must be ≥ σ_j");
    const auto& p = cfg.model.params;
    const Constants k = constants(cfg);
    const long double q = cfg.model.derived.q;
    const long double qj1 = std::pow(q, static_cast<long double>(j + 1));
    const long double lt = std::log(static_cast<long double>(t));
    long double s = std::log(static_cast<long double>(k.N));
    s += qj1 * std::log(static_cast<long double>(k.Q));
    s += std::log(static_cast<long double>(gamma_j(j, cfg))) + std::log(static_cast<long double>(gamma_tilde_j(j, cfg)));
    s += (p.beta + 1.0L) * log_B(j, cfg);
    s += qj1 * q * std::log(static_cast<long double>(epsilon));
    s -= (p.varsigma + p.beta + 1.0L) / (q - 1) * lt;
    s += qj1 / (q - 1) * (p.beta + 1.0L + p.varsigma * q) * lt;
    return static_cast<double>(s);
}

}  // namespace adswave::iteration
