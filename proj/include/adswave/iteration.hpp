#pragma once

#include "adswave/params.hpp"

#include <string>
#include <vector>

namespace adswave::iteration {

/// Free constants of the iteration. B0, D and Btilde are structural
/// (positive, otherwise arbitrary); a0 defaults to the smallest value
/// allowed by delta.
struct IterationConfig {
    Model model;
    double delta = 0.75;
    double a0 = 2.0;
    double b0 = 1.0;
    double B0 = 1.0;
    double D = 1.0;
    double Btilde = 1.0;

    explicit IterationConfig(const Model& m, double delta = 0.75);

    static double min_a0(double delta);
    std::vector<std::string> violations() const;
    /// Throws ValidationError; also requires n/2 - nu - 1/p > 0.
    void validate() const;
};

template <class T>
struct AB {
    T a, b;
};

/// a_j = (a0-1) r^j + 1, b_j = (b0+2) r^j - 2 with r = 4/(1-delta).
template <class T>
AB<T> seq_ab_closed(int j, const T& a0, const T& b0, const T& delta) {
    const T r = T(4) / (T(1) - delta);
    T rj = T(1);
    for (int i = 0; i < j; ++i) rj *= r;
    return {(a0 - T(1)) * rj + T(1), (b0 + T(2)) * rj - T(2)};
}

/// Same sequences by a_{j+1} = r a_j - (3+delta)/(1-delta), b_{j+1} = r b_j + 2(3+delta)/(1-delta).
template <class T>
AB<T> seq_ab_recursive(int j, const T& a0, const T& b0, const T& delta) {
    const T r = T(4) / (T(1) - delta);
    const T s = (T(3) + delta) / (T(1) - delta);
    AB<T> x{a0, b0};
    for (int i = 0; i < j; ++i) x = {r * x.a - s, r * x.b + T(2) * s};
    return x;
}

AB<double> seq_ab(int j, const IterationConfig& cfg);

/// E = B0 q^{-q/(q-1)^2} D^{1/(q-1)}.
double log_E(const IterationConfig& cfg);
/// Closed form of ln B_j.
double log_B(int j, const IterationConfig& cfg);
/// ln B_j by ln B_{j+1} = q ln B_j - (j+1) ln q + ln D from ln B_0.
double log_B_recursive(int j, const IterationConfig& cfg);

/// Btilde eps^p e^{[-(b+H)p/2 + (n-1)H(1-p/2)] t}.
double lower_bound_step_minus1(double t, double epsilon, const IterationConfig& cfg);

double onset_sigma(int j, const IterationConfig& cfg);

struct Constants {
    double Q = 0.0, log_E = 0.0, E1 = 0.0;
    double N_tilde = 0.0, N_hat = 0.0, N = 0.0;
    /// Kernel-bound shift; recorded only.
    double R1 = 0.0;
};

Constants constants(const IterationConfig& cfg);

struct LT0 {
    double L = 0.0;
    double T0 = 0.0;
};

/// L(t, eps) = ln(eps^q Q E^{1/p} t^{(beta+1+varsigma q)/(q-1)}) and the
/// time T0(eps) = E1 eps^{-p(q-1)/(1+varsigma p)} where L = 1.
/// Throws ValidationError for varsigma <= -1/p.
LT0 L_and_T0(double t, double epsilon, const IterationConfig& cfg);

double gamma_j(int j, const IterationConfig& cfg);
double gamma_tilde_j(int j, const IterationConfig& cfg);
/// 1 - 2^{-(n/2 + nu - 1/p)}.
double gamma_limit(const IterationConfig& cfg);

/// ln K_j(t, eps); requires t >= sigma_j.
double log_K_j(int j, double t, double epsilon, const IterationConfig& cfg);

}  // namespace adswave::iteration
