#pragma once

#include <cstddef>

namespace adswave::hypfun {

/// Arguments of F(a, a; c; zeta) with c in {1, 2} and 0 <= zeta < 1.
struct HypParams {
    double a = 0.0;
    double c = 1.0;
    double zeta = 0.0;
};

struct SeriesOptions {
    double rel_tol = 1e-12;
    std::size_t max_terms = 100000;
};

/// F(a, a; c; zeta) by its power series with compensated summation.
/// Throws NumericalError if the term cap is hit first, std::domain_error
/// for arguments outside the supported family.
double hyp2f1(const HypParams& hp, const SeriesOptions& opt = {});

/// d/dzeta F(a, a; 1; zeta) = a^2 F(a+1, a+1; 2; zeta).
double hyp2f1_deriv(const HypParams& hp, const SeriesOptions& opt = {});

/// Right side of the Euler transformation,
/// (1 - zeta)^{c - 2a} F(c-a, c-a; c; zeta), which equals F(a, a; c; zeta).
double hyp2f1_euler(const HypParams& hp, const SeriesOptions& opt = {});

/// F(1/2-nu, 1/2-nu; 1; 1) = Gamma(2 nu) / Gamma(1/2 + nu)^2 for nu > 0.
double gauss_value_at_one(double nu);

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// Surface measure of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2).
double sphere_area(int n);

}  // namespace adswave::hypfun
