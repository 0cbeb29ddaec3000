#pragma once

#include "adswave/params.hpp"
#include "adswave/quadrature.hpp"

#include <functional>
#include <vector>

namespace adswave::radon {

/// Radial function v(|x|) on R^n, zero for r > support_radius.
struct RadialProfile {
    std::function<double(double)> f;
    double support_radius = 1.0;
    int n = 3;

    double operator()(double r) const {
        r = std::abs(r);
        return r > support_radius ? 0.0 : f(r);
    }

    /// Piecewise-linear interpolant of grid samples (rs ascending from 0).
    static RadialProfile from_samples(std::vector<double> rs, std::vector<double> values, int n,
                                      double support_radius);
};

inline quad::Options tight() { return {1e-13, 1e-17, 40, 40000}; }

/// omega_{n-1} int_{|rho|}^inf v(r) (r^2 - rho^2)^{(n-3)/2} r dr, evaluated
/// after u = sqrt(r^2 - rho^2), which turns the integrand into
/// v(sqrt(u^2 + rho^2)) u^{n-2}.
double radon_radial(const RadialProfile& v, double rho, const quad::Options& opt = tight());

struct MassCheck {
    double via_transform;  ///< int_R R[v](rho) d rho
    double direct;         ///< omega_n int v r^{n-1} dr
};

MassCheck radon_mass(const RadialProfile& v, const quad::Options& opt = {1e-11, 1e-16, 40, 20000});

/// |L - tau|^{-(n-1)/2} int_tau^L h(r) |r - tau|^{(n-3)/2} dr with L = A(t) + R.
/// Needs n >= 2 and tau <= L; n = 2 uses r = tau + u^2.
double operator_T(const std::function<double(double)>& h, double t, double tau, const Model& model,
                  const quad::Options& opt = {1e-10, 1e-16, 40, 20000});

/// max over rho of |R[Delta_h v](rho) - D_rho^2 R[v](rho)|. Delta_h is the
/// centred-difference radial Laplacian v'' + (n-1) v'/r on the grid r_i = i dr,
/// transformed through its piecewise-linear interpolant; D_rho^2 is the
/// centred second difference with the same step.
double radon_laplacian_identity_check(const RadialProfile& v, double dr, const std::vector<double>& rhos);

}  // namespace adswave::radon
