#include "adswave/radon.hpp"

#include "adswave/hypfun.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace adswave::radon {

RadialProfile RadialProfile::from_samples(std::vector<double> rs, std::vector<double> values, int n,
                                          double support_radius) {
    if (rs.size() != values.size() || rs.size() < 2)
        throw std::invalid_argument("RadialProfile: need matching rs/values with at least two points");
    if (!std::is_sorted(rs.begin(), rs.end())) throw std::invalid_argument("RadialProfile: rs must ascend");
    auto f = [rs = std::move(rs), vs = std::move(values)](double r) {
        if (r <= rs.front()) return vs.front();
        if (r >= rs.back()) return vs.back();
        const auto it = std::upper_bound(rs.begin(), rs.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - rs.begin());
        const double w = (r - rs[j - 1]) / (rs[j] - rs[j - 1]);
        return (1.0 - w) * vs[j - 1] + w * vs[j];
    };
    return {f, support_radius, n};
}

double radon_radial(const RadialProfile& v, double rho, const quad::Options& opt) {
    if (v.n < 2) throw std::invalid_argument("radon_radial: n must be ≥ 2");
    const double a = std::abs(rho);
    const double Rs = v.support_radius;
    if (a >= Rs) return 0.0;
    const double umax = std::sqrt((Rs - a) * (Rs + a));
    const int k = v.n - 2;
    auto g = [&](double u) { return v(std::sqrt(u * u + a * a)) * std::pow(u, k); };
    return hypfun::sphere_area(v.n - 1) * quad::integrate(g, 0.0, umax, opt).value;
}

MassCheck radon_mass(const RadialProfile& v, const quad::Options& opt) {
    MassCheck m;
    const double Rs = v.support_radius;
    auto R = [&](double rho) { return radon_radial(v, rho); };
    m.via_transform = 2.0 * quad::integrate(R, 0.0, Rs, opt).value;
    auto radial = [&](double r) { return v(r) * std::pow(r, v.n - 1); };
    m.direct = hypfun::sphere_area(v.n) * quad::integrate(radial, 0.0, Rs, opt).value;
    return m;
}

double operator_T(const std::function<double(double)>& h, double t, double tau, const Model& model,
                  const quad::Options& opt) {
    const int n = model.params.n;
    if (n < 2) throw std::invalid_argument("operator_T: n must be ≥ 2");
    const double L = amplitude(t, model.params) + model.params.R;
    if (tau > L) throw std::invalid_argument("operator_T: tau must not exceed A(t) + R");
    const double gap = L - tau;
    if (gap == 0.0) return 2.0 * h(L) / (n - 1);  // limit of the weighted mean
    if (n == 2) {
        auto g = [&](double u) { return h(tau + u * u); };
        return 2.0 * quad::integrate(g, 0.0, std::sqrt(gap), opt).value / std::sqrt(gap);
    }
    const double e = 0.5 * (n - 3);
    auto g = [&](double r) { return h(r) * std::pow(r - tau, e); };
    return quad::integrate(g, tau, L, opt).value * std::pow(gap, -0.5 * (n - 1));
}

namespace {

// Transform of a piecewise-linear profile with nodes rs, kinks passed to the quadrature.
double radon_piecewise(const RadialProfile& v, const std::vector<double>& rs, double rho,
                       const quad::Options& opt) {
    const double a = std::abs(rho);
    const double Rs = v.support_radius;
    if (a >= Rs) return 0.0;
    std::vector<double> breaks{0.0};
    for (double r : rs)
        if (r > a && r < Rs) breaks.push_back(std::sqrt((r - a) * (r + a)));
    breaks.push_back(std::sqrt((Rs - a) * (Rs + a)));
    const int k = v.n - 2;
    auto g = [&](double u) { return v(std::sqrt(u * u + a * a)) * std::pow(u, k); };
    return hypfun::sphere_area(v.n - 1) * quad::integrate(g, std::span<const double>(breaks), opt).value;
}

}  // namespace

double radon_laplacian_identity_check(const RadialProfile& v, double dr, const std::vector<double>& rhos) {
    const int n = v.n;
    const std::size_t m = static_cast<std::size_t>(std::ceil(v.support_radius / dr)) + 2;
    std::vector<double> rs(m + 2), f(m + 2), lap(m + 1);
    for (std::size_t i = 0; i < m + 2; ++i) {
        rs[i] = dr * static_cast<double>(i);
        f[i] = v(rs[i]);
    }
    lap[0] = 2.0 * n * (f[1] - f[0]) / (dr * dr);  // v'/r -> v''(0), v even
    for (std::size_t i = 1; i <= m; ++i)
        lap[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dr * dr) + (n - 1) / rs[i] * (f[i + 1] - f[i - 1]) / (2.0 * dr);
    rs.resize(m + 1);
    const RadialProfile lap_v = RadialProfile::from_samples(rs, lap, n, rs.back());

    double worst = 0.0;
    for (double rho : rhos) {
        // Differenced samples carry roundoff of order eps/dr^2.
        const double lhs = radon_piecewise(lap_v, rs, rho, {1e-9, 1e-11, 40, 200000});
        const double rhs =
            (radon_radial(v, rho + dr) - 2.0 * radon_radial(v, rho) + radon_radial(v, rho - dr)) / (dr * dr);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace adswave::radon
