#include "adswave/odi.hpp"

#include "adswave/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace adswave::odi {

namespace {

double discriminant(const OdiProblem& p) { return p.b * p.b - 4.0 * p.m2; }

double root_gap(const OdiProblem& p) { return p.equal_roots() ? 0.0 : std::sqrt(discriminant(p)); }

bool degenerate(const OdiProblem& p) { return std::abs(p.k1 + p.alpha1()) <= kDegenerateTol; }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

bool OdiProblem::equal_roots() const { return std::abs(discriminant(*this)) <= 1e-14 * std::max(1.0, b * b); }
double OdiProblem::alpha1() const { return 0.5 * (b + root_gap(*this)); }
double OdiProblem::alpha2() const { return 0.5 * (b - root_gap(*this)); }

std::vector<std::string> OdiProblem::violations() const {
    std::vector<std::string> out;
    if (!(b >= 0.0)) out.push_back("b must be ≥ 0 (got " + fmt(b) + ")");
    if (!(m2 >= 0.0)) out.push_back("m2 must be ≥ 0 (got " + fmt(m2) + ")");
    if (!(discriminant(*this) >= -1e-14 * std::max(1.0, b * b))) out.push_back("b² ⩾ 4m² violated");
    if (!(q > 1.0)) out.push_back("q must exceed 1 (got " + fmt(q) + ")");
    if (!(std::abs(k0 + (q - 1.0) * k1) <= 1e-12 * std::max(1.0, std::abs(k0))))
        out.push_back("k0 + (q−1)k1 = 0 violated (residual " + fmt(k0 + (q - 1.0) * k1) + ")");
    if (out.empty() && !(k1 + alpha1() >= -kDegenerateTol)) out.push_back("k1 + α1 ⩾ 0 violated");
    if (!(G0 >= 0.0)) out.push_back("G0 must be ≥ 0");
    if (!(G0p >= 0.0)) out.push_back("G0p must be ≥ 0");
    if (out.empty() && !(alpha1() * G0 + G0p > 0.0)) out.push_back("α1 G0 + G0p > 0 violated");
    if (!(B > 0.0)) out.push_back("B must be > 0");
    if (!(K > 0.0)) out.push_back("K must be > 0");
    if (!(T0 >= 0.0)) out.push_back("T0 must be ≥ 0");
    if (polynomial()) {
        if (!(ell0 < 0.0)) out.push_back("polynomial variant needs ell0 < 0");
        if (!(ell0 + (q - 1.0) * ell1 >= 0.0)) out.push_back("ell0 + (q−1) ell1 ⩾ 0 violated");
    }
    if (out.empty() && degenerate(*this) && T0 == 0.0)
        out.push_back("k1 + α1 = 0 needs T0 > 0 (no κ in (0, T0))");
    return out;
}

void OdiProblem::validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
    // Implied by the two rate conditions; a failure here is a logic error.
    if (k0 - alpha1() * (q - 1.0) > 1e-10 * std::max(1.0, std::abs(k0)))
        throw std::logic_error("k0 − α1(q−1) ⩽ 0 failed on a validated problem");
}

double OdiProblem::lower_bound(double t) const { return K * std::pow(1.0 + t, ell1) * std::exp(k1 * t); }

double OdiProblem::lower_bound_deriv(double t) const { return lower_bound(t) * (ell1 / (1.0 + t) + k1); }

double t_tilde0(const OdiProblem& p) {
    const double a1 = p.alpha1();
    if (p.equal_roots()) return p.G0 / (0.5 * p.b * p.G0 + p.G0p);
    const double d = a1 - p.alpha2();
    return std::log1p(d * p.G0 / (a1 * p.G0 + p.G0p)) / d;
}

Thresholds threshold_constants(const OdiProblem& p, double theta, double kappa) {
    std::vector<std::string> bad;
    if (!(theta > 0.0 && theta < 0.5 * (p.q - 1.0))) bad.push_back("θ must lie in (0, (q−1)/2)");
    const double room = p.ell0 + (p.q - 1.0) * p.ell1;
    if (p.polynomial() && !(2.0 * theta * p.ell1 <= room + 1e-12 * std::abs(room)))
        bad.push_back("θ must satisfy 2θ ell1 ⩽ ell0 + (q−1) ell1");
    const bool deg = degenerate(p);
    if (deg && !(kappa > 0.0 && kappa < p.T0)) bad.push_back("κ must lie in (0, T0)");
    if (!bad.empty()) throw ValidationError(std::move(bad));

    const double e = 1.0 / (p.q - 1.0);
    const double lead = std::pow((p.q + 1.0) / p.B, e);
    const double Tt = t_tilde0(p);
    Thresholds th;
    if (deg) {
        th.K0 = lead * std::pow(kappa * theta, -2.0 * e);
        th.T1 = std::max(p.T0, Tt);
    } else {
        const double r = p.k1 + p.alpha1();
        th.K0 = lead * std::pow(r / -std::expm1(-theta), 2.0 * e);
        th.T1 = std::max({p.T0, Tt, 1.0 / r});
    }
    return th;
}

double default_theta(const OdiProblem& p) {
    double th = 0.25 * (p.q - 1.0);
    if (p.polynomial() && p.ell1 > 0.0) th = std::min(th, (p.ell0 + (p.q - 1.0) * p.ell1) / (2.0 * p.ell1));
    return th;
}

double default_kappa(const OdiProblem& p) { return 0.5 * p.T0; }

double g_lin(double t, const OdiProblem& p) {
    if (p.equal_roots()) {
        const double h = 0.5 * p.b;
        return std::exp(-h * t) * ((1.0 + h * t) * p.G0 + t * p.G0p);
    }
    const double a1 = p.alpha1(), a2 = p.alpha2(), d = a1 - a2;
    const double e1 = std::exp(-a1 * t), e2 = std::exp(-a2 * t);
    return ((a1 * e2 - a2 * e1) * p.G0 + (e2 - e1) * p.G0p) / d;
}

Trajectory integrate_odi(const OdiProblem& p, double t_max, bool equality_mode, const OdiOptions& opt) {
    if (!(t_max > 0.0)) throw std::invalid_argument("integrate_odi: t_max must be > 0");
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;

    const double factor = equality_mode ? p.B : 2.0 * p.B;
    auto sys = [&](const State& x, State& dx, double t) {
        const double w = std::pow(1.0 + t, p.ell0) * std::exp(p.k0 * t);
        dx[0] = x[1];
        dx[1] = -p.b * x[1] - p.m2 * x[0] + factor * w * std::pow(std::abs(x[0]), p.q);
    };

    double t = opt.t_start.value_or(0.0);
    State x{opt.G_start.value_or(p.G0), opt.Gp_start.value_or(p.G0p)};
    Trajectory tr;
    auto record = [&] {
        tr.t.push_back(t);
        tr.G.push_back(x[0]);
        tr.Gp.push_back(x[1]);
    };
    record();

    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    const double dt_min = opt.underflow * t_max;
    double dt = std::max(1e-6 * std::max(1.0, t_max - t), 2.0 * dt_min);
    while (t < t_max) {
        dt = std::min(dt, t_max - t);
        const State saved = x;
        const double t_saved = t, dt_tried = dt;
        const auto res = stepper.try_step(sys, x, t, dt);
        if (res == ode::success && !(std::isfinite(x[0]) && std::isfinite(x[1]))) {
            // A nonfinite accepted step means the error estimate itself overflowed.
            x = saved;
            t = t_saved;
            dt = 0.25 * dt_tried;
            stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
        } else if (res == ode::success) {
            if (opt.keep_steps) record();
            if (std::abs(x[0]) > opt.sentinel) {
                tr.blowup_time = t;
                break;
            }
            continue;
        }
        if (dt < dt_min) {
            tr.blowup_time = t;
            break;
        }
    }
    if (!opt.keep_steps && tr.t.back() != t) record();
    return tr;
}

OdiVerdict verify_lemma(const OdiProblem& p, std::optional<double> theta, std::optional<double> kappa) {
    p.validate();
    OdiVerdict v;
    v.theta_used = theta.value_or(default_theta(p));
    v.kappa_used = kappa.value_or(default_kappa(p));
    const Thresholds th = threshold_constants(p, v.theta_used, v.kappa_used);
    v.T_tilde0 = t_tilde0(p);
    v.T1 = th.T1;
    v.K0_threshold = th.K0;
    v.K_above_threshold = p.K >= th.K0;
    v.normalized = p.normalized();

    const double horizon = 4.0 * v.T1 + 1.0;
    auto bound_held = [&](const Trajectory& tr) {
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            if (tr.t[i] < p.T0) continue;
            if (tr.G[i] < p.lower_bound(tr.t[i]) * (1.0 - 1e-9)) return false;
        }
        return true;
    };

    Trajectory tr = integrate_odi(p, horizon, true);
    if (!bound_held(tr) || (tr.blew_up() && tr.blowup_time < p.T0)) {
        OdiOptions o;
        o.t_start = p.T0;
        o.G_start = p.lower_bound(p.T0);
        o.Gp_start = p.lower_bound_deriv(p.T0);
        tr = integrate_odi(p, horizon, true, o);
        v.restarted = true;
    }
    v.lower_bound_held = bound_held(tr);
    v.blowup_time = tr.blowup_time;
    v.bound_satisfied = v.blowup_time <= 2.0 * v.T1;
    return v;
}

}  // namespace adswave::odi
