#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace adswave::odi {

/// G'' + b G' + m2 G >= B (1+t)^ell0 e^{k0 t} |G|^q with G >= K (1+t)^ell1 e^{k1 t} past T0.
/// ell0 = ell1 = 0 is the purely exponential variant.
struct OdiProblem {
    double b = 0.0, m2 = 0.0;
    double q = 2.0;
    double k0 = 0.0, k1 = 0.0;
    double ell0 = 0.0, ell1 = 0.0;
    double B = 1.0;
    double K = 1.0;
    double T0 = 0.0;
    double G0 = 0.0, G0p = 1.0;

    double alpha1() const;
    double alpha2() const;
    bool polynomial() const { return ell0 != 0.0 || ell1 != 0.0; }
    bool equal_roots() const;
    /// k1 >= -alpha2; problems outside this are accepted but flagged.
    bool normalized() const { return k1 >= -alpha2(); }

    std::vector<std::string> violations() const;
    /// Throws ValidationError listing violations().
    void validate() const;

    /// K (1+t)^ell1 e^{k1 t} and its derivative.
    double lower_bound(double t) const;
    double lower_bound_deriv(double t) const;
};

/// Degenerate k1 + alpha1 = 0 within this tolerance.
inline constexpr double kDegenerateTol = 1e-12;

double t_tilde0(const OdiProblem& p);

struct Thresholds {
    double T1 = 0.0;
    double K0 = 0.0;
};

/// Throws ValidationError for theta or kappa out of range.
Thresholds threshold_constants(const OdiProblem& p, double theta, double kappa);

double default_theta(const OdiProblem& p);
double default_kappa(const OdiProblem& p);

/// Solution of the homogeneous equation with the problem's data at t = 0.
double g_lin(double t, const OdiProblem& p);

struct OdiOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double sentinel = 1e12;
    double underflow = 1e-14;  ///< relative to t_max
    /// Start time and data override (G0, G0p at t = 0 otherwise).
    std::optional<double> t_start, G_start, Gp_start;
    /// Keep every accepted step (otherwise only the endpoints).
    bool keep_steps = true;
};

struct Trajectory {
    std::vector<double> t, G, Gp;
    double blowup_time = std::numeric_limits<double>::infinity();
    bool blew_up() const { return blowup_time < std::numeric_limits<double>::infinity(); }
};

/// Embedded 5(4) Runge-Kutta integration of the equality case up to t_max;
/// with equality_mode = false the source is doubled (a strict supersolution).
/// Blow-up is the time |G| passes the sentinel or the step underflows.
Trajectory integrate_odi(const OdiProblem& p, double t_max, bool equality_mode = true, const OdiOptions& opt = {});

struct OdiVerdict {
    double T_tilde0 = 0.0, T1 = 0.0, K0_threshold = 0.0;
    double theta_used = 0.0, kappa_used = 0.0;
    double blowup_time = std::numeric_limits<double>::infinity();
    bool bound_satisfied = false;  ///< blowup_time <= 2 T1
    bool K_above_threshold = false;
    /// Data at T0 set to the lower bound because the trajectory from 0 missed it.
    bool restarted = false;
    /// G stayed above the lower bound on [T0, blowup_time].
    bool lower_bound_held = false;
    bool normalized = true;
};

/// Throws ValidationError on invalid problems, including T0 = 0 with
/// k1 + alpha1 = 0.
OdiVerdict verify_lemma(const OdiProblem& p, std::optional<double> theta = {}, std::optional<double> kappa = {});

}  // namespace adswave::odi
