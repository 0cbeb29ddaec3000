#pragma once

#include "adswave/linear1d.hpp"
#include "adswave/params.hpp"
#include "adswave/radon.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace adswave::semilinear {

enum class RhoMode { Critical, Explicit };

/// f(t, v) = Gamma(t) (int |v|^p)^beta |v|^p with Gamma(t) = mu e^{varrho t} (1+t)^varsigma.
/// In critical mode varrho is the critical rate of the stored parameters.
class NonlinearTerm {
public:
    explicit NonlinearTerm(const ModelParams& p, RhoMode mode = RhoMode::Critical);

    const ModelParams& params() const { return model_.params; }
    const DerivedParams& derived() const { return model_.derived; }
    const Model& model() const { return model_; }
    RhoMode mode() const { return mode_; }

    double varrho() const;
    double gamma(double t) const;
    /// Pointwise value given the current Lp^p mass.
    double operator()(double t, double v, double lp_p) const;
    /// Linearised growth rate q Gamma (lp_p)^beta sup^{p-1}.
    double growth_rate(double t, double sup, double lp_p) const;

private:
    Model model_;
    RhoMode mode_;
};

enum class Detection { None, Cap, PicardDivergence, StepCollapse };
enum class SolverKind { Duhamel1D, FdRadial };

const char* to_string(Detection d);
const char* to_string(SolverKind s);

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct LifespanRecord {
    double epsilon = 0.0;
    /// Earliest detection event; kNever when the horizon was reached.
    double t_blowup = kNever;
    Detection detection = Detection::None;
    double cap_used = 0.0;
    SolverKind solver = SolverKind::FdRadial;
    /// Times at which sup|v| and V crossed their caps, kept separately.
    double t_cap_sup = kNever, t_cap_V = kNever;
    double cap_V_used = 0.0;
    double max_sup = 0.0, max_V = 0.0;
    std::size_t steps = 0, substeps = 0, picard_iterations = 0, halvings = 0;
    double t_horizon = 0.0;
    bool hypothesis_holds = false;

    bool blew_up() const { return t_blowup < kNever; }
};

/// Scalar series at every accepted step plus profile snapshots.
struct History {
    std::vector<double> t, V, Lp_p, sup;
    std::vector<double> snap_t;
    std::vector<std::vector<double>> snap_v;
    /// Snapshot grid: x0 + i dx (radial grids start at r = 0).
    double x0 = 0.0, dx = 0.0;
    bool radial = false;
    int n = 1;
};

struct RunResult {
    History history;
    LifespanRecord record;
};

struct BlowupOptions {
    /// Cap = cap_factor * initial peak amplitude (and likewise for V).
    double cap_factor = 1e6;
    /// Step prediction: local step <= safety / sqrt(growth rate).
    double safety = 0.1;
    /// Deepest dyadic refinement of the base step before step-collapse.
    int max_refine = 40;
    std::size_t snapshots = 20;
};

struct FdRadialOptions {
    BlowupOptions blowup;
    std::size_t pad_cells = 4;
};

/// Light-cone time leapfrog for the radial problem in R^n with data
/// eps (v0, v1). n = 1 uses even reflection and n = 3 the substitution
/// u = r v, both at Courant number 1; n = 2, 4 use the radial stencil at
/// Courant 1 with the origin value extrapolated; n >= 5 use the radial
/// stencil for r > K h, K = ceil((n-1)/2) + 1, and geometric cells below,
/// averaged in time there so Courant 1 stays stable. In every case the
/// numerical support grows by one cell per step, exactly with the cone.
RunResult fd_radial_solve(const radon::RadialProfile& v0, const radon::RadialProfile& v1, const NonlinearTerm& nl,
                          double epsilon, double t_horizon, double dx, const FdRadialOptions& opt = {});

struct DuhamelOptions {
    BlowupOptions blowup;
    std::size_t slab_levels = 4;
    int max_picard = 50;
    int max_halvings = 6;
    linear1d::ExactOptions exact{{1e-9, 1e-14, 40, 20000}, {1e-8, 1e-13, 40, 20000}};
};

/// Kernel representation with the nonlinearity as source, advanced in slabs
/// of slab_levels time levels; each slab is Picard-iterated to tol. Levels
/// are uniform in light-cone time with spacing c dt (refined dyadically
/// ahead of blow-up); the x-grid spacing is c dt. n = 1 only.
RunResult duhamel_solve_1d(const linear1d::CauchyData1D& data, const NonlinearTerm& nl, double epsilon,
                           double t_horizon, double dt, double tol, const DuhamelOptions& opt = {});

struct Functionals {
    std::vector<double> t, V, Lp_p;
    /// V'' + b V' + m2 V - Gamma (Lp^p)^{beta+1} by three-point differences on
    /// the (possibly nonuniform) record times; NaN at the two ends.
    std::vector<double> residual;
    /// |V''| + b |V'| + m2 |V| + |rhs| at the same points.
    std::vector<double> scale;
};

Functionals track_functionals(const History& h, const NonlinearTerm& nl);

/// max |residual| / max scale over interior points with |V| <= V_limit.
double max_relative_residual(const Functionals& f, double V_limit);

}  // namespace adswave::semilinear
