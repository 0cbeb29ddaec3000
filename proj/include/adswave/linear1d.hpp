#pragma once

#include "adswave/params.hpp"
#include "adswave/quadrature.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace adswave::linear1d {

/// Pointwise data on the line with compact support in [-support_radius, support_radius].
struct Profile {
    std::function<double(double)> f;
    double support_radius = 1.0;

    double operator()(double x) const { return std::abs(x) > support_radius ? 0.0 : f(x); }
};

/// amp (1 - (x/R)^2)^3 on |x| <= R, zero outside: a C^2 bump.
Profile bump_c2(double R, double amp = 1.0);
/// amp (1 - (x/R)^2)^2 on |x| <= R: C^1.
Profile bump_c1(double R, double amp = 1.0);
Profile zero_profile(double R);

/// Samples on a uniform grid centred at 0.
struct GridFunction1D {
    double x0 = 0, dx = 0;
    std::vector<double> values;
    double support_radius = 0;

    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
    static GridFunction1D sample(const Profile& p, double dx, double half_width);
};

/// Source g(t, x) with supp g(t, .) inside [-support_radius, support_radius].
struct Source {
    std::function<double(double, double)> g;
    double support_radius = 1.0;
};

struct CauchyData1D {
    Profile v0;
    Profile v1;
    std::optional<Source> source;

    /// Radius containing the data and the source support.
    double outer_radius() const;
};

/// Default data: v0 = C^2 bump, v1 = C^1 bump, both on [-R, R], no source.
CauchyData1D default_data(double R, double amp0 = 1.0, double amp1 = 1.0);

struct ExactOptions {
    quad::Options inner{1e-11, 1e-16, 40, 20000};
    quad::Options outer{1e-9, 1e-15, 40, 20000};
};

/// Value of the solution at (t, x) from the kernel representation.
/// Throws NumericalError when a quadrature misses its tolerance.
double evaluate_exact(double t, double x, const CauchyData1D& data, const Model& model,
                      const ExactOptions& opt = {});

/// Solution samples on a uniform space-time lattice; values and time
/// derivatives are kept for each stored time.
struct SpaceTimeGrid {
    double x0 = 0, dx = 0;
    std::size_t nx = 0;
    double dt = 0;  ///< largest physical time step taken
    std::vector<double> times;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> vt;

    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
};

enum class FdScheme {
    /// Leapfrog in the light-cone time T = A(t), where characteristics have
    /// unit slope; Courant number exactly 1, so the discrete domain of
    /// dependence coincides with the cone. Damping and mass are averaged in time.
    LightCone,
    /// Leapfrog in t with dt <= 0.5 dx / (c e^{H t_end}); damping averaged,
    /// mass explicit.
    PhysicalTime,
};

struct FdOptions {
    FdScheme scheme = FdScheme::LightCone;
    /// Number of stored intervals; 0 stores every step.
    std::size_t snapshots = 50;
    double growth_limit = 1e12;
    /// Extra cells beyond R + A(t_end) on each side.
    std::size_t pad_cells = 8;
};

/// Second-order leapfrog for v_tt - c^2 e^{2Ht} v_xx + b v_t + m2 v = g on a
/// grid containing B_{R+A(t_end)}. The step is shortened so that stored
/// times are uniform in the scheme's time variable; with the light-cone
/// scheme the grid spacing is shortened too (it never exceeds dx).
/// Throws NumericalError past growth_limit.
SpaceTimeGrid fd_reference_solve(const CauchyData1D& data, const Model& model, double t_end, double dx,
                                 const FdOptions& opt = {});

/// Exact solution sampled on the lattice of `like`; time derivative by a
/// centred difference of the representation formula.
SpaceTimeGrid sample_exact(const SpaceTimeGrid& like, const CauchyData1D& data, const Model& model,
                           const ExactOptions& opt = {});

/// Trapezoid integral of the stored row.
double spatial_average(const SpaceTimeGrid& grid, std::size_t row);

/// Smooth test function with the derivatives the weak form needs.
struct TestFunction {
    std::function<double(double, double)> phi, phi_s, phi_ss, phi_xx;
};

/// chi((s - T/5)/T) chi((x - center)/L) with chi(r) = exp(-1/(1 - r^2)) on |r| < 1.
TestFunction bump_test_function(double T, double L, double center = 0.0);

/// Left minus right side of the weak-form identity at the stored time of `row`.
double weak_residual(const SpaceTimeGrid& grid, const TestFunction& phi, std::size_t row,
                     const Model& model, const CauchyData1D& data);

}  // namespace adswave::linear1d
