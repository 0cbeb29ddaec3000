#include "adswave/linear1d.hpp"

#include "adswave/errors.hpp"
#include "adswave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adswave::linear1d {

Profile bump_c2(double R, double amp) {
    return {[R, amp](double x) {
                const double u = 1.0 - (x / R) * (x / R);
                return u > 0 ? amp * u * u * u : 0.0;
            },
            R};
}

Profile bump_c1(double R, double amp) {
    return {[R, amp](double x) {
                const double u = 1.0 - (x / R) * (x / R);
                return u > 0 ? amp * u * u : 0.0;
            },
            R};
}

Profile zero_profile(double R) {
    return {[](double) { return 0.0; }, R};
}

GridFunction1D GridFunction1D::sample(const Profile& p, double dx, double half_width) {
    GridFunction1D g;
    const auto half = static_cast<std::size_t>(std::ceil(half_width / dx));
    g.dx = dx;
    g.x0 = -dx * static_cast<double>(half);
    g.support_radius = p.support_radius;
    g.values.resize(2 * half + 1);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = p(g.x(i));
    return g;
}

double CauchyData1D::outer_radius() const {
    double r = std::max(v0.support_radius, v1.support_radius);
    if (source) r = std::max(r, source->support_radius);
    return r;
}

CauchyData1D default_data(double R, double amp0, double amp1) {
    return {bump_c2(R, amp0), bump_c1(R, amp1), std::nullopt};
}

namespace {

// Sorted breakpoints of [lo, hi] intersected with [-r, r]; empty if disjoint.
std::vector<double> clipped(double lo, double hi, double r) {
    const double a = std::max(lo, -r), b = std::min(hi, r);
    if (!(b > a)) return {};
    return {a, b};
}

}  // namespace

double evaluate_exact(double t, double x, const CauchyData1D& data, const Model& model,
                      const ExactOptions& opt) {
    if (!(t >= 0)) throw std::invalid_argument("evaluate_exact: t must be ≥ 0");
    if (t == 0.0) return data.v0(x);
    const auto& p = model.params;
    const kernels::KernelContext k(model);
    const double A = amplitude(t, p);

    double value = 0.5 * std::exp(-0.5 * (p.b + p.H) * t) * (data.v0(x + A) + data.v0(x - A));

    const double rdata = std::max(data.v0.support_radius, data.v1.support_radius);
    const auto br = clipped(x - A, x + A, rdata);
    if (!br.empty()) {
        auto integrand = [&](double z) {
            const auto kk = kernels::kernel_K0_K1(k, t, x, z);
            return kk.K0 * data.v0(z) + kk.K1 * data.v1(z);
        };
        value += quad::integrate(integrand, br, opt.outer).value;
    }

    if (data.source) {
        const auto& src = *data.source;
        const double rs = src.support_radius;
        const double eht = std::exp(p.H * t);
        auto inner = [&](double s) {
            const double w = k.ch * (eht - std::exp(p.H * s));
            const auto zb = clipped(x - w, x + w, rs);
            if (zb.empty()) return 0.0;
            auto f = [&](double z) {
                return kernels::kernel_E(k, kernels::KernelPoint::make(k, t, x, s, z)) * src.g(s, z);
            };
            return quad::integrate(f, zb, opt.inner).value;
        };
        // The inner interval gets clipped by the source support at the times
        // where the cone edge x -+ w(s) crosses -+rs; split the outer range there.
        std::vector<double> sb = {0.0, t};
        for (double d : {std::abs(x - rs), std::abs(x + rs)}) {
            const double arg = eht - d / k.ch;
            if (arg > 1.0) {
                const double s = std::log(arg) / p.H;
                if (s > 0 && s < t) sb.push_back(s);
            }
        }
        std::sort(sb.begin(), sb.end());
        value += quad::integrate(inner, sb, opt.outer).value;
    }
    return value;
}

namespace {

void check_growth(double peak, double limit, double t, double dx, double dt) {
    if (peak <= limit) return;
    std::ostringstream os;
    os << "fd_reference_solve: max-norm " << peak << " exceeded limit at t=" << t << " (dx=" << dx
       << ", dt=" << dt << ")";
    throw NumericalError(os.str(), peak);
}

std::size_t step_count(double span, double h_max, std::size_t snapshots, std::size_t& stride) {
    auto steps = static_cast<std::size_t>(std::ceil(span / h_max));
    stride = 1;
    if (snapshots > 0) {
        stride = (steps + snapshots - 1) / snapshots;
        steps = stride * snapshots;
    }
    return steps;
}

SpaceTimeGrid physical_time_solve(const CauchyData1D& data, const Model& model, double t_end, double dx,
                                  const FdOptions& opt) {
    const auto& p = model.params;
    const double reach = data.outer_radius() + amplitude(t_end, p);
    const auto half = static_cast<std::size_t>(std::ceil(reach / dx)) + opt.pad_cells;

    SpaceTimeGrid g;
    g.dx = dx;
    g.nx = 2 * half + 1;
    g.x0 = -dx * static_cast<double>(half);

    std::size_t stride = 1;
    const std::size_t steps = step_count(t_end, 0.5 * dx / (p.c * std::exp(p.H * t_end)), opt.snapshots, stride);
    const double dt = t_end / static_cast<double>(steps);
    g.dt = dt;

    const std::size_t nx = g.nx;
    std::vector<double> v(nx), w(nx), acc(nx), w_prev(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        v[i] = data.v0(g.x(i));
        w[i] = data.v1(g.x(i));
    }
    auto acceleration = [&](double t) {
        const double c2 = p.c * p.c * std::exp(2.0 * p.H * t) / (dx * dx);
        acc[0] = acc[nx - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            acc[i] = c2 * (v[i + 1] - 2.0 * v[i] + v[i - 1]) - p.m2 * v[i];
            if (data.source) acc[i] += data.source->g(t, g.x(i));
        }
    };

    // w holds v_t at half steps: (v^{n+1} - v^n)/dt.
    const double damp_minus = 1.0 - 0.5 * p.b * dt;
    const double damp_plus = 1.0 + 0.5 * p.b * dt;
    for (std::size_t n = 0; n <= steps; ++n) {
        const double t = dt * static_cast<double>(n);
        acceleration(t);
        w_prev = w;
        if (n == 0) {
            for (std::size_t i = 0; i < nx; ++i) w[i] = w_prev[i] + 0.5 * dt * (acc[i] - p.b * w_prev[i]);
        } else {
            for (std::size_t i = 0; i < nx; ++i) w[i] = (damp_minus * w_prev[i] + dt * acc[i]) / damp_plus;
        }
        if (n % stride == 0) {
            g.times.push_back(t);
            g.v.push_back(v);
            std::vector<double> vt(nx);
            for (std::size_t i = 0; i < nx; ++i) vt[i] = n == 0 ? w_prev[i] : 0.5 * (w_prev[i] + w[i]);
            g.vt.push_back(std::move(vt));
        }
        if (n == steps) break;
        double peak = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            v[i] += dt * w[i];
            peak = std::max(peak, std::abs(v[i]));
        }
        check_growth(peak, opt.growth_limit, t + dt, dx, dt);
    }
    return g;
}

// In T = A(t) the equation reads
//   v_TT - v_xx + (H+b)/(c+HT) v_T + m2/(c+HT)^2 v = g/(c+HT)^2.
SpaceTimeGrid light_cone_solve(const CauchyData1D& data, const Model& model, double t_end, double dx,
                               const FdOptions& opt) {
    const auto& p = model.params;
    const double T_end = amplitude(t_end, p);
    std::size_t stride = 1;
    const std::size_t steps = step_count(T_end, dx, opt.snapshots, stride);
    const double h = T_end / static_cast<double>(steps);  // time step = grid spacing

    const double reach = data.outer_radius() + T_end;
    const auto half = static_cast<std::size_t>(std::ceil(reach / h)) + opt.pad_cells;
    SpaceTimeGrid g;
    g.dx = h;
    g.nx = 2 * half + 1;
    g.x0 = -h * static_cast<double>(half);
    g.dt = h / p.c;

    const std::size_t nx = g.nx;
    std::vector<double> v(nx), w(nx), acc(nx), w_prev(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        v[i] = data.v0(g.x(i));
        w[i] = data.v1(g.x(i)) / p.c;  // v_T = v_t / (c e^{Ht})
    }
    auto time_of = [&](double T) { return amplitude_inv(T, p); };

    for (std::size_t n = 0; n <= steps; ++n) {
        const double T = n == steps ? T_end : h * static_cast<double>(n);
        const double t = n == steps ? t_end : time_of(T);
        const double speed = p.c + p.H * T;  // c e^{Ht}
        const double gam = (p.H + p.b) / speed;
        const double mass = p.m2 / (speed * speed);
        acc[0] = acc[nx - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            acc[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) - mass * v[i];
            if (data.source) acc[i] += data.source->g(t, g.x(i)) / (speed * speed);
        }
        w_prev = w;
        if (n == 0) {
            for (std::size_t i = 0; i < nx; ++i) w[i] = w_prev[i] + 0.5 * h * (acc[i] - gam * w_prev[i]);
        } else {
            const double lo = 1.0 - 0.5 * gam * h + 0.5 * mass * h * h;
            const double hi = 1.0 + 0.5 * gam * h + 0.5 * mass * h * h;
            for (std::size_t i = 0; i < nx; ++i) w[i] = (lo * w_prev[i] + h * acc[i]) / hi;
        }
        if (n % stride == 0) {
            g.times.push_back(t);
            g.v.push_back(v);
            std::vector<double> vt(nx);
            for (std::size_t i = 0; i < nx; ++i)
                vt[i] = speed * (n == 0 ? w_prev[i] : 0.5 * (w_prev[i] + w[i]));
            g.vt.push_back(std::move(vt));
        }
        if (n == steps) break;
        double peak = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            v[i] += h * w[i];
            peak = std::max(peak, std::abs(v[i]));
        }
        check_growth(peak, opt.growth_limit, t, h, h / speed);
    }
    return g;
}

}  // namespace

SpaceTimeGrid fd_reference_solve(const CauchyData1D& data, const Model& model, double t_end, double dx,
                                 const FdOptions& opt) {
    if (!(dx > 0) || !(t_end > 0)) throw std::invalid_argument("fd_reference_solve: need dx > 0, t_end > 0");
    return opt.scheme == FdScheme::LightCone ? light_cone_solve(data, model, t_end, dx, opt)
                                             : physical_time_solve(data, model, t_end, dx, opt);
}

SpaceTimeGrid sample_exact(const SpaceTimeGrid& like, const CauchyData1D& data, const Model& model,
                           const ExactOptions& opt) {
    SpaceTimeGrid g;
    g.x0 = like.x0;
    g.dx = like.dx;
    g.nx = like.nx;
    g.dt = like.dt;
    g.times = like.times;
    const double h = 1e-5;
    for (double t : g.times) {
        std::vector<double> v(g.nx), vt(g.nx);
        const double reach = data.outer_radius() + amplitude(t + h, model.params);
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double x = g.x(i);
            if (std::abs(x) > reach) continue;
            v[i] = evaluate_exact(t, x, data, model, opt);
            if (t == 0.0) {
                vt[i] = data.v1(x);
            } else {
                vt[i] = (evaluate_exact(t + h, x, data, model, opt) - evaluate_exact(t - h, x, data, model, opt)) /
                        (2.0 * h);
            }
        }
        g.v.push_back(std::move(v));
        g.vt.push_back(std::move(vt));
    }
    return g;
}

double spatial_average(const SpaceTimeGrid& grid, std::size_t row) {
    const auto& v = grid.v.at(row);
    if (v.empty()) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * grid.dx;
}

namespace {

struct Bump {
    // chi(r) = exp(-1/(1-r^2)) and its first two derivatives.
    static double f(double r) {
        if (std::abs(r) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - r * r));
    }
    static double d1(double r) {
        if (std::abs(r) >= 1.0) return 0.0;
        const double g = 1.0 / (1.0 - r * r);
        return -2.0 * r * g * g * f(r);
    }
    static double d2(double r) {
        if (std::abs(r) >= 1.0) return 0.0;
        const double g = 1.0 / (1.0 - r * r);
        return f(r) * g * g * (-2.0 - 8.0 * r * r * g + 4.0 * r * r * g * g);
    }
};

}  // namespace

TestFunction bump_test_function(double T, double L, double center) {
    // Time factor centred at 0.2 T so that phi_s(0, .) does not vanish.
    const double s0 = 0.2 * T;
    TestFunction tf;
    tf.phi = [=](double s, double x) { return Bump::f((s - s0) / T) * Bump::f((x - center) / L); };
    tf.phi_s = [=](double s, double x) { return Bump::d1((s - s0) / T) / T * Bump::f((x - center) / L); };
    tf.phi_ss = [=](double s, double x) {
        return Bump::d2((s - s0) / T) / (T * T) * Bump::f((x - center) / L);
    };
    tf.phi_xx = [=](double s, double x) {
        return Bump::f((s - s0) / T) * Bump::d2((x - center) / L) / (L * L);
    };
    return tf;
}

double weak_residual(const SpaceTimeGrid& grid, const TestFunction& phi, std::size_t row, const Model& model,
                     const CauchyData1D& data) {
    const auto& p = model.params;
    const double t = grid.times.at(row);
    auto trap_x = [&](auto&& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const double wgt = (i == 0 || i + 1 == grid.nx) ? 0.5 : 1.0;
            s += wgt * f(i, grid.x(i));
        }
        return s * grid.dx;
    };

    double lhs = trap_x([&](std::size_t i, double x) {
        const double v = grid.v[row][i];
        return grid.vt[row][i] * phi.phi(t, x) - v * phi.phi_s(t, x) + p.b * v * phi.phi(t, x);
    });

    // Time integrals by the trapezoid rule on the stored times.
    double memory = 0.0, forcing = 0.0;
    for (std::size_t k = 0; k <= row; ++k) {
        const double s = grid.times[k];
        double wgt = 0.0;
        if (k > 0) wgt += 0.5 * (grid.times[k] - grid.times[k - 1]);
        if (k < row) wgt += 0.5 * (grid.times[k + 1] - grid.times[k]);
        if (wgt == 0.0) continue;
        const double c2 = p.c * p.c * std::exp(2.0 * p.H * s);
        memory += wgt * trap_x([&](std::size_t i, double x) {
            return grid.v[k][i] * (phi.phi_ss(s, x) - c2 * phi.phi_xx(s, x) - p.b * phi.phi_s(s, x) +
                                   p.m2 * phi.phi(s, x));
        });
        if (data.source) {
            forcing += wgt * trap_x([&](std::size_t, double x) { return data.source->g(s, x) * phi.phi(s, x); });
        }
    }
    lhs += memory;

    const double rhs = trap_x([&](std::size_t, double x) {
                           return data.v1(x) * phi.phi(0.0, x) +
                                  data.v0(x) * (p.b * phi.phi(0.0, x) - phi.phi_s(0.0, x));
                       }) +
                       forcing;
    return lhs - rhs;
}

}  // namespace adswave::linear1d
