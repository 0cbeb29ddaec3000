#include "adswave/semilinear.hpp"

#include "adswave/errors.hpp"
#include "adswave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace adswave::semilinear {

NonlinearTerm::NonlinearTerm(const ModelParams& p, RhoMode mode) : model_(p), mode_(mode) {}

double NonlinearTerm::varrho() const {
    return mode_ == RhoMode::Critical ? model_.derived.rho_crit : model_.params.varrho;
}

double NonlinearTerm::gamma(double t) const {
    const auto& p = model_.params;
    return p.mu * std::exp(varrho() * t) * std::pow(1.0 + t, p.varsigma);
}

double NonlinearTerm::operator()(double t, double v, double lp_p) const {
    const auto& p = model_.params;
    const double mass = p.beta == 0.0 ? 1.0 : std::pow(lp_p, p.beta);
    return gamma(t) * mass * std::pow(std::abs(v), p.p);
}

double NonlinearTerm::growth_rate(double t, double sup, double lp_p) const {
    const auto& p = model_.params;
    const double mass = p.beta == 0.0 ? 1.0 : std::pow(lp_p, p.beta);
    return model_.derived.q * gamma(t) * mass * std::pow(sup, p.p - 1.0);
}

const char* to_string(Detection d) {
    switch (d) {
        case Detection::None: return "none";
        case Detection::Cap: return "cap";
        case Detection::PicardDivergence: return "picard-divergence";
        case Detection::StepCollapse: return "step-collapse";
    }
    return "?";
}

const char* to_string(SolverKind s) { return s == SolverKind::Duhamel1D ? "duhamel-1d" : "fd-radial"; }

namespace {

double sphere_area(int n) { return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n); }

// Cap bookkeeping shared by both solvers.
class Tracker {
public:
    Tracker(RunResult& out, double peak0, double mass0, const BlowupOptions& opt)
        : out_(out), opt_(opt) {
        auto& r = out_.record;
        r.cap_used = peak0 > 0.0 ? opt.cap_factor * peak0 : kNever;
        r.cap_V_used = mass0 > 0.0 ? opt.cap_factor * mass0 : kNever;
    }

    // Returns true when the run should stop.
    bool observe(double t, double V, double lp, double sup) {
        auto& h = out_.history;
        auto& r = out_.record;
        h.t.push_back(t);
        h.V.push_back(V);
        h.Lp_p.push_back(lp);
        h.sup.push_back(sup);
        if (!std::isfinite(V) || !std::isfinite(sup) || !std::isfinite(lp)) {
            if (r.t_cap_sup == kNever) r.t_cap_sup = t;
            if (r.t_cap_V == kNever) r.t_cap_V = t;
            return true;
        }
        r.max_sup = std::max(r.max_sup, sup);
        r.max_V = std::max(r.max_V, std::abs(V));
        if (r.t_cap_sup == kNever && sup >= r.cap_used) r.t_cap_sup = t;
        if (r.t_cap_V == kNever && std::abs(V) >= r.cap_V_used) r.t_cap_V = t;
        return r.t_cap_sup < kNever && r.t_cap_V < kNever;
    }

    void fail(Detection d, double t) {
        fail_ = d;
        t_fail_ = t;
    }

    void finish(double t_horizon) {
        auto& r = out_.record;
        r.t_horizon = t_horizon;
        const double cap = std::min(r.t_cap_sup, r.t_cap_V);
        if (cap <= t_fail_ && cap < kNever) {
            r.t_blowup = cap;
            r.detection = Detection::Cap;
        } else if (t_fail_ < kNever) {
            r.t_blowup = t_fail_;
            r.detection = fail_;
        }
    }

    void maybe_snapshot(double t, const std::vector<double>& v, double t_horizon) {
        auto& h = out_.history;
        if (opt_.snapshots == 0) return;
        const double every = t_horizon / static_cast<double>(opt_.snapshots);
        if (h.snap_t.empty() || t >= h.snap_t.back() + every * (1.0 - 1e-12)) {
            h.snap_t.push_back(t);
            h.snap_v.push_back(v);
        }
    }

private:
    RunResult& out_;
    BlowupOptions opt_;
    Detection fail_ = Detection::None;
    double t_fail_ = kNever;
};

// Dyadic level that brings a step of size base below limit.
int dyadic_level(double base, double limit) {
    if (!(limit > 0.0) || !std::isfinite(limit)) return std::isfinite(limit) ? 1000 : 0;
    if (limit >= base) return 0;
    return static_cast<int>(std::ceil(std::log2(base / limit) - 1e-12));
}

class RadialGrid {
public:
    RadialGrid(int n, double h, std::size_t nodes) : n_(n), h_(h), om_(n == 1 ? 2.0 : sphere_area(n)) {
        if (split()) {
            // Geometric cells [r - h/2, r + h/2] below row K; row K is the
            // standard stencil, whose left face closes the block.
            const double al = 0.5 * (n - 1);
            K_ = static_cast<std::size_t>(std::ceil(al)) + 1;
            const double h2 = h * h;
            ia_.assign(K_ + 1, 0.0);
            ic_.assign(K_ + 1, 0.0);
            ic_[0] = 2.0 * n / h2;
            for (std::size_t i = 1; i < K_; ++i) {
                const double up = static_cast<double>(i) + 0.5, dn = static_cast<double>(i) - 0.5;
                const double q = std::pow(dn / up, n - 1);
                const double den = h2 * (up - dn * q);
                ic_[i] = n / den;
                ia_[i] = n * q / den;
            }
            ia_[K_] = (1.0 - al / static_cast<double>(K_)) / h2;
        }
        grow(nodes);
    }

    // Extends the node tables to at least `nodes` entries.
    void grow(std::size_t nodes) {
        for (std::size_t i = r_.size(); i < nodes; ++i) {
            const double ri = h_ * static_cast<double>(i);
            r_.push_back(ri);
            w_.push_back(om_ * std::pow(ri, n_ - 1) * h_ * (n_ == 1 && i == 0 ? 0.5 : 1.0));
        }
    }

    std::size_t size() const { return r_.size(); }
    /// n >= 5: explicit standard stencil above row K, implicit origin block 0..K.
    bool split() const { return n_ >= 5; }
    bool origin_extrapolated() const { return n_ >= 2 && n_ <= 4; }
    std::size_t block() const { return K_; }
    double r(std::size_t i) const { return r_[i]; }
    double weight(std::size_t i) const { return w_[i]; }

    double lap(const std::vector<double>& v, std::size_t i) const {
        const double h2 = h_ * h_;
        if (n_ == 1) {
            if (i == 0) return 2.0 * (v[1] - v[0]) / h2;
            return (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        if (split() && i < K_) return implicit_part(v, i);
        // i >= 1 here; for n <= 4 the origin is extrapolated.
        if (n_ == 3) return (r_[i + 1] * v[i + 1] - 2.0 * r_[i] * v[i] + r_[i - 1] * v[i - 1]) / (r_[i] * h2);
        return (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2 + (n_ - 1) / r_[i] * (v[i + 1] - v[i - 1]) / (2.0 * h_);
    }

    // Faces below K + 1/2 only; at row K just the left face.
    double implicit_part(const std::vector<double>& x, std::size_t i) const {
        double s = 0.0;
        if (i > 0) s += ia_[i] * (x[i - 1] - x[i]);
        if (i < K_) s += ic_[i] * (x[i + 1] - x[i]);
        return s;
    }

    // Rows 0..K of hi w+ - (k/4) L_I w+ = lo w- + F - (k_prev/4) L_I w-,
    // overwriting w[0..K] (w- on entry). Averaging the block in time keeps
    // Courant 1 stable however stiff the origin cells are.
    void solve_block(std::vector<double>& w, const std::vector<double>& F, double lo, double hi, double k,
                     double k_prev) {
        const std::size_t m = K_ + 1;
        d_.resize(m);
        c_.resize(m);
        rhs_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double a = ia_[i], c = i < K_ ? ic_[i] : 0.0;
            rhs_[i] = lo * w[i] + F[i] - 0.25 * k_prev * implicit_part(w, i);
            d_[i] = hi + 0.25 * k * (a + c);
            c_[i] = -0.25 * k * c;
        }
        for (std::size_t i = 1; i < m; ++i) {
            const double f = -0.25 * k * ia_[i] / d_[i - 1];
            d_[i] -= f * c_[i - 1];
            rhs_[i] -= f * rhs_[i - 1];
        }
        w[K_] = rhs_[K_] / d_[K_];
        for (std::size_t i = K_; i-- > 0;) w[i] = (rhs_[i] - c_[i] * w[i + 1]) / d_[i];
    }

private:
    int n_;
    double h_, om_;
    std::size_t K_ = 0;
    std::vector<double> r_, w_, ia_, ic_;
    std::vector<double> d_, c_, rhs_;
};

struct Moments {
    double V = 0.0, lp = 0.0, sup = 0.0;
};

}  // namespace

RunResult fd_radial_solve(const radon::RadialProfile& v0, const radon::RadialProfile& v1, const NonlinearTerm& nl,
                          double epsilon, double t_horizon, double dx, const FdRadialOptions& opt) {
    if (!(dx > 0.0) || !(t_horizon > 0.0)) throw std::invalid_argument("fd_radial_solve: need dx > 0, t_horizon > 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("fd_radial_solve: epsilon must be ≥ 0");
    const auto& p = nl.params();
    const int n = p.n;
    const double T_hor = amplitude(t_horizon, p);
    const double Rd = std::max(v0.support_radius, v1.support_radius);
    const double h = dx;
    // The grid follows the cone: nodes up to R + A + pad cells, last node held at zero.
    auto needed = [&](double T) { return static_cast<std::size_t>(std::ceil((Rd + T) / h)) + opt.pad_cells + 3; };
    std::size_t M = needed(0.0);
    RadialGrid grid(n, h, M);
    const double k0 = h;

    RunResult out;
    out.record.epsilon = epsilon;
    out.record.solver = SolverKind::FdRadial;
    out.record.hypothesis_holds = nl.derived().hypothesis_holds;
    out.history.radial = true;
    out.history.n = n;
    out.history.x0 = 0.0;
    out.history.dx = h;

    std::vector<double> v(M, 0.0), w(M, 0.0), F(M, 0.0);
    double peak0 = 0.0, peak1 = 0.0, mass0 = 0.0, mass1 = 0.0;
    for (std::size_t i = 0; i + 1 < M; ++i) {
        const double a = epsilon * v0(grid.r(i)), b = epsilon * v1(grid.r(i));
        v[i] = a;
        w[i] = b / p.c;
        peak0 = std::max(peak0, std::abs(a));
        peak1 = std::max(peak1, std::abs(b));
        mass0 += grid.weight(i) * a;
        mass1 += grid.weight(i) * b;
    }
    Tracker track(out, peak0 > 0.0 ? peak0 : peak1, std::max(std::abs(mass0), std::abs(mass1)), opt.blowup);

    auto moments = [&]() {
        Moments m;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double a = std::abs(v[i]);
            m.V += grid.weight(i) * v[i];
            m.lp += grid.weight(i) * std::pow(a, p.p);
            m.sup = std::max(m.sup, a);
        }
        return m;
    };

    const int max_ref = opt.blowup.max_refine;
    const std::int64_t ticks_full = std::int64_t{1} << max_ref;
    std::int64_t tick = 0;  // position inside the current full step
    int level = 0;
    double T = 0.0, t = 0.0, k_prev = 0.0;
    Moments mo = moments();
    track.maybe_snapshot(0.0, v, t_horizon);
    bool stop = track.observe(0.0, mo.V, mo.lp, mo.sup);
    const std::size_t first = grid.origin_extrapolated() ? 1 : 0;

    while (!stop && T < T_hor * (1.0 - 1e-14)) {
        const double speed = p.c + p.H * T;
        const double kappa = nl.growth_rate(t, mo.sup, mo.lp) / (speed * speed);
        const int want = dyadic_level(k0, opt.blowup.safety / std::sqrt(kappa));
        if (want > max_ref) {
            track.fail(Detection::StepCollapse, t);
            break;
        }
        // Coarsen only at ticks aligned with the coarser step.
        int lv = std::max(want, 0);
        while (lv < level && tick % (ticks_full >> lv) != 0) ++lv;
        level = lv;
        double k = std::ldexp(k0, -level);
        const bool last = T + k >= T_hor;
        if (last) k = T_hor - T;

        if (needed(T + k) > M) {
            M = needed(T + k);
            grid.grow(M);
            v.resize(M, 0.0);
            w.resize(M, 0.0);
            F.resize(M, 0.0);
        }
        const double gam = (p.H + p.b) / speed;
        const double mu = p.m2 / (speed * speed);
        const double G = nl.gamma(t);
        const double mass = p.beta == 0.0 ? 1.0 : std::pow(mo.lp, p.beta);
        // Nodes past the discrete cone are still zero; the origin block always updates.
        const std::size_t active = std::min(
            M - 1, std::max(static_cast<std::size_t>(std::ceil((Rd + T + k) / h)) + 2, grid.block() + 2));
        for (std::size_t i = first; i < active; ++i) {
            const double s = G * mass * std::pow(std::abs(v[i]), p.p) / (speed * speed);
            F[i] = grid.lap(v, i) - mu * v[i] + s;
        }
        const double kbar = 0.5 * (k_prev + k);
        const double lo = 1.0 / kbar - 0.5 * gam + 0.5 * mu * k_prev;
        const double hi = 1.0 / kbar + 0.5 * gam + 0.5 * mu * k;
        const std::size_t explicit_from = grid.split() ? grid.block() + 1 : first;
        for (std::size_t i = explicit_from; i < active; ++i) w[i] = (lo * w[i] + F[i]) / hi;
        if (grid.split()) grid.solve_block(w, F, lo, hi, k, k_prev);
        for (std::size_t i = first; i < active; ++i) v[i] += k * w[i];
        if (grid.origin_extrapolated()) v[0] = (4.0 * v[1] - v[2]) / 3.0;
        k_prev = k;

        T = last ? T_hor : T + k;
        t = last ? t_horizon : amplitude_inv(T, p);
        if (!last) {
            tick += ticks_full >> level;
            if (tick >= ticks_full) tick = 0;
        }
        ++out.record.steps;
        if (level > 0) ++out.record.substeps;

        mo = moments();
        stop = track.observe(t, mo.V, mo.lp, mo.sup);
        track.maybe_snapshot(t, v, t_horizon);
    }
    if (out.history.snap_t.empty() || out.history.snap_t.back() != t) {
        out.history.snap_t.push_back(t);
        out.history.snap_v.push_back(v);
    }
    track.finish(t_horizon);
    return out;
}

namespace {

struct Level {
    double t = 0.0, T = 0.0;
    std::vector<double> v, f;
    double V = 0.0, lp = 0.0, sup = 0.0;
};

// E evaluated at |x - z| = d dx for d = 0..K plus at the cone edge.
struct ETable {
    std::vector<double> E;
    double edge = 0.0;
    double width = 0.0;  // w = T_m - T_j
    std::size_t K = 0;
    double frac = 0.0;   // (w - K dx) / dx
};

ETable make_table(const kernels::KernelContext& kc, const Level& m, const Level& j, double dx) {
    ETable tab;
    tab.width = m.T - j.T;
    if (!(tab.width > 0.0)) return tab;
    const double ratio = tab.width / dx;
    tab.K = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    tab.frac = ratio - static_cast<double>(tab.K);
    if (tab.frac < 1e-9) tab.frac = 0.0;
    tab.E.resize(tab.K + 1);
    for (std::size_t d = 0; d <= tab.K; ++d) {
        const double z = std::min(static_cast<double>(d) * dx, tab.width);
        tab.E[d] = kernels::kernel_E(kc, kernels::KernelPoint::make(kc, m.t, 0.0, j.t, z));
    }
    if (tab.frac > 0.0) tab.edge = kernels::kernel_E(kc, kernels::KernelPoint::make(kc, m.t, 0.0, j.t, tab.width));
    return tab;
}

// out[i] += weight * int_{|z - x_i| <= w} E f_j dz for i in [lo, hi).
void accumulate(const ETable& tab, const std::vector<double>& f, double weight, double dx, std::size_t lo,
                std::size_t hi, std::vector<double>& out) {
    if (!(tab.width > 0.0) || weight == 0.0) return;
    const auto nx = static_cast<std::ptrdiff_t>(f.size());
    const auto K = static_cast<std::ptrdiff_t>(tab.K);
    auto at = [&](std::ptrdiff_t l) { return l < 0 || l >= nx ? 0.0 : f[static_cast<std::size_t>(l)]; };
    for (std::size_t ii = lo; ii < hi; ++ii) {
        const auto i = static_cast<std::ptrdiff_t>(ii);
        // Trapezoid on the nodes of [-K dx, K dx]; the two partial cells out
        // to the cone edge use f interpolated at x_i -+ w.
        double s = 0.0;
        if (K > 0) {
            s = tab.E[0] * at(i);
            for (std::ptrdiff_t d = 1; d < K; ++d) s += tab.E[static_cast<std::size_t>(d)] * (at(i - d) + at(i + d));
            s += 0.5 * tab.E[static_cast<std::size_t>(K)] * (at(i - K) + at(i + K));
            s *= dx;
        }
        if (tab.frac > 0.0) {
            const double phi = tab.frac;
            const double fm = (1.0 - phi) * at(i - K) + phi * at(i - K - 1);
            const double fp = (1.0 - phi) * at(i + K) + phi * at(i + K + 1);
            const double EK = tab.E[static_cast<std::size_t>(K)];
            s += 0.5 * phi * dx * (EK * (at(i - K) + at(i + K)) + tab.edge * (fm + fp));
        }
        out[ii] += weight * s;
    }
}

}  // namespace

RunResult duhamel_solve_1d(const linear1d::CauchyData1D& data, const NonlinearTerm& nl, double epsilon,
                           double t_horizon, double dt, double tol, const DuhamelOptions& opt) {
    const auto& p = nl.params();
    if (p.n != 1) throw std::invalid_argument("duhamel_solve_1d: n = 1 only");
    if (data.source) throw std::invalid_argument("duhamel_solve_1d: data must not carry a source");
    if (!(dt > 0.0) || !(t_horizon > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("duhamel_solve_1d: need dt, t_horizon, tol > 0");
    if (opt.slab_levels == 0) throw std::invalid_argument("duhamel_solve_1d: slab_levels must be ≥ 1");

    const Model& model = nl.model();
    const kernels::KernelContext kc(model);
    const double dx = p.c * dt;
    const double T_hor = amplitude(t_horizon, p);
    const double Rd = data.outer_radius();
    const auto half = static_cast<std::size_t>(std::ceil((Rd + T_hor) / dx)) + 2;
    const std::size_t nx = 2 * half + 1;
    auto xi = [&](std::size_t i) { return dx * (static_cast<double>(i) - static_cast<double>(half)); };
    // Index range of the nodes inside |x| <= Rd + T.
    auto range = [&](double T) {
        const auto r = std::min(half, static_cast<std::size_t>(std::ceil((Rd + T) / dx)) + 1);
        return std::pair<std::size_t, std::size_t>{half - r, half + r + 1};
    };

    RunResult out;
    out.record.epsilon = epsilon;
    out.record.solver = SolverKind::Duhamel1D;
    out.record.hypothesis_holds = nl.derived().hypothesis_holds;
    out.history.x0 = xi(0);
    out.history.dx = dx;
    out.history.n = 1;

    auto finish_level = [&](Level& L) {
        L.f.assign(nx, 0.0);
        L.V = L.lp = L.sup = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double a = std::abs(L.v[i]);
            L.V += L.v[i];
            L.lp += std::pow(a, p.p);
            L.sup = std::max(L.sup, a);
        }
        L.V *= dx;
        L.lp *= dx;
        const double G = nl.gamma(L.t) * (p.beta == 0.0 ? 1.0 : std::pow(L.lp, p.beta));
        for (std::size_t i = 0; i < nx; ++i) L.f[i] = G * std::pow(std::abs(L.v[i]), p.p);
    };
    auto linear_part = [&](Level& L) {
        L.v.assign(nx, 0.0);
        if (epsilon == 0.0) return;
        const auto [lo, hi] = range(L.T);
        for (std::size_t i = lo; i < hi; ++i)
            L.v[i] = epsilon * (L.t == 0.0 ? data.v0(xi(i)) : linear1d::evaluate_exact(L.t, xi(i), data, model, opt.exact));
    };

    std::vector<Level> levels(1);
    levels[0].t = 0.0;
    levels[0].T = 0.0;
    linear_part(levels[0]);
    finish_level(levels[0]);
    double peak1 = 0.0, mass1 = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        const double b = epsilon * data.v1(xi(i));
        peak1 = std::max(peak1, std::abs(b));
        mass1 += b * dx;
    }
    const double peak0 = levels[0].sup;
    Tracker track(out, peak0 > 0.0 ? peak0 : peak1, std::max(std::abs(levels[0].V), std::abs(mass1)), opt.blowup);
    track.maybe_snapshot(0.0, levels[0].v, t_horizon);
    bool stop = track.observe(0.0, levels[0].V, levels[0].lp, levels[0].sup);
    const double scale0 = std::max(peak0, peak1);

    while (!stop && levels.back().T < T_hor * (1.0 - 1e-14)) {
        const Level& last = levels.back();
        const double speed = p.c + p.H * last.T;
        const double kappa = nl.growth_rate(last.t, last.sup, last.lp);
        const int want = dyadic_level(dx, opt.blowup.safety * speed / std::sqrt(kappa));
        bool accepted = false;
        std::vector<Level> slab;
        for (int attempt = 0; attempt <= opt.max_halvings && !accepted; ++attempt) {
            const int lv = want + attempt;
            if (lv > opt.blowup.max_refine) {
                track.fail(Detection::StepCollapse, last.t);
                break;
            }
            if (attempt > 0) ++out.record.halvings;
            const double dT = std::ldexp(dx, -lv);
            slab.clear();
            for (std::size_t k = 1; k <= opt.slab_levels; ++k) {
                Level L;
                L.T = std::min(T_hor, last.T + dT * static_cast<double>(k));
                L.t = L.T >= T_hor ? t_horizon : amplitude_inv(L.T, p);
                slab.push_back(std::move(L));
                if (slab.back().T >= T_hor) break;
            }
            const std::size_t J = levels.size() - 1;  // last known level
            const std::size_t S = slab.size();
            auto s_of = [&](std::size_t idx) { return idx <= J ? levels[idx].t : slab[idx - J - 1].t; };

            // Known part: linear term plus quadrature over levels 0..J.
            std::vector<std::vector<double>> base(S);
            bool finite = true;
            for (std::size_t a = 0; a < S; ++a) {
                Level& L = slab[a];
                linear_part(L);
                base[a] = L.v;
                const auto [lo, hi] = range(L.T);
                for (std::size_t j = 0; j <= J; ++j) {
                    const double wj = j == 0 ? 0.5 * (s_of(1) - s_of(0)) : 0.5 * (s_of(j + 1) - s_of(j - 1));
                    accumulate(make_table(kc, L, levels[j], dx), levels[j].f, wj, dx, lo, hi, base[a]);
                }
                for (double x : base[a]) finite = finite && std::isfinite(x);
            }
            if (!finite) continue;

            // In-slab tables, reused across Picard sweeps.
            std::vector<std::vector<ETable>> tabs(S);
            for (std::size_t a = 0; a < S; ++a)
                for (std::size_t b = 0; b < a; ++b) tabs[a].push_back(make_table(kc, slab[a], slab[b], dx));

            for (auto& L : slab) {
                L.v = last.v;
                finish_level(L);
            }
            bool converged = false;
            for (int it = 0; it < opt.max_picard && finite; ++it) {
                ++out.record.picard_iterations;
                double change = 0.0, size = scale0;
                std::vector<std::vector<double>> next(S);
                for (std::size_t a = 0; a < S; ++a) {
                    next[a] = base[a];
                    const auto [lo, hi] = range(slab[a].T);
                    for (std::size_t b = 0; b < a; ++b) {
                        const std::size_t j = J + 1 + b;
                        const double wj = 0.5 * (s_of(j + 1) - s_of(j - 1));
                        accumulate(tabs[a][b], slab[b].f, wj, dx, lo, hi, next[a]);
                    }
                }
                for (std::size_t a = 0; a < S; ++a) {
                    for (std::size_t i = 0; i < nx; ++i) {
                        if (!std::isfinite(next[a][i])) finite = false;
                        change = std::max(change, std::abs(next[a][i] - slab[a].v[i]));
                        size = std::max(size, std::abs(next[a][i]));
                    }
                    slab[a].v = std::move(next[a]);
                    finish_level(slab[a]);
                }
                if (finite && change <= tol * size) {
                    converged = true;
                    break;
                }
            }
            accepted = finite && converged;
        }
        if (!accepted) {
            if (out.record.t_cap_sup == kNever && std::isfinite(last.t)) track.fail(Detection::PicardDivergence, last.t);
            break;
        }
        for (auto& L : slab) {
            ++out.record.steps;
            if (want > 0) ++out.record.substeps;
            stop = track.observe(L.t, L.V, L.lp, L.sup);
            track.maybe_snapshot(L.t, L.v, t_horizon);
            levels.push_back(std::move(L));
            if (stop) break;
        }
    }
    const Level& end = levels.back();
    if (out.history.snap_t.empty() || out.history.snap_t.back() != end.t) {
        out.history.snap_t.push_back(end.t);
        out.history.snap_v.push_back(end.v);
    }
    track.finish(t_horizon);
    return out;
}

Functionals track_functionals(const History& h, const NonlinearTerm& nl) {
    const auto& p = nl.params();
    Functionals f;
    f.t = h.t;
    f.V = h.V;
    f.Lp_p = h.Lp_p;
    const std::size_t n = h.t.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.residual.assign(n, nan);
    f.scale.assign(n, nan);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = h.t[i] - h.t[i - 1], h2 = h.t[i + 1] - h.t[i];
        if (!(h1 > 0.0) || !(h2 > 0.0)) continue;
        const double Vm = h.V[i - 1], V0 = h.V[i], Vp = h.V[i + 1];
        const double d2 = 2.0 * (Vp / (h2 * (h1 + h2)) - V0 / (h1 * h2) + Vm / (h1 * (h1 + h2)));
        const double d1 = -h2 / (h1 * (h1 + h2)) * Vm + (h2 - h1) / (h1 * h2) * V0 + h1 / (h2 * (h1 + h2)) * Vp;
        const double rhs = nl.gamma(h.t[i]) * std::pow(h.Lp_p[i], p.beta + 1.0);
        f.residual[i] = d2 + p.b * d1 + p.m2 * V0 - rhs;
        f.scale[i] = std::abs(d2) + p.b * std::abs(d1) + p.m2 * std::abs(V0) + std::abs(rhs);
    }
    return f;
}

double max_relative_residual(const Functionals& f, double V_limit) {
    double res = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.t.size(); ++i) {
        if (std::abs(f.V[i]) > V_limit) break;
        if (std::isnan(f.residual[i])) continue;
        res = std::max(res, std::abs(f.residual[i]));
        scale = std::max(scale, f.scale[i]);
    }
    return scale > 0.0 ? res / scale : 0.0;
}

}  // namespace adswave::semilinear
