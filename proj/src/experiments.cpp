#include "adswave/experiments.hpp"

#include "adswave/errors.hpp"
#include "adswave/iteration.hpp"
#include "adswave/linear1d.hpp"
#include "adswave/radon.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace adswave::experiments {

unsigned worker_count() {
    if (const char* env = std::getenv("ADSWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads) {
    if (count == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex m;
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!first) first = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first) std::rethrow_exception(first);
}

std::vector<double> geometric_ladder(double hi, double lo, std::size_t points) {
    if (!(hi > lo && lo > 0.0)) throw std::invalid_argument("geometric_ladder: need hi > lo > 0");
    if (points < 2) return {hi};
    std::vector<double> out(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(points - 1);
        out[k] = hi * std::pow(lo / hi, s);
    }
    out.back() = lo;
    return out;
}

const char* to_string(ScanSolver s) { return s == ScanSolver::Fd ? "fd" : "duhamel"; }

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<std::string> ScanConfig::violations() const {
    std::vector<std::string> out;
    if (ladder.empty()) out.push_back("scan.ladder must not be empty");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (!(ladder[k] > 0.0)) out.push_back("scan.ladder entries must be > 0");
        if (k > 0 && !(ladder[k] < ladder[k - 1])) out.push_back("scan.ladder must be strictly decreasing");
    }
    if (!(dx > 0.0)) out.push_back("solver.dx must be > 0");
    if (!(dt > 0.0)) out.push_back("solver.dt must be > 0");
    if (!(tol > 0.0)) out.push_back("solver.tol must be > 0");
    if (!(cap_factor > 1.0)) out.push_back("solver.cap must be > 1");
    if (!(t_max > 0.0)) out.push_back("scan.t_max must be > 0");
    if (!(horizon_factor > 0.0)) out.push_back("scan.horizon_factor must be > 0");
    if (!(margin >= 0.0)) out.push_back("scan.margin must be ≥ 0");
    if (fit_window && !(fit_window->first > 0.0 && fit_window->first < fit_window->second))
        out.push_back("scan.fit window needs 0 < lo < hi");
    if (solver == ScanSolver::Duhamel && params.n != 1) out.push_back("model.n must be 1 for the duhamel solver");
    return out;
}

namespace {

bool in_window(double eps, const std::optional<std::pair<double, double>>& w) {
    return !w || (eps >= w->first && eps <= w->second);
}

// Envelope constant for exponent e anchored at the fitted line at eps_top.
double anchor(const Fit& f, double eps_top, double e) {
    const double lt = std::log(eps_top);
    return std::exp(f.intercept + f.slope * lt + 3.0 * f.rms - e * lt);
}

}  // namespace

Fit fit_lifespan(const std::vector<semilinear::LifespanRecord>& records, const ModelParams& p,
                 const std::optional<std::pair<double, double>>& window, double margin) {
    Fit f;
    f.theoretical_exponent = lifespan_exponent(p);
    f.exponent_flat = p.varsigma > 0.0 ? lifespan_exponent_flat(p) : f.theoretical_exponent;
    f.exponent_growth = p.varsigma > 0.0 ? lifespan_exponent_growth(p) : f.theoretical_exponent;

    std::vector<double> xs, ys;
    double eps_top = 0.0;
    for (const auto& r : records) {
        if (!in_window(r.epsilon, window)) {
            ++f.outside_window;
            continue;
        }
        if (!r.blew_up()) {
            ++f.excluded_infinite;
            continue;
        }
        xs.push_back(std::log(r.epsilon));
        ys.push_back(std::log(r.t_blowup));
        eps_top = std::max(eps_top, r.epsilon);
    }
    f.used = xs.size();
    if (f.used < 4) {
        f.verdict = Verdict::Inconclusive;
        f.reason = "fewer than 4 finite records";
        return f;
    }
    const double n = static_cast<double>(f.used);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        f.verdict = Verdict::Inconclusive;
        f.reason = "degenerate ladder";
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);

    f.C = anchor(f, eps_top, f.theoretical_exponent);
    f.C_flat = anchor(f, eps_top, f.exponent_flat);
    f.C_growth = anchor(f, eps_top, f.exponent_growth);
    f.slope_ok = f.slope >= f.theoretical_exponent - margin;
    f.envelope_ok = true;
    for (const auto& r : records) {
        if (!in_window(r.epsilon, window)) continue;
        const double bound = f.C * std::pow(r.epsilon, f.theoretical_exponent) * (1.0 + 1e-12);
        // A run that reached its horizon without blowing up only contradicts the
        // envelope when the horizon lies beyond the bound.
        const double t = r.blew_up() ? r.t_blowup : r.t_horizon;
        if (t > bound) f.envelope_ok = false;
    }
    f.verdict = f.slope_ok && f.envelope_ok ? Verdict::Pass : Verdict::Fail;
    if (!f.slope_ok) f.reason = "fitted slope below the theoretical exponent minus margin";
    else if (!f.envelope_ok) f.reason = "a record exceeds the envelope";
    return f;
}

ScanResult lifespan_scan(const ScanConfig& cfg) {
    auto bad = cfg.violations();
    if (!bad.empty()) throw ValidationError(std::move(bad));
    const auto& p = cfg.params;
    lifespan_exponent(p);  // throws for varsigma <= -1/p
    const semilinear::NonlinearTerm nl(p, cfg.rho_mode);

    ScanResult out;
    out.regime.hypothesis_holds = nl.derived().hypothesis_holds;
    out.regime.critical = cfg.rho_mode == semilinear::RhoMode::Critical;
    out.regime.branch = nl.derived().branch;
    out.regime.rho_used = nl.varrho();
    out.regime.rho_crit = nl.derived().rho_crit;

    // Horizon from the predicted T0(eps) when the iteration constants exist.
    std::optional<iteration::IterationConfig> icfg;
    {
        iteration::IterationConfig c(nl.model());
        if (c.violations().empty()) icfg = c;
    }
    out.horizons.resize(cfg.ladder.size());
    for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
        double h = cfg.t_max;
        if (icfg) {
            const double T0 = iteration::L_and_T0(1.0, cfg.ladder[k], *icfg).T0;
            if (std::isfinite(T0) && T0 > 0.0) h = std::min(h, cfg.horizon_factor * T0);
        }
        out.horizons[k] = h;
    }

    const double R = p.R;
    const radon::RadialProfile v0{[R](double r) { const double u = 1 - (r / R) * (r / R); return u * u * u; }, R, p.n};
    const radon::RadialProfile v1{[R](double r) { const double u = 1 - (r / R) * (r / R); return u * u; }, R, p.n};
    const auto data = linear1d::default_data(R);

    out.records.resize(cfg.ladder.size());
    const unsigned threads = cfg.threads ? cfg.threads : worker_count();
    parallel_for(
        cfg.ladder.size(),
        [&](std::size_t k) {
            const double eps = cfg.ladder[k];
            if (cfg.solver == ScanSolver::Fd) {
                semilinear::FdRadialOptions o;
                o.blowup.cap_factor = cfg.cap_factor;
                o.blowup.snapshots = 0;
                out.records[k] = semilinear::fd_radial_solve(v0, v1, nl, eps, out.horizons[k], cfg.dx, o).record;
            } else {
                semilinear::DuhamelOptions o;
                o.blowup.cap_factor = cfg.cap_factor;
                o.blowup.snapshots = 0;
                out.records[k] =
                    semilinear::duhamel_solve_1d(data, nl, eps, out.horizons[k], cfg.dt, cfg.tol, o).record;
            }
        },
        threads);

    out.fit = fit_lifespan(out.records, p, cfg.fit_window, cfg.margin);
    if (out.fit.verdict != Verdict::Inconclusive && (!out.regime.hypothesis_holds || !out.regime.critical)) {
        out.fit.verdict = Verdict::Inconclusive;
        out.fit.reason = "regime outside the theorem's hypotheses";
    }
    return out;
}

std::vector<RegimeRow> regime_scan(const RegimeGrid& g) {
    std::vector<RegimeRow> rows;
    for (int n : g.n)
        for (double p : g.p)
            for (double b : g.b)
                for (double m2 : g.m2)
                    for (double H : g.H)
                        for (double beta : g.beta) {
                            RegimeRow row;
                            row.n = n;
                            row.p = p;
                            row.b = b;
                            row.m2 = m2;
                            row.H = H;
                            row.beta = beta;
                            ModelParams mp;
                            mp.n = n;
                            mp.p = p;
                            mp.b = b;
                            mp.m2 = m2;
                            mp.H = H;
                            mp.beta = beta;
                            mp.c = g.c;
                            try {
                                const DerivedParams d = derive(mp);
                                row.valid = true;
                                row.N_threshold = d.N_threshold;
                                row.nu = d.nu;
                                row.rho_crit = d.rho_crit;
                                row.rho_low = rho_crit_low(mp);
                                row.rho_high = rho_crit_high(mp);
                                row.sigma_crit = d.sigma_crit;
                                row.branch = d.branch;
                                row.hypothesis_holds = d.hypothesis_holds;
                            } catch (const ValidationError& e) {
                                row.error = e.what();
                            }
                            rows.push_back(std::move(row));
                        }
    return rows;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_records_csv(std::ostream& os, const ScanResult& r) {
    os << "epsilon,t_blowup,detection,solver,cap_used,t_cap_sup,t_cap_V,max_sup,max_V,steps,substeps,"
          "picard_iterations,halvings,t_horizon,hypothesis_holds,critical,branch,rho\n";
    for (const auto& rec : r.records) {
        os << format_double(rec.epsilon) << ',' << format_double(rec.t_blowup) << ','
           << semilinear::to_string(rec.detection) << ',' << semilinear::to_string(rec.solver) << ','
           << format_double(rec.cap_used) << ',' << format_double(rec.t_cap_sup) << ','
           << format_double(rec.t_cap_V) << ',' << format_double(rec.max_sup) << ',' << format_double(rec.max_V)
           << ',' << rec.steps << ',' << rec.substeps << ',' << rec.picard_iterations << ',' << rec.halvings << ','
           << format_double(rec.t_horizon) << ',' << (rec.hypothesis_holds ? 1 : 0) << ','
           << (r.regime.critical ? 1 : 0) << ',' << to_string(r.regime.branch) << ','
           << format_double(r.regime.rho_used) << '\n';
    }
}

void write_fit_json(std::ostream& os, const ScanResult& r, const ScanConfig& cfg) {
    const Fit& f = r.fit;
    nlohmann::ordered_json j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["rms"] = f.rms;
    j["theoretical_exponent"] = f.theoretical_exponent;
    j["exponent_flat"] = f.exponent_flat;
    j["exponent_growth"] = f.exponent_growth;
    j["C"] = f.C;
    j["C_flat"] = f.C_flat;
    j["C_growth"] = f.C_growth;
    j["margin"] = cfg.margin;
    j["slope_ok"] = f.slope_ok;
    j["envelope_ok"] = f.envelope_ok;
    j["used"] = f.used;
    j["excluded_infinite"] = f.excluded_infinite;
    j["outside_window"] = f.outside_window;
    j["verdict"] = to_string(f.verdict);
    j["reason"] = f.reason;
    j["regime"] = {{"hypothesis_holds", r.regime.hypothesis_holds},
                   {"critical", r.regime.critical},
                   {"branch", to_string(r.regime.branch)},
                   {"rho_used", r.regime.rho_used},
                   {"rho_crit", r.regime.rho_crit}};
    os << j.dump(2) << '\n';
}

void write_plot_svg(std::ostream& os, const ScanResult& r) {
    const double W = 640, Ht = 480, m = 60;
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : r.records)
        if (rec.blew_up()) pts.emplace_back(std::log10(rec.epsilon), std::log10(rec.t_blowup));
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Ht << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (pts.empty()) {
        os << "<text x=\"" << m << "\" y=\"" << m << "\">no finite records</text>\n</svg>\n";
        return;
    }
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (auto [x, y] : pts) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    // Include the envelope at the plotted range.
    const auto env = [&](double lx) { return std::log10(r.fit.C) + r.fit.theoretical_exponent * lx; };
    if (r.fit.C > 0.0) y1 = std::max(y1, std::min(env(x0), y1 + 2.0));
    if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-9) y1 = y0 + 1.0;
    auto X = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
    auto Y = [&](double y) { return Ht - m - (y - y0) / (y1 - y0) * (Ht - 2 * m); };
    os << "<line x1=\"" << m << "\" y1=\"" << Ht - m << "\" x2=\"" << W - m << "\" y2=\"" << Ht - m
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << Ht - m << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << Ht - 15 << "\" text-anchor=\"middle\">log10 epsilon</text>\n";
    os << "<text x=\"15\" y=\"" << Ht / 2 << "\" transform=\"rotate(-90 15 " << Ht / 2
       << ")\" text-anchor=\"middle\">log10 t_blowup</text>\n";
    for (auto [x, y] : pts) os << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    if (r.fit.used >= 4) {
        os << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(r.fit.intercept / std::log(10.0) + r.fit.slope * x0) << "\" x2=\""
           << X(x1) << "\" y2=\"" << Y(r.fit.intercept / std::log(10.0) + r.fit.slope * x1)
           << "\" stroke=\"steelblue\" stroke-dasharray=\"4 3\"/>\n";
        // Theoretical slope through the envelope, clipped to the frame.
        double xa = x0;
        if (env(xa) > y1) xa = (y1 - std::log10(r.fit.C)) / r.fit.theoretical_exponent;
        os << "<line x1=\"" << X(xa) << "\" y1=\"" << Y(env(xa)) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(env(x1))
           << "\" stroke=\"firebrick\"/>\n";
    }
    os << "</svg>\n";
}

void write_regime_csv(std::ostream& os, const std::vector<RegimeRow>& rows) {
    os << "n,p,b,m2,H,beta,valid,N,nu,branch,rho_crit,rho_low,rho_high,sigma_crit,hypothesis_holds,error\n";
    for (const auto& r : rows) {
        os << r.n << ',' << format_double(r.p) << ',' << format_double(r.b) << ',' << format_double(r.m2) << ','
           << format_double(r.H) << ',' << format_double(r.beta) << ',' << (r.valid ? 1 : 0) << ',';
        if (r.valid) {
            os << format_double(r.N_threshold) << ',' << format_double(r.nu) << ',' << to_string(r.branch) << ','
               << format_double(r.rho_crit) << ',' << format_double(r.rho_low) << ',' << format_double(r.rho_high)
               << ',' << format_double(r.sigma_crit) << ',' << (r.hypothesis_holds ? 1 : 0) << ',';
        } else {
            os << ",,,,,,,,";
        }
        std::string e = r.error;
        std::replace(e.begin(), e.end(), ',', ';');
        std::replace(e.begin(), e.end(), '\n', ' ');
        os << e << '\n';
    }
}

}  // namespace adswave::experiments
