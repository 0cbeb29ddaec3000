#include "cli.hpp"

#include "adswave/config.hpp"
#include "adswave/errors.hpp"
#include "adswave/experiments.hpp"
#include "adswave/iteration.hpp"
#include "adswave/kernels.hpp"
#include "adswave/linear1d.hpp"
#include "adswave/odi.hpp"
#include "adswave/radon.hpp"
#include "adswave/semilinear.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace adswave::cli {

namespace fs = std::filesystem;
using experiments::format_double;
using nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Output directory plus the list of files written, for the manifest.
class Outputs {
public:
    explicit Outputs(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name);
        if (!f) throw IoError("cannot write '" + (dir_ / name).string() + "'");
        names_.push_back(name);
        return f;
    }

    void manifest(const std::string& subcommand, const std::string& hash) {
        config::Manifest m{config::kToolVersion, hash, config::now_utc(), subcommand, names_};
        std::ofstream f(dir_ / "manifest.json");
        if (!f) throw IoError("cannot write manifest in '" + dir_.string() + "'");
        f << config::to_json(m);
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

ordered_json record_json(const semilinear::LifespanRecord& r) {
    ordered_json j;
    j["epsilon"] = r.epsilon;
    j["t_blowup"] = num(r.t_blowup);
    j["detection"] = semilinear::to_string(r.detection);
    j["solver"] = semilinear::to_string(r.solver);
    j["cap_used"] = r.cap_used;
    j["cap_V_used"] = num(r.cap_V_used);
    j["t_cap_sup"] = num(r.t_cap_sup);
    j["t_cap_V"] = num(r.t_cap_V);
    j["max_sup"] = num(r.max_sup);
    j["max_V"] = num(r.max_V);
    j["steps"] = r.steps;
    j["substeps"] = r.substeps;
    j["picard_iterations"] = r.picard_iterations;
    j["halvings"] = r.halvings;
    j["t_horizon"] = r.t_horizon;
    j["hypothesis_holds"] = r.hypothesis_holds;
    return j;
}

radon::RadialProfile bump(double R, int n, int power) {
    return {[R, power](double r) {
                const double u = 1 - (r / R) * (r / R);
                return std::pow(u, power);
            },
            R, n};
}

/// "lo:hi:count" or a comma-separated list.
std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    auto number = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != t.size()) throw std::invalid_argument("--rho-grid: bad number '" + t + "'");
        return v;
    };
    if (std::count(s.begin(), s.end(), ':') == 2) {
        const auto a = s.find(':'), b = s.rfind(':');
        const double lo = number(s.substr(0, a)), hi = number(s.substr(a + 1, b - a - 1));
        const double cnt = number(s.substr(b + 1));
        if (cnt < 1 || cnt != std::floor(cnt) || hi < lo) throw std::invalid_argument("--rho-grid: need lo <= hi and count >= 1");
        const auto k = static_cast<std::size_t>(cnt);
        for (std::size_t i = 0; i < k; ++i) out.push_back(k == 1 ? lo : lo + (hi - lo) * double(i) / double(k - 1));
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(item));
    if (out.empty()) throw std::invalid_argument("--rho-grid: empty");
    return out;
}

radon::RadialProfile read_profile(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile '" + path + "'");
    std::vector<double> rs, vs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b);
        char* e1 = nullptr;
        char* e2 = nullptr;
        const double r = std::strtod(a.c_str(), &e1);
        const double v = std::strtod(b.c_str(), &e2);
        if (e1 == a.c_str() || e2 == b.c_str()) {
            if (lineno == 1) continue;  // header
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'r,value'");
        }
        rs.push_back(r);
        vs.push_back(v);
    }
    if (rs.size() < 2) throw std::invalid_argument(path + ": need at least two samples");
    if (rs.front() != 0.0) throw std::invalid_argument(path + ": samples must start at r = 0");
    for (std::size_t i = 1; i < rs.size(); ++i)
        if (!(rs[i] > rs[i - 1])) throw std::invalid_argument(path + ": r must be strictly increasing");
    const double support = rs.back();
    return radon::RadialProfile::from_samples(std::move(rs), std::move(vs), n, support);
}

odi::OdiProblem read_problem(const std::string& path, std::optional<double>& theta, std::optional<double>& kappa) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(path + ": expected a JSON object");
    odi::OdiProblem p;
    std::map<std::string, double*> fields{{"b", &p.b},   {"m2", &p.m2},     {"q", &p.q},   {"k0", &p.k0},
                                          {"k1", &p.k1}, {"ell0", &p.ell0}, {"ell1", &p.ell1}, {"B", &p.B},
                                          {"K", &p.K},   {"T0", &p.T0},     {"G0", &p.G0}, {"G0p", &p.G0p}};
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw std::invalid_argument("problem." + key + ": expected a number");
        if (key == "theta") {
            theta = value.get<double>();
        } else if (key == "kappa") {
            kappa = value.get<double>();
        } else {
            const auto it = fields.find(key);
            if (it == fields.end()) throw std::invalid_argument("problem." + key + ": unknown key");
            *it->second = value.get<double>();
        }
    }
    return p;
}

struct Common {
    std::string config_path;
    std::string out_dir = ".";
};

void add_common(CLI::App* sub, Common& c, bool config_required = false) {
    auto* o = sub->add_option("--config", c.config_path, "Experiment config (INI: [model], [solver], [scan])");
    if (config_required) o->required();
    sub->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
}

config::Config load(const Common& c) {
    return c.config_path.empty() ? config::parse_config_text("") : config::parse_config(c.config_path);
}

void echo_config(Outputs& o, const config::Config& cfg) { o.open("config.resolved.ini") << config::serialize(cfg); }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical experiments for semilinear damped Klein-Gordon equations on an expanding background",
                 "adswave"};
    app.require_subcommand(1);
    Common common;

    auto* kernel = app.add_subcommand("kernel", "Kernel functions")->require_subcommand(1);
    auto* kernel_eval = kernel->add_subcommand("eval", "Evaluate E, dE/ds, K0, K1 at one point");
    double kt = 0, kx = 0, ks = 0, kz = 0;
    kernel_eval->add_option("--t", kt, "Observation time")->required();
    kernel_eval->add_option("--x", kx, "Observation point")->required();
    kernel_eval->add_option("--s", ks, "Source time")->capture_default_str();
    kernel_eval->add_option("--z", kz, "Source point")->capture_default_str();
    add_common(kernel_eval, common);

    auto* linear = app.add_subcommand("linear", "Linear 1-d problem")->require_subcommand(1);
    auto* linear_solve = linear->add_subcommand("solve", "Solve with the kernel formula and/or finite differences");
    double t_end = 0, dx = 0;
    std::string method = "both";
    std::size_t lin_snapshots = 10;
    auto* o_tend = linear_solve->add_option("--t-end", t_end, "Final time (default solver.t_end)");
    auto* o_dx = linear_solve->add_option("--dx", dx, "Grid spacing (default solver.dx)");
    linear_solve->add_option("--method", method)->check(CLI::IsMember({"exact", "fd", "both"}))->capture_default_str();
    linear_solve->add_option("--snapshots", lin_snapshots, "Stored time intervals")->capture_default_str();
    add_common(linear_solve, common);

    auto* semi = app.add_subcommand("semilinear", "Semilinear problem")->require_subcommand(1);
    auto* semi_run = semi->add_subcommand("run", "One blow-up run");
    double s_eps = 0, s_horizon = 0, s_cap = 0;
    std::string s_solver;
    int s_n = 1;
    auto* o_eps = semi_run->add_option("--epsilon", s_eps, "Data amplitude (default solver.epsilon)");
    auto* o_solver = semi_run->add_option("--solver", s_solver)->check(CLI::IsMember({"duhamel", "fd"}));
    auto* o_n = semi_run->add_option("--n", s_n, "Space dimension (default model.n)");
    auto* o_horizon = semi_run->add_option("--t-horizon", s_horizon, "Final time (default solver.t_horizon)");
    auto* o_cap = semi_run->add_option("--cap", s_cap, "Cap factor (default solver.cap)");
    add_common(semi_run, common);

    auto* odi_cmd = app.add_subcommand("odi", "Differential inequality lemma")->require_subcommand(1);
    auto* odi_check = odi_cmd->add_subcommand("check", "Verify the blow-up bound for one problem");
    std::string problem_path;
    odi_check->add_option("--problem", problem_path, "Problem JSON")->required();
    odi_check->add_option("--out", common.out_dir, "Output directory")->capture_default_str();

    auto* radon_cmd = app.add_subcommand("radon", "Radial Radon transform of a sampled profile");
    std::string profile_path, rho_grid;
    int r_n = 0;
    radon_cmd->add_option("--profile", profile_path, "CSV with columns r,value")->required();
    auto* o_rn = radon_cmd->add_option("--n", r_n, "Space dimension (default model.n)");
    radon_cmd->add_option("--rho-grid", rho_grid, "lo:hi:count or comma list (default 0:support:21)");
    add_common(radon_cmd, common);

    auto* iterate = app.add_subcommand("iterate", "Iteration-frame tables");
    double i_eps = 0, i_t = 10.0;
    int i_jmax = 0;
    auto* o_ieps = iterate->add_option("--epsilon", i_eps, "Data amplitude (default solver.epsilon)");
    iterate->add_option("--t", i_t, "Time for log K_j")->capture_default_str();
    auto* o_jmax = iterate->add_option("--jmax", i_jmax, "Last index (default solver.jmax)");
    add_common(iterate, common);

    auto* lifespan = app.add_subcommand("lifespan", "Lifespan experiments")->require_subcommand(1);
    auto* scan = lifespan->add_subcommand("scan", "Blow-up times over the epsilon ladder and the scaling fit");
    bool plot = false;
    scan->add_flag("--plot", plot, "Also write plot.svg");
    add_common(scan, common, true);

    auto* regime = app.add_subcommand("regime", "Derived quantities over a parameter grid");
    add_common(regime, common);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (kernel_eval->parsed()) {
            const config::Config cfg = load(common);
            const Model model(cfg.model);
            const kernels::KernelContext kc(model);
            const auto pt = kernels::KernelPoint::make(kc, kt, kx, ks, kz);
            const auto data = kernels::kernel_K0_K1(kc, kt, kx, kz);
            ordered_json j;
            j["t"] = kt;
            j["x"] = kx;
            j["s"] = ks;
            j["z"] = kz;
            j["zeta"] = kernels::zeta_arg(pt);
            j["E"] = kernels::kernel_E(kc, pt);
            j["dE_ds"] = kernels::kernel_dE_ds(kc, pt);
            j["K0"] = data.K0;
            j["K1"] = data.K1;
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            o.open("kernel.json") << j.dump(2) << '\n';
            out << j.dump(2) << '\n';
            o.manifest("kernel eval", config::config_hash(cfg));
            return kOk;
        }

        if (linear_solve->parsed()) {
            config::Config cfg = load(common);
            if (o_tend->count()) cfg.solver.t_end = t_end;
            if (o_dx->count()) cfg.solver.dx = dx;
            if (!(cfg.solver.t_end > 0) || !(cfg.solver.dx > 0))
                throw std::invalid_argument("--t-end and --dx must be positive");
            const Model model(cfg.model);
            const auto data = linear1d::default_data(cfg.model.R);
            linear1d::FdOptions fo;
            fo.snapshots = lin_snapshots;
            const auto fd = linear1d::fd_reference_solve(data, model, cfg.solver.t_end, cfg.solver.dx, fo);
            std::optional<linear1d::SpaceTimeGrid> exact;
            if (method != "fd") exact = linear1d::sample_exact(fd, data, model, config::to_exact_options(cfg));

            Outputs o(common.out_dir);
            echo_config(o, cfg);
            {
                auto csv = o.open("linear.csv");
                csv << (method == "both" ? "t,x,v_exact,v_fd\n" : "t,x,v\n");
                for (std::size_t k = 0; k < fd.times.size(); ++k)
                    for (std::size_t i = 0; i < fd.nx; ++i) {
                        csv << format_double(fd.times[k]) << ',' << format_double(fd.x(i));
                        if (exact) csv << ',' << format_double(exact->v[k][i]);
                        if (method != "exact") csv << ',' << format_double(fd.v[k][i]);
                        csv << '\n';
                    }
            }
            ordered_json j;
            j["method"] = method;
            j["t_end"] = cfg.solver.t_end;
            j["dx"] = fd.dx;
            j["nx"] = fd.nx;
            j["times"] = fd.times.size();
            double peak = 0, diff = 0, peak_fd = 0;
            for (std::size_t k = 0; k < fd.times.size(); ++k)
                for (std::size_t i = 0; i < fd.nx; ++i) {
                    peak_fd = std::max(peak_fd, std::abs(fd.v[k][i]));
                    if (exact) {
                        peak = std::max(peak, std::abs(exact->v[k][i]));
                        diff = std::max(diff, std::abs(exact->v[k][i] - fd.v[k][i]));
                    }
                }
            if (method != "exact") j["max_abs_fd"] = peak_fd;
            if (exact) j["max_abs_exact"] = peak;
            if (method == "both") {
                j["max_abs_error"] = diff;
                j["relative_max_error"] = peak > 0 ? diff / peak : 0.0;
            }
            o.open("linear.json") << j.dump(2) << '\n';
            out << j.dump(2) << '\n';
            o.manifest("linear solve", config::config_hash(cfg));
            return kOk;
        }

        if (semi_run->parsed()) {
            config::Config cfg = load(common);
            if (o_eps->count()) cfg.solver.epsilon = s_eps;
            if (o_solver->count()) cfg.solver.solver = s_solver;
            if (o_n->count()) cfg.model.n = s_n;
            if (o_horizon->count()) cfg.solver.t_horizon = s_horizon;
            if (o_cap->count()) cfg.solver.cap = s_cap;
            const semilinear::NonlinearTerm nl(cfg.model, cfg.solver.rho_mode == "critical"
                                                              ? semilinear::RhoMode::Critical
                                                              : semilinear::RhoMode::Explicit);
            semilinear::BlowupOptions bo;
            bo.cap_factor = cfg.solver.cap;
            bo.snapshots = cfg.solver.snapshots;
            semilinear::RunResult run;
            if (cfg.solver.solver == "duhamel") {
                if (cfg.model.n != 1) throw std::invalid_argument("--solver duhamel needs n = 1");
                semilinear::DuhamelOptions dopt;
                dopt.blowup = bo;
                run = semilinear::duhamel_solve_1d(linear1d::default_data(cfg.model.R), nl, cfg.solver.epsilon,
                                                   cfg.solver.t_horizon, cfg.solver.dt, cfg.solver.tol, dopt);
            } else {
                semilinear::FdRadialOptions fopt;
                fopt.blowup = bo;
                run = semilinear::fd_radial_solve(bump(cfg.model.R, cfg.model.n, 3), bump(cfg.model.R, cfg.model.n, 2),
                                                  nl, cfg.solver.epsilon, cfg.solver.t_horizon, cfg.solver.dx, fopt);
            }
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            {
                auto csv = o.open("series.csv");
                csv << "t,V,Lp_p\n";
                const auto& h = run.history;
                for (std::size_t k = 0; k < h.t.size(); ++k)
                    csv << format_double(h.t[k]) << ',' << format_double(h.V[k]) << ',' << format_double(h.Lp_p[k])
                        << '\n';
            }
            const ordered_json j = record_json(run.record);
            o.open("record.json") << j.dump(2) << '\n';
            out << j.dump(2) << '\n';
            o.manifest("semilinear run", config::config_hash(cfg));
            return kOk;
        }

        if (odi_check->parsed()) {
            std::optional<double> theta, kappa;
            const odi::OdiProblem p = read_problem(problem_path, theta, kappa);
            const odi::OdiVerdict v = odi::verify_lemma(p, theta, kappa);
            ordered_json j;
            j["T_tilde0"] = v.T_tilde0;
            j["T1"] = num(v.T1);
            j["K0_threshold"] = num(v.K0_threshold);
            j["theta"] = v.theta_used;
            j["kappa"] = v.kappa_used;
            j["blowup_time"] = num(v.blowup_time);
            j["bound_satisfied"] = v.bound_satisfied;
            j["K_above_threshold"] = v.K_above_threshold;
            j["restarted"] = v.restarted;
            j["lower_bound_held"] = v.lower_bound_held;
            j["normalized"] = v.normalized;
            ordered_json canon;
            canon["b"] = p.b;
            canon["m2"] = p.m2;
            canon["q"] = p.q;
            canon["k0"] = p.k0;
            canon["k1"] = p.k1;
            canon["ell0"] = p.ell0;
            canon["ell1"] = p.ell1;
            canon["B"] = p.B;
            canon["K"] = p.K;
            canon["T0"] = p.T0;
            canon["G0"] = p.G0;
            canon["G0p"] = p.G0p;
            canon["theta"] = v.theta_used;
            canon["kappa"] = v.kappa_used;
            Outputs o(common.out_dir);
            o.open("problem.resolved.json") << canon.dump(2) << '\n';
            o.open("verdict.json") << j.dump(2) << '\n';
            out << j.dump(2) << '\n';
            o.manifest("odi check", config::sha256_hex(canon.dump()));
            // The lemma only promises blow-up by 2 T1 above the threshold.
            return v.K_above_threshold && !v.bound_satisfied ? kVerdictFail : kOk;
        }

        if (radon_cmd->parsed()) {
            config::Config cfg = load(common);
            if (o_rn->count()) cfg.model.n = r_n;
            if (cfg.model.n < 1) throw std::invalid_argument("--n must be >= 1");
            const auto prof = read_profile(profile_path, cfg.model.n);
            const auto rhos = parse_grid(rho_grid.empty() ? "0:" + format_double(prof.support_radius) + ":21" : rho_grid);
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            auto csv = o.open("radon.csv");
            csv << "rho,R\n";
            for (double rho : rhos) csv << format_double(rho) << ',' << format_double(radon::radon_radial(prof, rho)) << '\n';
            csv.close();
            o.manifest("radon", config::config_hash(cfg));
            return kOk;
        }

        if (iterate->parsed()) {
            config::Config cfg = load(common);
            if (o_ieps->count()) cfg.solver.epsilon = i_eps;
            if (o_jmax->count()) cfg.solver.jmax = i_jmax;
            if (cfg.solver.jmax < 0) throw std::invalid_argument("--jmax must be >= 0");
            const auto ic = config::to_iteration_config(cfg);
            ic.validate();
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            auto csv = o.open("iterate.csv");
            csv << "j,a_j,b_j,lnB_j,sigma_j,logK_j\n";
            for (int j = 0; j <= cfg.solver.jmax; ++j) {
                const auto ab = iteration::seq_ab(j, ic);
                const double sigma = iteration::onset_sigma(j, ic);
                const double logK = i_t >= sigma ? iteration::log_K_j(j, i_t, cfg.solver.epsilon, ic) : std::nan("");
                csv << j << ',' << format_double(ab.a) << ',' << format_double(ab.b) << ','
                    << format_double(iteration::log_B(j, ic)) << ',' << format_double(sigma) << ','
                    << format_double(logK) << '\n';
            }
            csv.close();
            o.manifest("iterate", config::config_hash(cfg));
            return kOk;
        }

        if (scan->parsed()) {
            config::Config cfg = load(common);
            if (plot) cfg.scan.plot = true;
            lifespan_exponent(cfg.model);  // rejects varsigma <= -1/p
            const auto sc = config::to_scan_config(cfg);
            const auto r = experiments::lifespan_scan(sc);
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            {
                auto csv = o.open("records.csv");
                experiments::write_records_csv(csv, r);
            }
            {
                auto js = o.open("fit.json");
                experiments::write_fit_json(js, r, sc);
            }
            if (cfg.scan.plot) {
                auto svg = o.open("plot.svg");
                experiments::write_plot_svg(svg, r);
            }
            o.manifest("lifespan scan", config::config_hash(cfg));
            out << "verdict " << experiments::to_string(r.fit.verdict) << " slope " << format_double(r.fit.slope)
                << " theoretical " << format_double(r.fit.theoretical_exponent) << '\n';
            if (!r.fit.reason.empty()) out << r.fit.reason << '\n';
            if (sc.ladder.size() < 6) err << "note: ladder has " << sc.ladder.size() << " points, the fit is weak\n";
            return r.fit.verdict == experiments::Verdict::Pass ? kOk : kVerdictFail;
        }

        if (regime->parsed()) {
            const config::Config cfg = load(common);
            const auto rows = experiments::regime_scan(config::to_regime_grid(cfg));
            Outputs o(common.out_dir);
            echo_config(o, cfg);
            {
                auto csv = o.open("regime.csv");
                experiments::write_regime_csv(csv, rows);
            }
            o.manifest("regime", config::config_hash(cfg));
            return kOk;
        }
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << " (achieved error " << format_double(e.achieved()) << ")\n";
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    err << app.help();
    return kUsage;
}

}  // namespace adswave::cli
