#include "adswave/config.hpp"

#include "adswave/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace adswave::config {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError(key, "expected a number, got '" + s + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError(key, "expected an integer, got '" + s + "'");
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& raw) {
    const long long v = parse_int(key, raw);
    if (v < 0) throw ConfigError(key, "must be ≥ 0");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
    return out;
}

std::string choice(const std::string& key, const std::string& raw, std::initializer_list<const char*> allowed) {
    const std::string s = trim(raw);
    std::string names;
    for (const char* a : allowed) {
        if (s == a) return s;
        names += names.empty() ? a : std::string("|") + a;
    }
    throw ConfigError(key, "expected one of " + names + ", got '" + s + "'");
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> s = [] {
        std::map<std::string, std::map<std::string, Setter>> m;
        auto num = [](double ModelParams::*f) {
            return Setter([f](Config& c, const std::string& k, const std::string& v) { c.model.*f = parse_double(k, v); });
        };
        auto& model = m["model"];
        model["c"] = num(&ModelParams::c);
        model["H"] = num(&ModelParams::H);
        model["b"] = num(&ModelParams::b);
        model["m2"] = num(&ModelParams::m2);
        model["p"] = num(&ModelParams::p);
        model["beta"] = num(&ModelParams::beta);
        model["mu"] = num(&ModelParams::mu);
        model["varsigma"] = num(&ModelParams::varsigma);
        model["varrho"] = num(&ModelParams::varrho);
        model["R"] = num(&ModelParams::R);
        model["n"] = [](Config& c, const std::string& k, const std::string& v) {
            const long long n = parse_int(k, v);
            if (n < 1 || n > 1000) throw ConfigError(k, "must lie in [1, 1000]");
            c.model.n = static_cast<int>(n);
        };

        auto snum = [](double SolverSection::*f) {
            return Setter([f](Config& c, const std::string& k, const std::string& v) { c.solver.*f = parse_double(k, v); });
        };
        auto& solver = m["solver"];
        solver["solver"] = [](Config& c, const std::string& k, const std::string& v) {
            c.solver.solver = choice(k, v, {"fd", "duhamel"});
        };
        solver["rho_mode"] = [](Config& c, const std::string& k, const std::string& v) {
            c.solver.rho_mode = choice(k, v, {"critical", "explicit"});
        };
        solver["dx"] = snum(&SolverSection::dx);
        solver["dt"] = snum(&SolverSection::dt);
        solver["tol"] = snum(&SolverSection::tol);
        solver["cap"] = snum(&SolverSection::cap);
        solver["epsilon"] = snum(&SolverSection::epsilon);
        solver["t_horizon"] = snum(&SolverSection::t_horizon);
        solver["t_end"] = snum(&SolverSection::t_end);
        solver["delta"] = snum(&SolverSection::delta);
        solver["b0"] = snum(&SolverSection::b0);
        solver["B0"] = snum(&SolverSection::B0);
        solver["D"] = snum(&SolverSection::D);
        solver["Btilde"] = snum(&SolverSection::Btilde);
        solver["a0"] = [](Config& c, const std::string& k, const std::string& v) { c.solver.a0 = parse_double(k, v); };
        solver["quad_rel_tol"] = snum(&SolverSection::quad_rel_tol);
        solver["quad_abs_tol"] = snum(&SolverSection::quad_abs_tol);
        solver["quad_max_panels"] = [](Config& c, const std::string& k, const std::string& v) {
            c.solver.quad_max_panels = parse_count(k, v);
        };
        solver["snapshots"] = [](Config& c, const std::string& k, const std::string& v) {
            c.solver.snapshots = parse_count(k, v);
        };
        solver["jmax"] = [](Config& c, const std::string& k, const std::string& v) {
            const long long j = parse_int(k, v);
            if (j < 0 || j > 200) throw ConfigError(k, "must lie in [0, 200]");
            c.solver.jmax = static_cast<int>(j);
        };

        auto cnum = [](double ScanSection::*f) {
            return Setter([f](Config& c, const std::string& k, const std::string& v) { c.scan.*f = parse_double(k, v); });
        };
        auto clist = [](std::vector<double> ScanSection::*f) {
            return Setter([f](Config& c, const std::string& k, const std::string& v) { c.scan.*f = parse_list(k, v); });
        };
        auto& scan = m["scan"];
        scan["eps_hi"] = cnum(&ScanSection::eps_hi);
        scan["eps_lo"] = cnum(&ScanSection::eps_lo);
        scan["margin"] = cnum(&ScanSection::margin);
        scan["t_max"] = cnum(&ScanSection::t_max);
        scan["horizon_factor"] = cnum(&ScanSection::horizon_factor);
        scan["points"] = [](Config& c, const std::string& k, const std::string& v) { c.scan.points = parse_count(k, v); };
        scan["threads"] = [](Config& c, const std::string& k, const std::string& v) { c.scan.threads = parse_count(k, v); };
        scan["plot"] = [](Config& c, const std::string& k, const std::string& v) { c.scan.plot = parse_bool(k, v); };
        scan["fit_lo"] = [](Config& c, const std::string& k, const std::string& v) { c.scan.fit_lo = parse_double(k, v); };
        scan["fit_hi"] = [](Config& c, const std::string& k, const std::string& v) { c.scan.fit_hi = parse_double(k, v); };
        scan["ladder"] = clist(&ScanSection::ladder);
        scan["grid_n"] = clist(&ScanSection::grid_n);
        scan["grid_p"] = clist(&ScanSection::grid_p);
        scan["grid_b"] = clist(&ScanSection::grid_b);
        scan["grid_m2"] = clist(&ScanSection::grid_m2);
        scan["grid_H"] = clist(&ScanSection::grid_H);
        scan["grid_beta"] = clist(&ScanSection::grid_beta);
        return m;
    }();
    return s;
}

Config from_tree(const pt::ptree& tree) {
    Config c;
    const auto& s = schema();
    for (const auto& [section, body] : tree) {
        const auto sec = s.find(section);
        if (sec == s.end()) throw ConfigError(section, "unknown section");
        for (const auto& [key, node] : body) {
            const std::string path = section + "." + key;
            const auto it = sec->second.find(key);
            if (it == sec->second.end()) throw ConfigError(path, "unknown key");
            it->second(c, path, node.get_value<std::string>());
        }
    }
    auto bad = c.model.violations();
    if (!bad.empty()) {
        std::string all;
        for (const auto& b : bad) all += (all.empty() ? "" : "; ") + b;
        throw ConfigError("model", all);
    }
    for (double n : c.scan.grid_n)
        if (n < 1 || n != std::floor(n)) throw ConfigError("scan.grid_n", "entries must be positive integers");
    if (c.scan.fit_lo.has_value() != c.scan.fit_hi.has_value())
        throw ConfigError("scan.fit_lo", "fit_lo and fit_hi must be given together");
    return c;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + experiments::format_double(x);
    return s;
}

}  // namespace

Config parse_config_text(const std::string& text) {
    std::istringstream is(text);
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return from_tree(tree);
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize(const Config& c) {
    using experiments::format_double;
    const auto& m = c.model;
    const auto& s = c.solver;
    const auto& k = c.scan;
    std::ostringstream os;
    os << "[model]\n"
       << "c=" << format_double(m.c) << "\nH=" << format_double(m.H) << "\nb=" << format_double(m.b)
       << "\nm2=" << format_double(m.m2) << "\np=" << format_double(m.p) << "\nbeta=" << format_double(m.beta)
       << "\nmu=" << format_double(m.mu) << "\nvarsigma=" << format_double(m.varsigma)
       << "\nvarrho=" << format_double(m.varrho) << "\nn=" << m.n << "\nR=" << format_double(m.R) << "\n";
    os << "[solver]\n"
       << "solver=" << s.solver << "\nrho_mode=" << s.rho_mode << "\ndx=" << format_double(s.dx)
       << "\ndt=" << format_double(s.dt) << "\ntol=" << format_double(s.tol) << "\ncap=" << format_double(s.cap)
       << "\nepsilon=" << format_double(s.epsilon) << "\nt_horizon=" << format_double(s.t_horizon)
       << "\nt_end=" << format_double(s.t_end) << "\nsnapshots=" << s.snapshots
       << "\nquad_rel_tol=" << format_double(s.quad_rel_tol) << "\nquad_abs_tol=" << format_double(s.quad_abs_tol) << "\nquad_max_panels=" << s.quad_max_panels
       << "\ndelta=" << format_double(s.delta) << "\n";
    if (s.a0) os << "a0=" << format_double(*s.a0) << "\n";
    os << "b0=" << format_double(s.b0) << "\nB0=" << format_double(s.B0) << "\nD=" << format_double(s.D)
       << "\nBtilde=" << format_double(s.Btilde) << "\njmax=" << s.jmax << "\n";
    os << "[scan]\n"
       << "eps_hi=" << format_double(k.eps_hi) << "\neps_lo=" << format_double(k.eps_lo) << "\npoints=" << k.points
       << "\n";
    if (!k.ladder.empty()) os << "ladder=" << list(k.ladder) << "\n";
    os << "margin=" << format_double(k.margin) << "\n";
    if (k.fit_lo) os << "fit_lo=" << format_double(*k.fit_lo) << "\nfit_hi=" << format_double(*k.fit_hi) << "\n";
    os << "t_max=" << format_double(k.t_max) << "\nhorizon_factor=" << format_double(k.horizon_factor)
       << "\nthreads=" << k.threads << "\nplot=" << (k.plot ? "true" : "false") << "\ngrid_n=" << list(k.grid_n)
       << "\ngrid_p=" << list(k.grid_p) << "\ngrid_b=" << list(k.grid_b) << "\ngrid_m2=" << list(k.grid_m2)
       << "\ngrid_H=" << list(k.grid_H) << "\ngrid_beta=" << list(k.grid_beta) << "\n";
    return os.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string config_hash(const Config& c) { return sha256_hex(serialize(c)); }

experiments::ScanConfig to_scan_config(const Config& c) {
    experiments::ScanConfig s;
    s.params = c.model;
    s.rho_mode = c.solver.rho_mode == "critical" ? semilinear::RhoMode::Critical : semilinear::RhoMode::Explicit;
    if (!c.scan.ladder.empty()) {
        s.ladder = c.scan.ladder;
    } else {
        if (!(c.scan.eps_hi > c.scan.eps_lo && c.scan.eps_lo > 0.0))
            throw ConfigError("scan.eps_hi", "need eps_hi > eps_lo > 0");
        if (c.scan.points == 0) throw ConfigError("scan.points", "must be ≥ 1");
        s.ladder = experiments::geometric_ladder(c.scan.eps_hi, c.scan.eps_lo, c.scan.points);
    }
    s.solver = c.solver.solver == "fd" ? experiments::ScanSolver::Fd : experiments::ScanSolver::Duhamel;
    s.dx = c.solver.dx;
    s.dt = c.solver.dt;
    s.tol = c.solver.tol;
    s.cap_factor = c.solver.cap;
    s.horizon_factor = c.scan.horizon_factor;
    s.t_max = c.scan.t_max;
    if (c.scan.fit_lo) s.fit_window = std::make_pair(*c.scan.fit_lo, *c.scan.fit_hi);
    s.margin = c.scan.margin;
    s.threads = static_cast<unsigned>(c.scan.threads);
    return s;
}

experiments::RegimeGrid to_regime_grid(const Config& c) {
    experiments::RegimeGrid g;
    g.n.clear();
    for (double n : c.scan.grid_n) g.n.push_back(static_cast<int>(n));
    g.p = c.scan.grid_p;
    g.b = c.scan.grid_b;
    g.m2 = c.scan.grid_m2;
    g.H = c.scan.grid_H;
    g.beta = c.scan.grid_beta;
    g.c = c.model.c;
    return g;
}

iteration::IterationConfig to_iteration_config(const Config& c) {
    iteration::IterationConfig ic(Model(c.model), c.solver.delta);
    if (c.solver.a0) ic.a0 = *c.solver.a0;
    ic.b0 = c.solver.b0;
    ic.B0 = c.solver.B0;
    ic.D = c.solver.D;
    ic.Btilde = c.solver.Btilde;
    return ic;
}

linear1d::ExactOptions to_exact_options(const Config& c) {
    linear1d::ExactOptions o;
    o.outer.rel_tol = c.solver.quad_rel_tol;
    o.inner.rel_tol = 1e-2 * c.solver.quad_rel_tol;
    o.outer.abs_tol = c.solver.quad_abs_tol;
    o.inner.abs_tol = 0.1 * c.solver.quad_abs_tol;
    o.outer.max_panels = o.inner.max_panels = c.solver.quad_max_panels;
    return o;
}

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string to_json(const Manifest& m) {
    nlohmann::ordered_json j;
    j["tool_version"] = m.tool_version;
    j["config_hash"] = m.config_hash;
    j["timestamp"] = m.timestamp;
    j["subcommand"] = m.subcommand;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

}  // namespace adswave::config
