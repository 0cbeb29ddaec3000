#include "adswave/config.hpp"
#include "adswave/errors.hpp"
#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace adswave;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("adswave_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    return f;
}

}  // namespace

TEST_CASE("minimal config resolves with defaults") {
    const auto c = config::parse_config_text("[model]\nc=1\nH=1\nb=0\nm2=0\np=2\nbeta=0\nn=1\nR=1\n");
    CHECK(c.model.p == 2.0);
    CHECK(c.model.mu == 1.0);
    CHECK(c.solver.solver == "fd");
    CHECK(c.scan.points == 12);
    CHECK(config::config_hash(c) == config::config_hash(config::parse_config_text("")));
}

TEST_CASE("config errors name the key and the constraint") {
    auto message = [](const std::string& text) {
        try {
            config::parse_config_text(text);
        } catch (const config::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[model]\nb=1\nm2=1\n").find("b² ⩾ 4m² violated") != std::string::npos);
    CHECK(message("[model]\nfoo=1\n") == "model.foo: unknown key");
    CHECK(message("[model]\nH=fast\n").find("model.H: expected a number") == 0);
    CHECK(message("[solver]\nsnapshots=2.5\n").find("solver.snapshots") == 0);
    CHECK(message("[solver]\nsolver=rk4\n").find("solver.solver") == 0);
    CHECK(message("[scan]\nplot=maybe\n").find("scan.plot") == 0);
    CHECK(message("[extra]\nx=1\n").find("extra: unknown section") == 0);
    CHECK(message("[scan]\nfit_lo=0.1\n").find("scan.fit_lo") == 0);
    CHECK(message("[model\n").find("malformed config") == 0);
}

TEST_CASE("serialize and re-parse is hash-equal") {
    const std::string text =
        "[model]\nH=0.05\np=3\nb=0.3\nm2=0.01\nvarsigma=-0.1\nvarrho=0.2\nn=3\nR=1.5\n"
        "[solver]\nsolver=duhamel\nrho_mode=explicit\ndx=0.025\ntol=1e-12\ncap=1e8\na0=3\nsnapshots=0\n"
        "[scan]\nladder=1,0.3,0.1\nfit_lo=0.1\nfit_hi=1\nplot=true\ngrid_n=1,5\ngrid_H=0.5,1,2\n";
    const auto a = config::parse_config_text(text);
    const std::string s = config::serialize(a);
    const auto b = config::parse_config_text(s);
    CHECK(config::serialize(b) == s);
    CHECK(config::config_hash(a) == config::config_hash(b));
    CHECK(b.model.H == 0.05);
    CHECK(b.solver.a0.value() == 3.0);
    CHECK(b.scan.ladder == std::vector<double>{1, 0.3, 0.1});
    CHECK(b.scan.grid_H == std::vector<double>{0.5, 1, 2});

    // Values that need all 17 digits survive.
    config::Config c;
    c.model.H = 1.0 / 3.0;
    c.solver.dx = std::nextafter(0.05, 1.0);
    const auto d = config::parse_config_text(config::serialize(c));
    CHECK(d.model.H == c.model.H);
    CHECK(d.solver.dx == c.solver.dx);
    CHECK(config::config_hash(c) != config::config_hash(config::Config{}));
}

TEST_CASE("sha256 test vectors") {
    CHECK(config::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(config::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("usage errors exit 2") {
    const Run none = run({});
    CHECK(none.code == 2);
    CHECK(none.err.find("Usage") != std::string::npos);
    const Run bad = run({"linear", "solve", "--bogus"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("--bogus") != std::string::npos);
    CHECK(bad.err.find("Usage") != std::string::npos);
    CHECK(run({"linear", "solve", "--method", "rk4"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    TempDir tmp;
    const auto cfg = tmp.write("bad.ini", "[model]\nb=1\nm2=1\n");
    const Run inv = run({"regime", "--config", cfg, "--out", tmp.sub("o")});
    CHECK(inv.code == 2);
    CHECK(inv.err.find("b² ⩾ 4m² violated") != std::string::npos);
    CHECK(run({"regime", "--config", tmp.sub("missing.ini")}).code == 2);
    // Outside the backward cone.
    CHECK(run({"kernel", "eval", "--t", "1", "--x", "5", "--out", tmp.sub("k")}).code == 2);
}

TEST_CASE("lifespan scan rejects the double-critical case") {
    TempDir tmp;
    const auto cfg = tmp.write("crit.ini", "[model]\np=2\nvarsigma=-0.5\n");
    const Run r = run({"lifespan", "scan", "--config", cfg, "--out", tmp.sub("o")});
    CHECK(r.code == 2);
    CHECK(r.err.find("ς ⩽ −1/p") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "o" / "records.csv"));
    // Other subcommands accept it.
    CHECK(run({"regime", "--config", cfg, "--out", tmp.sub("r")}).code == 0);
}

TEST_CASE("quadrature failure in linear solve exits 3") {
    TempDir tmp;
    const auto cfg = tmp.write("q.ini", "[solver]\nquad_rel_tol=1e-18\nquad_abs_tol=0\nquad_max_panels=1\n");
    const Run r = run({"linear", "solve", "--config", cfg, "--t-end", "1", "--dx", "0.2", "--out", tmp.sub("o")});
    CHECK(r.code == 3);
    CHECK(r.err.find("achieved error") != std::string::npos);
}

TEST_CASE("lifespan scan writes records, fit, plot and manifest") {
    TempDir tmp;
    const auto cfg = tmp.write("ls.ini",
                               "[model]\nn=1\np=3\nH=0.05\n[scan]\neps_hi=1\neps_lo=0.2\npoints=6\nt_max=200\n");
    const auto out = tmp.sub("o");
    const Run r = run({"lifespan", "scan", "--config", cfg, "--plot", "--out", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("verdict pass") == 0);

    const std::string csv = slurp(fs::path(out) / "records.csv");
    std::stringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    CHECK(header.find("epsilon,t_blowup,detection,solver") == 0);
    std::size_t rows = 0;
    while (std::getline(lines, row)) {
        const auto f = split(row);
        REQUIRE(f.size() == split(header).size());
        // 17 significant digits: re-printing the parsed value reproduces the field.
        CHECK(experiments::format_double(std::strtod(f[1].c_str(), nullptr)) == f[1]);
        ++rows;
    }
    CHECK(rows == 6);

    const auto fit = nlohmann::json::parse(slurp(fs::path(out) / "fit.json"));
    CHECK(fit["verdict"] == "pass");
    CHECK(fit["theoretical_exponent"].get<double>() == doctest::Approx(-6.0));
    CHECK(slurp(fs::path(out) / "plot.svg").rfind("<svg", 0) == 0);

    const auto man = nlohmann::json::parse(slurp(fs::path(out) / "manifest.json"));
    CHECK(man["subcommand"] == "lifespan scan");
    CHECK(man["tool_version"] == config::kToolVersion);
    const auto resolved = config::parse_config((fs::path(out) / "config.resolved.ini").string());
    CHECK(man["config_hash"] == config::config_hash(resolved));
    auto with_flag = config::parse_config(cfg);
    with_flag.scan.plot = true;  // --plot is part of the resolved config
    CHECK(man["config_hash"] == config::config_hash(with_flag));
    CHECK(man["outputs"].size() == 4);
}

TEST_CASE("scan verdict other than pass exits 1") {
    TempDir tmp;
    // Flat case n/2 - nu = 1/p: outside the hypothesis, so inconclusive.
    const auto cfg = tmp.write("f.ini", "[model]\nn=1\np=2\nH=0.05\n[scan]\neps_hi=1\neps_lo=0.5\npoints=4\nt_max=50\n");
    const Run r = run({"lifespan", "scan", "--config", cfg, "--out", tmp.sub("o")});
    CHECK(r.code == 1);
    CHECK(r.out.find("verdict inconclusive") == 0);
}

TEST_CASE("single-run subcommands") {
    TempDir tmp;
    SUBCASE("kernel eval") {
        const Run r = run({"kernel", "eval", "--t", "1", "--x", "0.5", "--out", tmp.sub("k")});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(slurp(tmp.path / "k" / "kernel.json"));
        CHECK(j["E"].get<double>() >= 0.0);
        CHECK(j["K0"].get<double>() >= 0.0);
    }
    SUBCASE("linear solve both") {
        const Run r = run({"linear", "solve", "--t-end", "1", "--dx", "0.1", "--out", tmp.sub("l")});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(slurp(tmp.path / "l" / "linear.json"));
        CHECK(j["relative_max_error"].get<double>() < 1e-2);
        CHECK(slurp(tmp.path / "l" / "linear.csv").rfind("t,x,v_exact,v_fd\n", 0) == 0);
        CHECK(run({"linear", "solve", "--method", "fd", "--t-end", "0.5", "--out", tmp.sub("f")}).code == 0);
        CHECK(slurp(tmp.path / "f" / "linear.csv").rfind("t,x,v\n", 0) == 0);
    }
    SUBCASE("semilinear run") {
        const auto cfg = tmp.write("s.ini", "[model]\np=3\nH=0.05\n");
        const Run r = run({"semilinear", "run", "--config", cfg, "--epsilon", "1", "--t-horizon", "10", "--out",
                           tmp.sub("s")});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(slurp(tmp.path / "s" / "record.json"));
        CHECK(j["detection"] == "cap");
        CHECK(j["t_blowup"].get<double>() < 10.0);
        CHECK(slurp(tmp.path / "s" / "series.csv").rfind("t,V,Lp_p\n", 0) == 0);
        // The override is part of the resolved config.
        CHECK(config::parse_config((tmp.path / "s" / "config.resolved.ini").string()).solver.epsilon == 1.0);
        CHECK(run({"semilinear", "run", "--solver", "duhamel", "--n", "3", "--out", tmp.sub("d")}).code == 2);
    }
    SUBCASE("odi check") {
        const auto p = tmp.write("p.json", R"({"b":1,"m2":0,"q":2,"K":100,"T0":1,"G0":1,"G0p":1})");
        const Run r = run({"odi", "check", "--problem", p, "--out", tmp.sub("o")});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(slurp(tmp.path / "o" / "verdict.json"));
        CHECK(j["K_above_threshold"] == true);
        CHECK(j["bound_satisfied"] == true);
        const auto bad = tmp.write("b.json", R"({"b":1,"gamma":2})");
        CHECK(run({"odi", "check", "--problem", bad, "--out", tmp.sub("o2")}).code == 2);
    }
    SUBCASE("radon of the unit ball") {
        std::string csv = "r,value\n";
        for (int i = 0; i <= 100; ++i) csv += experiments::format_double(i / 100.0) + ",1\n";
        const auto prof = tmp.write("ball.csv", csv);
        const Run r = run({"radon", "--profile", prof, "--n", "3", "--rho-grid", "0:0.9:4", "--out", tmp.sub("r")});
        REQUIRE(r.code == 0);
        std::stringstream lines(slurp(tmp.path / "r" / "radon.csv"));
        std::string line;
        std::getline(lines, line);
        CHECK(line == "rho,R");
        int rows = 0;
        while (std::getline(lines, line)) {
            const auto f = split(line);
            const double rho = std::stod(f[0]);
            CHECK(std::stod(f[1]) == doctest::Approx(M_PI * (1 - rho * rho)).epsilon(1e-8));
            ++rows;
        }
        CHECK(rows == 4);
    }
    SUBCASE("iterate") {
        const auto cfg = tmp.write("i.ini", "[model]\np=3\nH=0.05\n");
        const Run r = run({"iterate", "--config", cfg, "--jmax", "5", "--t", "1000", "--out", tmp.sub("i")});
        REQUIRE(r.code == 0);
        std::stringstream lines(slurp(tmp.path / "i" / "iterate.csv"));
        std::string line;
        std::getline(lines, line);
        CHECK(line == "j,a_j,b_j,lnB_j,sigma_j,logK_j");
        int rows = 0;
        while (std::getline(lines, line)) ++rows;
        CHECK(rows == 6);
        // Outside the hypothesis the frame is not set up.
        CHECK(run({"iterate", "--out", tmp.sub("i2")}).code == 2);
    }
    SUBCASE("regime") {
        const auto cfg = tmp.write("g.ini", "[scan]\ngrid_n=1,2,3\ngrid_b=0,2\n");
        REQUIRE(run({"regime", "--config", cfg, "--out", tmp.sub("g")}).code == 0);
        std::stringstream lines(slurp(tmp.path / "g" / "regime.csv"));
        std::string line;
        int rows = -1;
        while (std::getline(lines, line)) ++rows;
        CHECK(rows == 6);
    }
}
