#pragma once

#include "adswave/experiments.hpp"
#include "adswave/iteration.hpp"
#include "adswave/linear1d.hpp"
#include "adswave/params.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adswave::config {

/// Bad configuration input; `key` is the dotted path (section.key) or the
/// section name, empty for file-level problems.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct SolverSection {
    std::string solver = "fd";         ///< fd | duhamel
    std::string rho_mode = "critical"; ///< critical | explicit
    double dx = 0.05;
    double dt = 0.08;
    double tol = 1e-10;
    double cap = 1e6;
    double epsilon = 0.1;
    double t_horizon = 4.0;
    double t_end = 1.0;
    std::size_t snapshots = 20;
    /// Kernel-formula quadrature (outer integral; the inner one is 100x tighter).
    double quad_rel_tol = 1e-9;
    double quad_abs_tol = 1e-15;
    std::size_t quad_max_panels = 20000;
    // Iteration frame constants.
    double delta = 0.75;
    std::optional<double> a0;
    double b0 = 1.0, B0 = 1.0, D = 1.0, Btilde = 1.0;
    int jmax = 20;
};

struct ScanSection {
    double eps_hi = 1e-1, eps_lo = 1e-3;
    std::size_t points = 12;
    /// Explicit ladder; overrides eps_hi/eps_lo/points when non-empty.
    std::vector<double> ladder;
    double margin = 0.15;
    std::optional<double> fit_lo, fit_hi;
    double t_max = 100.0;
    double horizon_factor = 4.0;
    std::size_t threads = 0;
    bool plot = false;
    // Regime grid (comma-separated lists).
    std::vector<double> grid_n{1, 2, 3, 4}, grid_p{2}, grid_b{0}, grid_m2{0}, grid_H{1}, grid_beta{0};
};

struct Config {
    ModelParams model;
    SolverSection solver;
    ScanSection scan;
};

/// Reads [model], [solver] and [scan] sections; every key is optional and
/// unknown sections or keys are errors. Validates the model invariants.
Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text);

/// Canonical INI text of the fully resolved config; parse_config_text
/// of the result reproduces the config exactly.
std::string serialize(const Config& c);

/// Lowercase hex SHA-256 of serialize(c).
std::string config_hash(const Config& c);

std::string sha256_hex(const std::string& data);

experiments::ScanConfig to_scan_config(const Config& c);
experiments::RegimeGrid to_regime_grid(const Config& c);
iteration::IterationConfig to_iteration_config(const Config& c);
linear1d::ExactOptions to_exact_options(const Config& c);

struct Manifest {
    std::string tool_version;
    std::string config_hash;
    std::string timestamp;  ///< UTC, ISO 8601
    std::string subcommand;
    std::vector<std::string> outputs;
};

std::string now_utc();
std::string to_json(const Manifest& m);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace adswave::config
