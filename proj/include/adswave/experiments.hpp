#pragma once

#include "adswave/params.hpp"
#include "adswave/semilinear.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adswave::experiments {

/// Worker count: ADSWAVE_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs fn(0..count-1) on up to `threads` workers pulling indices from a
/// shared counter. Results must be written by index; the first exception
/// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads);

/// hi, hi r, ..., lo: points geometric values, strictly decreasing.
std::vector<double> geometric_ladder(double hi, double lo, std::size_t points);

enum class ScanSolver { Fd, Duhamel };

const char* to_string(ScanSolver s);

struct ScanConfig {
    ModelParams params;
    semilinear::RhoMode rho_mode = semilinear::RhoMode::Critical;
    std::vector<double> ladder = geometric_ladder(1e-1, 1e-3, 12);
    ScanSolver solver = ScanSolver::Fd;
    /// FD grid spacing, Duhamel base step and Picard tolerance.
    double dx = 0.05;
    double dt = 0.08;
    double tol = 1e-10;
    double cap_factor = 1e6;
    /// Per-run horizon: min(horizon_factor T0(eps), t_max), or t_max when T0 is unavailable.
    double horizon_factor = 4.0;
    double t_max = 100.0;
    /// Records with eps outside [lo, hi] are kept but not fitted.
    std::optional<std::pair<double, double>> fit_window;
    double margin = 0.15;
    unsigned threads = 0;  ///< 0 means worker_count()

    /// Ladder must be strictly decreasing and positive. Short ladders are
    /// allowed; the CLI warns below 6 points.
    std::vector<std::string> violations() const;
};

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct Fit {
    std::size_t used = 0, excluded_infinite = 0, outside_window = 0;
    double slope = 0.0, intercept = 0.0, rms = 0.0;
    double theoretical_exponent = 0.0;
    /// Both candidate rates when varsigma > 0 (otherwise both equal the exponent).
    double exponent_flat = 0.0, exponent_growth = 0.0;
    /// Envelope constant for t <= C eps^e, anchored on the fitted line at the
    /// largest fitted eps widened by three rms residuals.
    double C = 0.0;
    double C_flat = 0.0, C_growth = 0.0;
    bool slope_ok = false, envelope_ok = false;
    Verdict verdict = Verdict::Inconclusive;
    std::string reason;
};

struct Regime {
    bool hypothesis_holds = false;
    bool critical = false;
    RhoBranch branch = RhoBranch::LowDimension;
    double rho_used = 0.0;
    double rho_crit = 0.0;
};

struct ScanResult {
    std::vector<semilinear::LifespanRecord> records;
    std::vector<double> horizons;
    Fit fit;
    Regime regime;
};

/// Least-squares fit of ln t against ln eps over finite records inside the
/// window, and the one-sided verdict. Fewer than 4 points is inconclusive.
Fit fit_lifespan(const std::vector<semilinear::LifespanRecord>& records, const ModelParams& p,
                 const std::optional<std::pair<double, double>>& window, double margin);

/// One blow-up run per ladder entry (n = 1 data for Duhamel, radial bumps
/// for FD), executed in parallel with records kept in ladder order.
/// Throws ValidationError for a bad ladder or varsigma <= -1/p.
ScanResult lifespan_scan(const ScanConfig& cfg);

struct RegimeGrid {
    std::vector<int> n{1, 2, 3, 4};
    std::vector<double> p{2.0};
    std::vector<double> b{0.0};
    std::vector<double> m2{0.0};
    std::vector<double> H{1.0};
    std::vector<double> beta{0.0};
    double c = 1.0;
};

struct RegimeRow {
    int n = 1;
    double p = 0, b = 0, m2 = 0, H = 0, beta = 0;
    bool valid = false;
    std::string error;
    double N_threshold = 0.0, nu = 0.0, rho_crit = 0.0, rho_low = 0.0, rho_high = 0.0, sigma_crit = 0.0;
    RhoBranch branch = RhoBranch::LowDimension;
    bool hypothesis_holds = false;
};

/// Cartesian product in the order n, p, b, m2, H, beta (last varies fastest).
std::vector<RegimeRow> regime_scan(const RegimeGrid& grid);

/// %.17g, which round-trips every double; "inf", "-inf" or "nan" otherwise.
std::string format_double(double x);

void write_records_csv(std::ostream& os, const ScanResult& r);
void write_fit_json(std::ostream& os, const ScanResult& r, const ScanConfig& cfg);
void write_plot_svg(std::ostream& os, const ScanResult& r);
void write_regime_csv(std::ostream& os, const std::vector<RegimeRow>& rows);

}  // namespace adswave::experiments
