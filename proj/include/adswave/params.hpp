#pragma once

#include <string>
#include <vector>

namespace adswave {

/// Physical constants of the damped Klein-Gordon model on the expanding
/// background, plus the shape of the nonlinearity and the data support.
struct ModelParams {
    double c = 1.0;        ///< wave-speed scale
    double H = 1.0;        ///< Hubble constant
    double b = 0.0;        ///< damping coefficient
    double m2 = 0.0;       ///< mass squared
    double p = 2.0;        ///< nonlinearity power
    double beta = 0.0;     ///< nonlocal exponent
    double mu = 1.0;       ///< amplitude of the time factor
    double varsigma = 0.0; ///< polynomial exponent of the time factor
    double varrho = 0.0;   ///< exponential rate of the time factor
    int n = 1;             ///< space dimension
    double R = 1.0;        ///< radius of the initial-data support

    /// Returns one message per broken invariant; empty when valid.
    std::vector<std::string> violations() const;
};

enum class RhoBranch { LowDimension, HighDimension };

const char* to_string(RhoBranch b);

/// Quantities derived from a validated ModelParams. Only derive() builds one.
class DerivedParams {
public:
    double alpha1 = 0.0;       ///< larger root of a^2 - b a + m2 = 0
    double alpha2 = 0.0;       ///< smaller root
    double nu = 0.0;           ///< sqrt(b^2 - 4 m2) / (2H)
    double q = 0.0;            ///< (beta + 1) p
    double N_threshold = 0.0;  ///< 2/p + sqrt(b^2 - 4 m2)/H
    double rho_crit = 0.0;
    double sigma_crit = 0.0;   ///< -1/p
    RhoBranch branch = RhoBranch::LowDimension;

    /// n/2 - nu > 1/p, the regime where the blow-up theorem applies.
    bool hypothesis_holds = false;

private:
    DerivedParams() = default;
    friend DerivedParams derive(const ModelParams& params);
};

/// Throws ValidationError listing every violated constraint.
DerivedParams derive(const ModelParams& params);

/// Both parameter blocks together; invariant-checked at construction.
struct Model {
    ModelParams params;
    DerivedParams derived;

    explicit Model(const ModelParams& p) : params(p), derived(derive(p)) {}
};

/// Critical rate for given n; low-dimension branch at n <= N (inclusive).
double rho_crit_low(const ModelParams& p);
double rho_crit_high(const ModelParams& p);

/// Light-cone amplitude A(t) = (c/H)(e^{Ht} - 1).
double amplitude(double t, const ModelParams& p);

/// Inverse of amplitude(); throws std::invalid_argument for sigma < 0.
double amplitude_inv(double sigma, const ModelParams& p);

/// Gamma(t) = mu e^{varrho t} (1+t)^varsigma, using the stored varrho.
double gamma_factor(double t, const ModelParams& p);

/// Exponent e of epsilon in the lifespan bound T <= C eps^e.
/// Throws ValidationError when varsigma <= -1/p.
double lifespan_exponent(const ModelParams& p);

/// For varsigma > 0 two bounds hold at once: -p(q-1) and -(q-1)/varsigma.
/// lifespan_exponent() picks the larger; these return each one.
double lifespan_exponent_flat(const ModelParams& p);
double lifespan_exponent_growth(const ModelParams& p);

}  // namespace adswave
