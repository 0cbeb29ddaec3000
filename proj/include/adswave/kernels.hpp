#pragma once

#include "adswave/params.hpp"

namespace adswave::kernels {

/// Per-parameter-set constants reused by every kernel evaluation.
struct KernelContext {
    double c, H, b, nu;
    double ch;         ///< c/H
    double a;          ///< 1/2 - nu, upper hypergeometric parameter
    double log_pref;   ///< ln[(1/H)(2c/H)^{-2nu}]

    explicit KernelContext(const Model& m);
};

/// One observation/source pair (t, x; s, z) with its cone geometry cached.
struct KernelPoint {
    double t = 0, x = 0, s = 0, z = 0;
    double eht = 1, ehs = 1;  ///< e^{Ht}, e^{Hs}
    double d2 = 0;            ///< (x - z)^2 after clamping to the cone
    double base = 0;          ///< ((c/H)(e^{Ht}+e^{Hs}))^2 - (x-z)^2
    double zeta = 0;

    /// Throws ConeError unless |x - z| <= A(t) - A(s) up to 1e-12 A(t).
    static KernelPoint make(const KernelContext& k, double t, double x, double s, double z);
};

double zeta_arg(const KernelPoint& pt);

double kernel_E(const KernelContext& k, const KernelPoint& pt);

/// Analytic derivative of E in the source time s.
double kernel_dE_ds(const KernelContext& k, const KernelPoint& pt);

double kernel_K1(const KernelContext& k, double t, double x, double z);

double kernel_K0(const KernelContext& k, double t, double x, double z);

struct DataKernels {
    double K0, K1;
};

/// Both data kernels from one hypergeometric evaluation.
DataKernels kernel_K0_K1(const KernelContext& k, double t, double x, double z);

}  // namespace adswave::kernels
