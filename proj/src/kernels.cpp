#include "adswave/kernels.hpp"

#include "adswave/errors.hpp"
#include "adswave/hypfun.hpp"

#include <cmath>
#include <sstream>

namespace adswave::kernels {

KernelContext::KernelContext(const Model& m)
    : c(m.params.c),
      H(m.params.H),
      b(m.params.b),
      nu(m.derived.nu),
      ch(m.params.c / m.params.H),
      a(0.5 - m.derived.nu),
      log_pref(-std::log(m.params.H) - 2.0 * m.derived.nu * std::log(2.0 * m.params.c / m.params.H)) {}

KernelPoint KernelPoint::make(const KernelContext& k, double t, double x, double s, double z) {
    if (!(s >= 0 && s <= t)) {
        std::ostringstream os;
        os << "kernel point needs 0 <= s <= t (s=" << s << ", t=" << t << ")";
        throw ConeError(os.str());
    }
    KernelPoint pt;
    pt.t = t;
    pt.x = x;
    pt.s = s;
    pt.z = z;
    pt.eht = std::exp(k.H * t);
    pt.ehs = std::exp(k.H * s);
    const double width = k.ch * (pt.eht - pt.ehs);
    double d = std::abs(x - z);
    if (d > width) {
        const double amp = k.ch * std::expm1(k.H * t);
        if (d > width + 1e-12 * amp) {
            std::ostringstream os;
            os << "point outside the backward cone: |x-z|=" << d << " > " << width;
            throw ConeError(os.str());
        }
        d = width;
    }
    pt.d2 = d * d;
    const double span = k.ch * (pt.eht + pt.ehs);
    pt.base = (span - d) * (span + d);
    const double num = (width - d) * (width + d);
    const double zmax = std::pow((pt.eht - pt.ehs) / (pt.eht + pt.ehs), 2);
    pt.zeta = std::min(std::max(num / pt.base, 0.0), zmax);
    return pt;
}

double zeta_arg(const KernelPoint& pt) { return pt.zeta; }

double kernel_E(const KernelContext& k, const KernelPoint& pt) {
    const double expo = k.log_pref - (0.5 * k.b + k.nu * k.H) * pt.t +
                        (0.5 * k.b - k.nu * k.H) * pt.s + (k.nu - 0.5) * std::log(pt.base);
    return std::exp(expo) * hypfun::hyp2f1({k.a, 1.0, pt.zeta});
}

namespace {

struct SourceTimeTerms {
    double lead;   // prefactor times the t-dependent exponential
    double cal;    // remaining s-dependent factor, E = lead * cal
    double dcal;   // its s-derivative
};

SourceTimeTerms source_time_terms(const KernelContext& k, const KernelPoint& pt) {
    const double u = pt.eht, w = pt.ehs;
    SourceTimeTerms r;
    r.lead = std::exp(k.log_pref - (0.5 * k.b + k.nu * k.H) * pt.t);
    const double shape = std::exp((0.5 * k.b - k.nu * k.H) * pt.s + (k.nu - 0.5) * std::log(pt.base));
    r.cal = shape * hypfun::hyp2f1({k.a, 1.0, pt.zeta});

    r.dcal = (0.5 * k.b - k.nu * k.H) * r.cal;
    r.dcal += (2.0 * k.nu - 1.0) * k.H * k.ch * k.ch * (u + w) * w / pt.base * r.cal;
    if (k.a != 0.0) {
        const double dzeta = 4.0 * (k.c * k.c / k.H) * u * w *
                             (pt.d2 + k.ch * k.ch * (w * w - u * u)) / (pt.base * pt.base);
        r.dcal += shape * hypfun::hyp2f1_deriv({k.a, 1.0, pt.zeta}) * dzeta;
    }
    return r;
}

}  // namespace

double kernel_dE_ds(const KernelContext& k, const KernelPoint& pt) {
    const auto r = source_time_terms(k, pt);
    return r.lead * r.dcal;
}

double kernel_K1(const KernelContext& k, double t, double x, double z) {
    return kernel_E(k, KernelPoint::make(k, t, x, 0.0, z));
}

double kernel_K0(const KernelContext& k, double t, double x, double z) {
    const auto r = source_time_terms(k, KernelPoint::make(k, t, x, 0.0, z));
    return r.lead * (k.b * r.cal - r.dcal);
}

DataKernels kernel_K0_K1(const KernelContext& k, double t, double x, double z) {
    const auto r = source_time_terms(k, KernelPoint::make(k, t, x, 0.0, z));
    return {r.lead * (k.b * r.cal - r.dcal), r.lead * r.cal};
}

}  // namespace adswave::kernels
