#pragma once

#include "adswave/errors.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

namespace adswave::quad {

/// 16-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
    std::array<double, 16> nodes;
    std::array<double, 16> weights;
};

const GaussLegendre16& gl16();

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-15;
    int max_depth = 40;
    std::size_t max_panels = 20000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;  ///< sum of accepted panel-difference estimates
    std::size_t panels = 0;
};

template <class F>
double panel(F& f, double a, double b) {
    const auto& r = gl16();
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += r.weights[i] * f(m + h * r.nodes[i]);
    return h * s;
}

/// Composite 16-point Gauss-Legendre with dyadic refinement. A panel is
/// accepted when it agrees with the sum of its two halves to within its
/// share of the global tolerance. Breakpoints split the initial partition,
/// so kinks at known locations are never straddled. Throws NumericalError
/// carrying the achieved estimate when the panel budget runs out.
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
    Result res;
    if (breaks.size() < 2) return res;
    const double a0 = breaks.front(), b0 = breaks.back();
    const double width = b0 - a0;
    if (!(width > 0)) return res;

    struct Item {
        double a, b, whole;
        int depth;
    };
    std::vector<Item> stack;
    double coarse = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (!(b > a)) continue;
        const double w = panel(f, a, b);
        coarse += std::abs(w);
        stack.push_back({a, b, w, 0});
    }
    bool exhausted = false;
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        const double m = 0.5 * (it.a + it.b);
        const double l = panel(f, it.a, m);
        const double r = panel(f, m, it.b);
        const double diff = std::abs(l + r - it.whole);
        const double scale = std::max(coarse, std::abs(l) + std::abs(r));
        const double budget =
            std::max(opt.abs_tol, opt.rel_tol * scale) * std::max((it.b - it.a) / width, 1e-3);
        ++res.panels;
        if (diff <= budget || it.depth >= opt.max_depth || res.panels >= opt.max_panels) {
            if (diff > budget) exhausted = true;
            res.value += l + r;
            res.error += diff;
            continue;
        }
        stack.push_back({m, it.b, r, it.depth + 1});
        stack.push_back({it.a, m, l, it.depth + 1});
    }
    if (exhausted) {
        const double rel = res.error / std::max(std::abs(res.value), 1e-300);
        if (rel > 1e3 * opt.rel_tol && res.error > opt.abs_tol * 1e3) {
            std::ostringstream os;
            os << "quadrature did not converge: achieved error " << res.error << " (relative "
               << rel << ") on [" << a0 << ", " << b0 << "]";
            throw NumericalError(os.str(), res.error);
        }
    }
    return res;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const double br[2] = {a, b};
    return integrate(f, std::span<const double>(br, 2), opt);
}

}  // namespace adswave::quad
