#pragma once

#include <hornbill/errors.hpp>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hornbill {

/// Accuracy controls shared by every quadrature in the library.
struct QuadratureSettings {
    double rel_tol = 1e-10;
    /// Maximum number of subintervals, initial panels included.
    int max_subdiv = 400;

    void validate() const
    {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) {
            throw DomainError("quadrature rel_tol must lie in (0, 1e-3], got " + std::to_string(rel_tol));
        }
        if (max_subdiv < 8) {
            throw DomainError("quadrature max_subdiv must be >= 8, got " + std::to_string(max_subdiv));
        }
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    int intervals = 0;
};

/**
 * @brief Globally adaptive 21-point Gauss-Kronrod integration over [a, b].
 *
 * Interior @p breakpoints seed the panel list; the panel with the largest
 * error estimate is bisected until the summed estimate meets the tolerance.
 * Throws ConvergenceError when max_subdiv panels are not enough.
 */
template <class F>
[[nodiscard]] QuadratureResult integrate(F&& f, double a, double b, const QuadratureSettings& q,
                                         std::span<const double> breakpoints = {})
{
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    struct Panel {
        double lo;
        double hi;
        double value;
        double error;
        double l1;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    // Kronrod nodes at odd indices are shared with the 10-point Gauss rule.
    auto eval = [&f](double lo, double hi) {
        const auto& x = Kronrod::abscissa();
        const auto& wk = Kronrod::weights();
        const auto& wg = Gauss::weights();
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        const double f0 = f(c);
        double k = f0 * wk[0];
        double g = 0.0;
        double l1 = std::abs(f0) * wk[0];
        for (std::size_t i = 1; i < x.size(); ++i) {
            const double fp = f(c + h * x[i]);
            const double fm = f(c - h * x[i]);
            k += (fp + fm) * wk[i];
            l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
            if (i % 2 == 1) {
                g += (fp + fm) * wg[i / 2];
            }
        }
        return Panel{lo, hi, h * k, std::abs(h * (k - g)), std::abs(h) * l1};
    };

    QuadratureResult out;
    if (a == b) {
        return out;
    }
    std::vector<Panel> heap;
    double lo = a;
    for (double bp : breakpoints) {
        if (bp > lo && bp < b) {
            heap.push_back(eval(lo, bp));
            lo = bp;
        }
    }
    heap.push_back(eval(lo, b));
    std::make_heap(heap.begin(), heap.end());

    auto totals = [&] {
        out.value = 0.0;
        out.error = 0.0;
        out.l1 = 0.0;
        for (const auto& p : heap) {
            out.value += p.value;
            out.error += p.error;
            out.l1 += p.l1;
        }
        out.intervals = static_cast<int>(heap.size());
    };
    auto tolerance = [&] {
        return std::max(q.rel_tol * std::abs(out.value), 128.0 * std::numeric_limits<double>::epsilon() * out.l1);
    };
    totals();
    while (out.error > tolerance() || !std::isfinite(out.value)) {
        if (static_cast<int>(heap.size()) >= q.max_subdiv || !std::isfinite(out.value)) {
            throw ConvergenceError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                                   "]: error " + std::to_string(out.error) + " after " +
                                   std::to_string(heap.size()) + " panels");
        }
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        heap.push_back(eval(worst.lo, mid));
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(eval(mid, worst.hi));
        std::push_heap(heap.begin(), heap.end());
        totals();
    }
    return out;
}

/// Geometric breakpoints x0*2, x0*4, ... below @p upto; resolves features at scale x0.
[[nodiscard]] inline std::vector<double> dyadic_breakpoints(double x0, double upto)
{
    std::vector<double> pts;
    if (!(x0 > 0.0)) {
        return pts;
    }
    for (double x = 2.0 * x0; x < upto; x *= 2.0) {
        pts.push_back(x);
    }
    return pts;
}

} // namespace hornbill
