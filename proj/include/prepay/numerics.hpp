#pragma once

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature, Brent root
// refinement and a Dormand-Prince 5(4) ODE stepper. Everything is templated on
// the callable so the hot loops in the special functions inline.

#include "prepay/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace prepay::numerics {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 500;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452390, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights pair with the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment gauss_kronrod21(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = f_center * kKronrodWeights[10];
    double gauss = 0.0;
    double abs_sum = std::abs(kronrod);
    std::array<double, 10> f_left{};
    std::array<double, 10> f_right{};
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kKronrodNodes[j];
        f_left[j] = f(center - dx);
        f_right[j] = f(center + dx);
        const double pair = f_left[j] + f_right[j];
        kronrod += kKronrodWeights[j] * pair;
        abs_sum += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[10] * std::abs(f_center - mean);
    for (std::size_t j = 0; j < 10; ++j) {
        asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
    }
    asc *= std::abs(half);
    abs_sum *= std::abs(half);
    const double value = kronrod * half;
    double error = std::abs((kronrod - gauss) * half);
    // QUADPACK error scaling: trusts the Kronrod result more than |K - G| on smooth panels.
    if (asc != 0.0 && error != 0.0) {
        error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
        error = std::max(50.0 * eps * abs_sum, error);
    }
    return {a, b, value, error};
}

}  // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod quadrature on a finite interval.
///
/// Bisects the segment with the largest error estimate until the summed estimate
/// drops below max(rel_tol * |value|, abs_tol). Integrable endpoint singularities
/// are handled by repeated bisection (the nodes never touch the endpoints).
/// Throws QuadratureError carrying the best estimate when the subdivision limit is hit.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("integrate_adaptive: need finite a < b");
    }
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gauss_kronrod21(f, a, b));
    double total = heap.top().value;
    double total_error = heap.top().error;
    int evaluations = 21;
    int subdivisions = 0;
    while (total_error > std::max(opts.rel_tol * std::abs(total), opts.abs_tol)) {
        if (subdivisions >= opts.max_subdivisions) {
            throw QuadratureError("integrate_adaptive: subdivision limit reached on [" +
                                      std::to_string(a) + ", " + std::to_string(b) + "]",
                                  total, total_error);
        }
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            throw QuadratureError("integrate_adaptive: interval collapsed near " +
                                      std::to_string(mid),
                                  total, total_error);
        }
        const detail::Segment left = detail::gauss_kronrod21(f, worst.a, mid);
        const detail::Segment right = detail::gauss_kronrod21(f, mid, worst.b);
        evaluations += 42;
        ++subdivisions;
        heap.push(left);
        heap.push(right);
        // Re-sum from the heap periodically to keep cancellation drift out of the totals.
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        if (subdivisions % 32 == 0) {
            auto copy = heap;
            total = 0.0;
            total_error = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_error += copy.top().error;
                copy.pop();
            }
        }
    }
    // Final summation in ascending magnitude order.
    std::vector<double> parts;
    parts.reserve(heap.size());
    double err = 0.0;
    while (!heap.empty()) {
        parts.push_back(heap.top().value);
        err += heap.top().error;
        heap.pop();
    }
    std::sort(parts.begin(), parts.end(),
              [](double x, double y) { return std::abs(x) < std::abs(y); });
    double sum = 0.0;
    for (double v : parts) sum += v;
    return {sum, err, evaluations};
}

/// Integral over [a, inf) by consecutive panels of width `panel`.
///
/// `tail_bound(x)` must return a certified upper bound on |integral over [x, inf)|;
/// panels are added until that bound falls below tail_tol * |accumulated value|.
template <typename F, typename Bound>
QuadratureResult integrate_to_infinity(F&& f, double a, double panel, Bound&& tail_bound,
                                       double tail_tol, const QuadratureOptions& opts = {},
                                       int max_panels = 4000) {
    QuadratureResult acc{0.0, 0.0, 0};
    double lo = a;
    for (int i = 0; i < max_panels; ++i) {
        const double hi = lo + panel;
        const QuadratureResult part = integrate_adaptive(f, lo, hi, opts);
        acc.value += part.value;
        acc.error_estimate += part.error_estimate;
        acc.evaluations += part.evaluations;
        const double bound = tail_bound(hi);
        if (bound <= tail_tol * std::abs(acc.value) || bound == 0.0) {
            acc.error_estimate += bound;
            return acc;
        }
        lo = hi;
    }
    throw QuadratureError("integrate_to_infinity: tail bound never met", acc.value,
                          acc.error_estimate);
}

/// Brent's method. Requires f(lo) and f(hi) of opposite sign; never evaluates outside
/// [lo, hi]. Stops when the bracket is narrower than tol * max(scale_floor, |r|) or
/// f(r) == 0. Pass scale_floor = 0 for a purely relative width.
template <typename F>
double find_root_bracketed(F&& f, double lo, double hi, double tol, double scale_floor = 1.0,
                           std::vector<double>* trace = nullptr, int max_iter = 200) {
    double a = lo;
    double b = hi;
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!((fa < 0.0) != (fb < 0.0))) {
        throw InvalidBracketError("find_root_bracketed: f(lo) and f(hi) have the same sign");
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    std::vector<double> history;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 =
            std::max(0.5 * tol * std::max(scale_floor, std::abs(b)), 2.0 * std::numeric_limits<double>::denorm_min());
        const double xm = 0.5 * (c - b);
        history.push_back(b);
        if (trace) trace->push_back(b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::abs(d) > tol1) {
            b += d;
        } else {
            b += (xm > 0.0 ? tol1 : -tol1);
        }
        // Keep the iterate inside the original bracket whatever rounding does.
        b = std::clamp(b, std::min(lo, hi), std::max(lo, hi));
        fb = f(b);
    }
    throw ConvergenceError("find_root_bracketed: iteration limit reached", history);
}

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
struct OdeTrajectory {
    std::vector<double> x;
    std::vector<OdeState<N>> y;
    bool stopped_by_event = false;
    int rejected_steps = 0;

    [[nodiscard]] double x_end() const { return x.back(); }
    [[nodiscard]] const OdeState<N>& y_end() const { return y.back(); }
};

struct OdeOptions {
    double tol = 1e-10;
    double initial_step = 0.0;  // 0 picks a step from the interval length
    double max_step = std::numeric_limits<double>::infinity();
    bool record_steps = true;
};

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(x, y) from x0 to x_end.
///
/// The local error per step is held below tol * (1 + |y|) componentwise.
/// `stop(x, y)` is called after every accepted step; returning true ends the run
/// with stopped_by_event set. Throws StepUnderflowError if the step collapses.
template <std::size_t N, typename Rhs, typename Stop>
OdeTrajectory<N> ode_integrate(Rhs&& rhs, double x0, OdeState<N> y0, double x_end,
                               const OdeOptions& opts, Stop&& stop) {
    constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                     a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                     a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                     b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                     e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const double direction = x_end >= x0 ? 1.0 : -1.0;
    const double span = std::abs(x_end - x0);
    double h = opts.initial_step > 0.0 ? opts.initial_step : span * 1e-3;
    h = std::min({h, opts.max_step, span});

    OdeTrajectory<N> out;
    out.x.push_back(x0);
    out.y.push_back(y0);

    auto axpy = [](const OdeState<N>& y, std::initializer_list<std::pair<double, const OdeState<N>*>> terms,
                   double step) {
        OdeState<N> r = y;
        for (const auto& [w, k] : terms) {
            if (w == 0.0) continue;
            for (std::size_t i = 0; i < N; ++i) r[i] += step * w * (*k)[i];
        }
        return r;
    };

    double x = x0;
    OdeState<N> y = y0;
    OdeState<N> k1 = rhs(x, y);
    while (direction * (x_end - x) > 0.0) {
        h = std::min(h, std::abs(x_end - x));
        const double hs = direction * h;
        if (x + hs == x) {
            throw StepUnderflowError("ode_integrate: step size underflow at x = " + std::to_string(x), x);
        }
        const OdeState<N> k2 = rhs(x + c2 * hs, axpy(y, {{a21, &k1}}, hs));
        const OdeState<N> k3 = rhs(x + c3 * hs, axpy(y, {{a31, &k1}, {a32, &k2}}, hs));
        const OdeState<N> k4 = rhs(x + c4 * hs, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, hs));
        const OdeState<N> k5 =
            rhs(x + c5 * hs, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, hs));
        const OdeState<N> k6 = rhs(
            x + hs, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, hs));
        const OdeState<N> y_new =
            axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, hs);
        const OdeState<N> k7 = rhs(x + hs, y_new);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei =
                hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale = opts.tol * (1.0 + std::max(std::abs(y[i]), std::abs(y_new[i])));
            err = std::max(err, std::abs(ei) / scale);
            finite = finite && std::isfinite(y_new[i]);
        }
        if (!finite) err = 1e10;

        if (err <= 1.0) {
            x += hs;
            y = y_new;
            k1 = k7;
            if (opts.record_steps) {
                out.x.push_back(x);
                out.y.push_back(y);
            }
            if (stop(x, y)) {
                out.stopped_by_event = true;
                break;
            }
            const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
            h = std::min(h * grow, opts.max_step);
        } else {
            ++out.rejected_steps;
            h *= std::max(0.1, 0.9 * std::pow(err, -0.25));
        }
    }
    if (!opts.record_steps) {
        out.x.push_back(x);
        out.y.push_back(y);
    }
    return out;
}

template <std::size_t N, typename Rhs>
OdeTrajectory<N> ode_integrate(Rhs&& rhs, double x0, OdeState<N> y0, double x_end,
                               const OdeOptions& opts = {}) {
    return ode_integrate<N>(std::forward<Rhs>(rhs), x0, y0, x_end, opts,
                            [](double, const OdeState<N>&) { return false; });
}

}  // namespace prepay::numerics
