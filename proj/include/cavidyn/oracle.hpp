#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cavidyn::oracle {

/// Uniform inclusive grid on [lo, hi].
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    int points = 2;
};

inline constexpr double kDefaultPeriodTol = 1e-8;
inline constexpr int kDefaultPeriodWindow = 64;

/// Default step sizes balancing truncation against round-off for the smooth
/// maps in this toolkit: 1e-4 for orders 1-2, 1e-3 for order 3.
double fd_default_h(int order);

/// Central finite-difference derivative: 5-point stencil for orders 1-2,
/// 7-point for order 3. Throws std::domain_error when the stencil would leave
/// [domain_lo, domain_hi].
double fd_derivative(const std::function<double(double)>& f, double x, int order, double h,
                     double domain_lo = -std::numeric_limits<double>::infinity(),
                     double domain_hi = std::numeric_limits<double>::infinity());

/// Smallest period p <= window/2 such that all post-burn-in iterates in the
/// window satisfy dist(s[k+p], s[k]) < tol; nullopt when none does.
template <class State, class Step, class Dist>
std::optional<int> long_run_period(Step step, State s0, int burn_in, int window, double tol, Dist dist) {
    if (window < 2 || burn_in < window) {
        throw std::invalid_argument("long_run_period: need burn_in >= window >= 2");
    }
    State s = s0;
    for (int i = 0; i < burn_in; ++i) s = step(s);
    std::vector<State> w;
    w.reserve(window);
    for (int i = 0; i < window; ++i) {
        w.push_back(s);
        s = step(s);
    }
    for (int p = 1; p <= window / 2; ++p) {
        bool ok = true;
        for (int k = 0; k + p < window && ok; ++k) {
            if (!(dist(w[k + p], w[k]) < tol)) ok = false;
        }
        if (ok) return p;
    }
    return std::nullopt;
}

inline std::optional<int> long_run_period(const std::function<double(double)>& step, double s0,
                                          int burn_in, int window = kDefaultPeriodWindow,
                                          double tol = kDefaultPeriodTol) {
    return long_run_period(step, s0, burn_in, window, tol,
                           [](double a, double b) { return std::abs(a - b); });
}

/// Exhaustive scan over the product grid (total size capped at 1e8 points);
/// ties broken toward the lexicographically smaller point.
std::pair<std::vector<double>, double> grid_minimize(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<GridSpec>& specs);

} // namespace cavidyn::oracle
