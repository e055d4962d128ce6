#include "cavidyn/oracle.hpp"

namespace cavidyn::oracle {

double fd_default_h(int order) { return order == 3 ? 1e-3 : 1e-4; }

double fd_derivative(const std::function<double(double)>& f, double x, int order, double h,
                     double domain_lo, double domain_hi) {
    if (order < 1 || order > 3) throw std::invalid_argument("fd_derivative: order must be 1, 2 or 3");
    if (!(h > 0.0)) throw std::invalid_argument("fd_derivative: h must be positive");
    const int reach = order == 3 ? 3 : 2;
    if (x - reach * h < domain_lo || x + reach * h > domain_hi) {
        throw std::domain_error("fd_derivative: stencil leaves the function's domain");
    }
    switch (order) {
    case 1:
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
    case 2:
        return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) /
               (12 * h * h);
    default:
        return (f(x - 3 * h) - 8 * f(x - 2 * h) + 13 * f(x - h) - 13 * f(x + h) + 8 * f(x + 2 * h) -
                f(x + 3 * h)) /
               (8 * h * h * h);
    }
}

std::pair<std::vector<double>, double> grid_minimize(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<GridSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("grid_minimize: no grid specs");
    long long total = 1;
    for (const auto& s : specs) {
        if (!(s.lo < s.hi) || s.points < 2) {
            throw std::invalid_argument("grid_minimize: need lo < hi and points >= 2");
        }
        total *= s.points;
        if (total > 100'000'000LL) {
            throw std::length_error("grid_minimize: grid exceeds 1e8 points");
        }
    }
    const std::size_t dim = specs.size();
    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim), best_x(dim);
    double best = std::numeric_limits<double>::infinity();
    auto coord = [&](std::size_t d) {
        const auto& s = specs[d];
        return s.lo + (s.hi - s.lo) * idx[d] / (s.points - 1);
    };
    for (std::size_t d = 0; d < dim; ++d) x[d] = coord(d);
    for (long long it = 0; it < total; ++it) {
        const double v = f(x);
        if (v < best) {  // strict: first (lexicographically smallest) minimizer wins
            best = v;
            best_x = x;
        }
        // odometer, last dimension fastest
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < specs[d].points) {
                x[d] = coord(d);
                break;
            }
            idx[d] = 0;
            x[d] = coord(d);
        }
    }
    return {best_x, best};
}

} // namespace cavidyn::oracle
