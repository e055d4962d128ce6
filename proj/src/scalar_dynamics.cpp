#include "cavidyn/scalar_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cavidyn {

namespace {

constexpr double kNodeZeroTol = 1e-15;  // |F(node)| treated as an exact grid-node root
constexpr double kRootDedupTol = 1e-9;
constexpr double kOrbitMatchTol = 1e-7;
constexpr double kDivisorExclusionTol = 1e-8;

// Bisection inside a bracketing cell followed by a safeguarded Newton polish.
double polish_root(const std::function<double(double)>& F, const std::function<double(double)>& dF,
                   double a, double b) {
    double fa = F(a);
    for (int i = 0; i < 80 && (b - a) > 1e-15; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = F(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    double x = 0.5 * (a + b);
    double best = x;
    double best_res = std::abs(F(x));
    for (int i = 0; i < 8; ++i) {
        const double d = dF(x);
        if (std::abs(d) < 1e-12) break;
        double xn = x - F(x) / d;
        if (!(xn >= 0.0 && xn <= 1.0)) break;
        const double res = std::abs(F(xn));
        if (res < best_res) {
            best = xn;
            best_res = res;
        }
        if (res == 0.0 || std::abs(xn - x) < 1e-17) break;
        x = xn;
    }
    return best;
}

// Roots of F on [0,1]: grid-node zeros plus sign-change cells, deduplicated.
std::vector<double> scan_roots(const std::function<double(double)>& F, const std::function<double(double)>& dF,
                               const std::vector<double>& explicit_roots) {
    const int n = kFixedPointGridCells;
    std::vector<double> nodes(n + 1), vals(n + 1);
    for (int i = 0; i <= n; ++i) {
        nodes[i] = static_cast<double>(i) / n;
        vals[i] = F(nodes[i]);
    }
    std::vector<double> roots = explicit_roots;
    for (int i = 0; i <= n; ++i) {
        if (std::abs(vals[i]) <= kNodeZeroTol) roots.push_back(nodes[i]);
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(vals[i]) <= kNodeZeroTol || std::abs(vals[i + 1]) <= kNodeZeroTol) continue;
        if ((vals[i] < 0.0) != (vals[i + 1] < 0.0)) {
            roots.push_back(polish_root(F, dF, nodes[i], nodes[i + 1]));
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (out.empty() || r - out.back() > kRootDedupTol) out.push_back(r);
    }
    return out;
}

std::vector<double> fixed_points_of_iterate(const Map1D& map, int power) {
    auto F = [&](double x) { return iterate(map, x, power) - x; };
    auto dF = [&](double x) { return iterate_deriv(map, x, power) - 1.0; };
    std::vector<double> explicit_roots;
    if (base_of(map.family) == MapFamily::SigmoidCavi) {
        explicit_roots.push_back(0.5);  // f(1/2) = 1/2 for every beta
    }
    return scan_roots(F, dF, explicit_roots);
}

} // namespace

const char* stability_name(Stability s) {
    switch (s) {
    case Stability::AttractingHyperbolic: return "attracting_hyperbolic";
    case Stability::RepellingHyperbolic: return "repelling_hyperbolic";
    case Stability::NonHyperbolicAsymptoticallyStable: return "nonhyperbolic_asymptotically_stable";
    case Stability::NonHyperbolicUnstable: return "nonhyperbolic_unstable";
    case Stability::NonHyperbolicSemiStableLeft: return "nonhyperbolic_semistable_left";
    case Stability::NonHyperbolicSemiStableRight: return "nonhyperbolic_semistable_right";
    }
    return "?";
}

double schwarzian(const Map1D& map, double x) {
    const double fx = deriv(map, x, DerivOrder::Dx);
    if (std::abs(fx) <= 1e-12) {
        throw DegenerateDerivative("Schwarzian derivative undefined: f_x vanishes");
    }
    const double fxx = deriv(map, x, DerivOrder::Dxx);
    const double fxxx = deriv(map, x, DerivOrder::Dxxx);
    const double r = fxx / fx;
    return fxxx / fx - 1.5 * r * r;
}

FixedPointReport classify_from_derivatives(double location, double f_x, double f_xx, double f_xxx) {
    FixedPointReport rep;
    rep.location = location;
    rep.multiplier = f_x;
    rep.evidence.f_x = f_x;
    if (std::abs(std::abs(f_x) - 1.0) > kHyperbolicityTol) {
        rep.stability = std::abs(f_x) < 1.0 ? Stability::AttractingHyperbolic : Stability::RepellingHyperbolic;
        return rep;
    }
    if (f_x > 0.0) {  // multiplier +1
        rep.evidence.f_xx = f_xx;
        if (std::abs(f_xx) > kHyperbolicityTol) {
            rep.stability = f_xx > 0.0 ? Stability::NonHyperbolicSemiStableLeft
                                       : Stability::NonHyperbolicSemiStableRight;
            return rep;
        }
        rep.evidence.f_xxx = f_xxx;
        if (std::abs(f_xxx) <= kHyperbolicityTol) {
            throw UnresolvedClassification("multiplier +1 with f_xx and f_xxx both ~0");
        }
        rep.stability = f_xxx < 0.0 ? Stability::NonHyperbolicAsymptoticallyStable
                                    : Stability::NonHyperbolicUnstable;
        return rep;
    }
    // multiplier -1: decided by the sign of the Schwarzian derivative
    const double r = f_xx / f_x;
    const double s = f_xxx / f_x - 1.5 * r * r;
    rep.evidence.f_xx = f_xx;
    rep.evidence.f_xxx = f_xxx;
    rep.evidence.schwarzian = s;
    if (std::abs(s) <= kHyperbolicityTol) {
        throw UnresolvedClassification("multiplier -1 with Schwarzian ~0");
    }
    rep.stability = s < 0.0 ? Stability::NonHyperbolicAsymptoticallyStable : Stability::NonHyperbolicUnstable;
    return rep;
}

FixedPointReport classify_fixed_point(const Map1D& map, double x_star) {
    if (std::abs(eval(map, x_star) - x_star) > 1e-10) {
        throw std::domain_error("classify_fixed_point: not a fixed point");
    }
    const double fx = deriv(map, x_star, DerivOrder::Dx);
    const double fxx = deriv(map, x_star, DerivOrder::Dxx);
    const double fxxx = deriv(map, x_star, DerivOrder::Dxxx);
    return classify_from_derivatives(x_star, fx, fxx, fxxx);
}

std::vector<FixedPointReport> find_fixed_points(const Map1D& map) {
    std::vector<FixedPointReport> out;
    for (double r : fixed_points_of_iterate(map, 1)) {
        out.push_back(classify_fixed_point(map, r));
    }
    return out;
}

std::vector<CycleReport> find_cycles(const Map1D& map, int max_period) {
    if (max_period < 1 || max_period > 8) {
        throw std::invalid_argument("find_cycles: max_period must be in [1,8]");
    }
    std::vector<CycleReport> cycles;
    for (int p = 2; p <= max_period; ++p) {
        std::vector<double> candidates;
        for (double r : fixed_points_of_iterate(map, p)) {
            bool lower_period = false;
            for (int d = 1; d < p && !lower_period; ++d) {
                if (p % d != 0) continue;
                if (std::abs(iterate(map, r, d) - r) <= kDivisorExclusionTol) lower_period = true;
            }
            if (!lower_period) candidates.push_back(r);
        }
        std::vector<bool> used(candidates.size(), false);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (used[i]) continue;
            CycleReport cyc;
            cyc.period = p;
            cyc.points.push_back(candidates[i]);
            used[i] = true;
            double x = candidates[i];
            bool complete = true;
            for (int k = 1; k < p; ++k) {
                x = eval(map, x);
                std::size_t match = candidates.size();
                for (std::size_t j = 0; j < candidates.size(); ++j) {
                    if (!used[j] && std::abs(candidates[j] - x) <= kOrbitMatchTol) {
                        match = j;
                        break;
                    }
                }
                if (match == candidates.size()) {
                    complete = false;
                    break;
                }
                used[match] = true;
                cyc.points.push_back(candidates[match]);
            }
            if (!complete) continue;
            cyc.stable = std::abs(iterate_deriv(map, cyc.points.front(), p)) < 1.0;
            cycles.push_back(std::move(cyc));
        }
    }
    return cycles;
}

} // namespace cavidyn
