#include "cavidyn/bifurcation.hpp"

#include "cavidyn/scalar_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace cavidyn {

namespace {

constexpr double kAttractorDedupTol = 1e-6;

BifurcationCondition make_eq(const std::string& name, double value) {
    return {name, value, kBifEqualityTol, std::abs(value) <= kBifEqualityTol};
}

BifurcationCondition make_nonzero(const std::string& name, double value) {
    return {name, value, kBifNonzeroTol, std::abs(value) > kBifNonzeroTol};
}

void require_fixed_point(const Map1D& map, double x_star) {
    if (std::abs(eval(map, x_star) - x_star) > 1e-10) {
        throw NotAFixedPoint("bifurcation check: x_star is not a fixed point at alpha_star");
    }
}

Verdict settle(BifurcationCheck& check) {
    check.verdict = Verdict::Confirmed;
    for (const auto& c : check.conditions) {
        if (!c.satisfied) check.verdict = Verdict::Rejected;
    }
    return check.verdict;
}

// Newton on f - id from the guess; nullopt when it stalls or wanders.
std::optional<double> newton_fixed_point(const Map1D& map, double guess) {
    double x = std::clamp(guess, 0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double r = eval(map, x) - x;
        if (std::abs(r) <= kFixedPointResidualTol) return x;
        const double d = deriv(map, x, DerivOrder::Dx) - 1.0;
        if (std::abs(d) < 1e-12) return std::nullopt;
        const double xn = std::clamp(x - r / d, 0.0, 1.0);
        if (std::abs(xn - x) < 1e-17) {
            return std::abs(eval(map, xn) - xn) <= 1e-10 ? std::optional<double>(xn) : std::nullopt;
        }
        x = xn;
    }
    return std::nullopt;
}

// Re-solve the branch's fixed point at a nearby parameter value. Near a
// second-iterate pitchfork the roots of f^2 - id cluster and its Newton turns
// singular, while the persistent branch is a fixed point of the base map with
// a well-conditioned Newton; prefer that route when it stays local.
double continue_branch(MapFamily family, double alpha, double guess) {
    if (is_second_iterate(family)) {
        if (auto xb = newton_fixed_point(Map1D{base_of(family), alpha}, guess);
            xb && std::abs(*xb - guess) <= 0.05) {
            return *xb;
        }
    }
    const Map1D map{family, alpha};
    if (auto x = newton_fixed_point(map, guess); x && std::abs(*x - guess) <= 0.05) return *x;
    // bracket around the guess and bisect
    auto F = [&](double x) { return eval(map, x) - x; };
    double lo = std::clamp(guess - 1e-3, 0.0, 1.0);
    double hi = std::clamp(guess + 1e-3, 0.0, 1.0);
    for (int grow = 0; grow < 12 && (F(lo) < 0.0) == (F(hi) < 0.0); ++grow) {
        lo = std::clamp(guess - (hi - guess) * 2.0, 0.0, 1.0);
        hi = std::clamp(guess + (hi - guess) * 2.0, 0.0, 1.0);
    }
    double flo = F(lo);
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (lo + hi);
        const double fm = F(m);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

struct CrossingEvent {
    double alpha = 0.0;
    double x = 0.0;
    double multiplier = 0.0;
};

} // namespace

const char* kind_name(BifurcationKind k) {
    return k == BifurcationKind::Pitchfork ? "pitchfork" : "period_doubling";
}

const char* verdict_name(Verdict v) { return v == Verdict::Confirmed ? "confirmed" : "rejected"; }

const char* criticality_name(Criticality c) {
    switch (c) {
    case Criticality::SuperCritical: return "super_critical";
    case Criticality::SubCritical: return "sub_critical";
    case Criticality::NotApplicable: return "not_applicable";
    }
    return "?";
}

BifurcationCheck check_pitchfork(const Map1D& map, double x_star, double alpha_star) {
    const Map1D at{map.family, alpha_star};
    require_fixed_point(at, x_star);
    BifurcationCheck check;
    check.kind = BifurcationKind::Pitchfork;
    check.x_star = x_star;
    check.alpha_star = alpha_star;
    const double fx = deriv(at, x_star, DerivOrder::Dx);
    const double fxx = deriv(at, x_star, DerivOrder::Dxx);
    const double fxxx = deriv(at, x_star, DerivOrder::Dxxx);
    const double fa = deriv(at, x_star, DerivOrder::Dalpha);
    const double fax = deriv(at, x_star, DerivOrder::DalphaDx);
    check.conditions.push_back(make_eq("f_x - 1", fx - 1.0));
    check.conditions.push_back(make_eq("f_xx", fxx));
    check.conditions.push_back(make_eq("f_alpha", fa));
    check.conditions.push_back(make_nonzero("f_xxx", fxxx));
    check.conditions.push_back(make_nonzero("f_alphax", fax));
    if (settle(check) == Verdict::Confirmed) {
        check.criticality = (-fxxx / fax) > 0.0 ? Criticality::SuperCritical : Criticality::SubCritical;
    }
    return check;
}

BifurcationCheck check_period_doubling(const Map1D& map, double x_star, double alpha_star) {
    const Map1D at{map.family, alpha_star};
    require_fixed_point(at, x_star);
    BifurcationCheck check;
    check.kind = BifurcationKind::PeriodDoubling;
    check.x_star = x_star;
    check.alpha_star = alpha_star;
    const double fx = deriv(at, x_star, DerivOrder::Dx);
    const double fxx = deriv(at, x_star, DerivOrder::Dxx);
    const double fxxx = deriv(at, x_star, DerivOrder::Dxxx);
    const double fax = deriv(at, x_star, DerivOrder::DalphaDx);
    check.conditions.push_back(make_eq("f_x + 1", fx + 1.0));
    check.conditions.push_back(make_nonzero("(1/2)f_xx^2 + (1/3)f_xxx", 0.5 * fxx * fxx + fxxx / 3.0));
    check.conditions.push_back(make_nonzero("f_alphax", fax));
    settle(check);
    return check;
}

std::vector<BifurcationCheck> scan_bifurcations(MapFamily family, double param_lo, double param_hi,
                                                double step) {
    if (!(param_lo < param_hi) || !(step > 0.0)) {
        throw std::invalid_argument("scan_bifurcations: need param_lo < param_hi and step > 0");
    }
    auto multiplier_at = [&](double alpha, double x) {
        return deriv(Map1D{family, alpha}, x, DerivOrder::Dx);
    };
    auto margin = [&](double alpha, double x) { return std::abs(multiplier_at(alpha, x)) - 1.0; };

    std::vector<CrossingEvent> events;
    auto record = [&](double alpha, double x) {
        x = continue_branch(family, alpha, x);  // snap onto the branch point
        events.push_back({alpha, x, multiplier_at(alpha, x)});
    };

    // branch locations carried across the sweep
    std::vector<double> branches;
    for (const auto& rep : find_fixed_points(Map1D{family, param_lo})) {
        branches.push_back(rep.location);
    }
    double alpha_prev = param_lo;
    const int n_steps = static_cast<int>(std::ceil((param_hi - param_lo) / step - 1e-12));
    for (int k = 1; k <= n_steps; ++k) {
        const double alpha = std::min(param_lo + k * step, param_hi);
        std::vector<double> fps;
        for (const auto& rep : find_fixed_points(Map1D{family, alpha})) {
            fps.push_back(rep.location);
        }
        std::vector<double> next_branches;
        for (double b : branches) {
            double nearest = fps.empty() ? b : fps.front();
            for (double f : fps) {
                if (std::abs(f - b) < std::abs(nearest - b)) nearest = f;
            }
            const double s_prev = margin(alpha_prev, b);
            const double s_next = margin(alpha, nearest);
            if (std::abs(s_prev) <= 1e-12) {
                record(alpha_prev, b);
            } else if (std::abs(s_next) <= 1e-12) {
                record(alpha, nearest);
            } else if ((s_prev < 0.0) != (s_next < 0.0)) {
                // bisect on the parameter, tracking the branch point
                double alo = alpha_prev, ahi = alpha;
                double xlo = b;
                double slo = s_prev;
                while (ahi - alo > kBifLocateTol) {
                    const double am = 0.5 * (alo + ahi);
                    const double xm = continue_branch(family, am, xlo);
                    const double sm = margin(am, xm);
                    if ((sm < 0.0) == (slo < 0.0)) {
                        alo = am;
                        xlo = xm;
                        slo = sm;
                    } else {
                        ahi = am;
                    }
                }
                const double a_star = 0.5 * (alo + ahi);
                record(a_star, continue_branch(family, a_star, xlo));
            }
            next_branches.push_back(nearest);
        }
        // fixed points not claimed by an existing branch start new branches
        for (double f : fps) {
            bool claimed = false;
            for (double b : next_branches) {
                if (std::abs(f - b) <= 1e-7) claimed = true;
            }
            if (!claimed) next_branches.push_back(f);
        }
        std::sort(next_branches.begin(), next_branches.end());
        next_branches.erase(std::unique(next_branches.begin(), next_branches.end(),
                                        [](double a, double b) { return std::abs(a - b) <= 1e-7; }),
                            next_branches.end());
        branches = std::move(next_branches);
        alpha_prev = alpha;
    }

    std::sort(events.begin(), events.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
        return a.alpha < b.alpha || (a.alpha == b.alpha && a.x < b.x);
    });
    std::vector<BifurcationCheck> out;
    for (const auto& ev : events) {
        const bool duplicate = !out.empty() && std::abs(out.back().alpha_star - ev.alpha) <= 1e-6 &&
                               std::abs(out.back().x_star - ev.x) <= 1e-5;
        if (duplicate) continue;
        const Map1D probe{family, ev.alpha};
        if (ev.multiplier > 0.0) {
            out.push_back(check_pitchfork(probe, ev.x, ev.alpha));
        } else {
            out.push_back(check_period_doubling(probe, ev.x, ev.alpha));
        }
    }
    return out;
}

BifurcationDiagram bifurcation_diagram(MapFamily family, const std::vector<double>& param_grid,
                                       const std::vector<double>& inits, int burn_in, int keep) {
    if (burn_in < 0 || keep < 1) {
        throw std::invalid_argument("bifurcation_diagram: need burn_in >= 0 and keep >= 1");
    }
    BifurcationDiagram diagram;
    diagram.param_grid = param_grid;
    diagram.attractors.resize(param_grid.size());
    for (std::size_t pi = 0; pi < param_grid.size(); ++pi) {
        const Map1D map{family, param_grid[pi]};
        auto& list = diagram.attractors[pi];
        for (double init : inits) {
            double x = iterate(map, init, burn_in);
            std::vector<double> kept(keep);
            for (int k = 0; k < keep; ++k) {
                kept[k] = x;
                x = eval(map, x);
            }
            int period = 0;
            for (int p = 1; p < keep && period == 0; ++p) {
                bool ok = true;
                for (int k = 0; k + p < keep; ++k) {
                    if (std::abs(kept[k + p] - kept[k]) >= 1e-8) ok = false;
                }
                if (ok) period = p;
            }
            for (double v : kept) {
                bool seen = false;
                for (const auto& a : list) {
                    if (std::abs(a.value - v) <= kAttractorDedupTol) seen = true;
                }
                if (!seen) list.push_back({v, period});
            }
        }
        std::sort(list.begin(), list.end(),
                  [](const AttractorPoint& a, const AttractorPoint& b) { return a.value < b.value; });
    }
    return diagram;
}

} // namespace cavidyn
