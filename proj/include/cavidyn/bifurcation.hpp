#pragma once

#include "cavidyn/map1d.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cavidyn {

inline constexpr double kBifEqualityTol = 1e-6;   // |value| <= tol counts as "equals"
inline constexpr double kBifNonzeroTol = 1e-6;    // |value| > tol counts as "nonzero"
inline constexpr double kBifLocateTol = 1e-8;     // parameter bisection width

enum class BifurcationKind { Pitchfork, PeriodDoubling };
enum class Verdict { Confirmed, Rejected };
enum class Criticality { SuperCritical, SubCritical, NotApplicable };

struct NotAFixedPoint : std::domain_error {
    using std::domain_error::domain_error;
};

struct BifurcationCondition {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool satisfied = false;
};

struct BifurcationCheck {
    BifurcationKind kind = BifurcationKind::Pitchfork;
    double x_star = 0.0;
    double alpha_star = 0.0;
    std::vector<BifurcationCondition> conditions;
    Verdict verdict = Verdict::Rejected;
    Criticality criticality = Criticality::NotApplicable;
};

const char* kind_name(BifurcationKind k);
const char* verdict_name(Verdict v);
const char* criticality_name(Criticality c);

/// Pitchfork conditions at (x_star, alpha_star) for the given family:
/// f_x = 1, f_xx = 0, f_alpha = 0 (within tolerance), f_xxx != 0 and
/// f_alphax != 0 (beyond tolerance). Criticality from sign(-f_xxx/f_alphax).
/// Throws NotAFixedPoint when |f(x_star) - x_star| > 1e-10.
BifurcationCheck check_pitchfork(const Map1D& map, double x_star, double alpha_star);

/// Period-doubling conditions: f_x = -1, (1/2)f_xx^2 + (1/3)f_xxx != 0,
/// f_alphax != 0. Criticality is never assigned.
BifurcationCheck check_period_doubling(const Map1D& map, double x_star, double alpha_star);

/// Sweeps [param_lo, param_hi]; continues each fixed-point branch across the
/// grid, locates multiplier crossings of +1/-1 by bisection, and runs the
/// matching checker at each crossing.
std::vector<BifurcationCheck> scan_bifurcations(MapFamily family, double param_lo, double param_hi,
                                                double step);

struct AttractorPoint {
    double value = 0.0;
    int period = 0;  // 0 when the orbit did not settle within the kept window
};

struct BifurcationDiagram {
    std::vector<double> param_grid;
    std::vector<std::vector<AttractorPoint>> attractors;  // one list per parameter
};

/// Long-run iteration from each init: burn_in discarded steps, then `keep`
/// recorded iterates per parameter value, deduplicated within 1e-6.
BifurcationDiagram bifurcation_diagram(MapFamily family, const std::vector<double>& param_grid,
                                       const std::vector<double>& inits, int burn_in, int keep);

} // namespace cavidyn
