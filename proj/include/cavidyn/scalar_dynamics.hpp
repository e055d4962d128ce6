#pragma once

#include "cavidyn/map1d.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace cavidyn {

inline constexpr double kFixedPointResidualTol = 1e-12;
inline constexpr double kHyperbolicityTol = 1e-9;
inline constexpr double kCyclePointTol = 1e-10;
inline constexpr int kFixedPointGridCells = 10000;

enum class Stability {
    AttractingHyperbolic,
    RepellingHyperbolic,
    NonHyperbolicAsymptoticallyStable,
    NonHyperbolicUnstable,
    NonHyperbolicSemiStableLeft,
    NonHyperbolicSemiStableRight,
};

const char* stability_name(Stability s);

/// Derivative values consulted while classifying a fixed point.
struct StabilityEvidence {
    double f_x = 0.0;
    std::optional<double> f_xx;
    std::optional<double> f_xxx;
    std::optional<double> schwarzian;
};

struct FixedPointReport {
    double location = 0.0;
    double multiplier = 0.0;
    Stability stability = Stability::AttractingHyperbolic;
    StabilityEvidence evidence;
};

/// A periodic orbit of distinct points; period is minimal (>= 2).
struct CycleReport {
    std::vector<double> points;
    int period = 0;
    bool stable = false;
};

/// The quantity deciding a non-hyperbolic case is itself within tolerance of
/// zero, beyond the reach of the second/third-derivative and Schwarzian tests.
struct UnresolvedClassification : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Schwarzian derivative requested where f_x vanishes.
struct DegenerateDerivative : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sf = f_xxx/f_x - (3/2)(f_xx/f_x)^2.
double schwarzian(const Map1D& map, double x);

/// Stability decision from the derivative values alone: hyperbolic when
/// ||f_x|-1| exceeds the hyperbolicity tolerance, otherwise the f_x = 1 case
/// consults f_xx then f_xxx and the f_x = -1 case consults the Schwarzian.
FixedPointReport classify_from_derivatives(double location, double f_x, double f_xx, double f_xxx);

FixedPointReport classify_fixed_point(const Map1D& map, double x_star);

/// All solutions of f(x) = x in [0,1], sorted ascending and fully classified.
/// Sign-change scan on a uniform grid, bisection, Newton polish; the symmetric
/// point 1/2 is inserted explicitly for the sigmoid families where it is a
/// fixed point identically in the parameter.
std::vector<FixedPointReport> find_fixed_points(const Map1D& map);

/// Cycles of minimal period 2..max_period (max_period <= 8): fixed points of
/// f^p that are not fixed points of f^d for any proper divisor d, grouped into
/// orbits. A cycle is stable when |d/dx f^p| < 1 at a cycle point.
std::vector<CycleReport> find_cycles(const Map1D& map, int max_period);

} // namespace cavidyn
