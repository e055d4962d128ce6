#pragma once

#include <stdexcept>

namespace cavidyn {

enum class MapFamily {
    SigmoidCavi,               // x -> 1/(1 + exp(-2b(2x-1)))
    SigmoidCaviSecondIterate,  // second iterate of the above
    Logistic,                  // x -> mu x (1-x)
    LogisticSecondIterate,
};

enum class DerivOrder { Dx, Dxx, Dxxx, Dalpha, DalphaDx };

/// A parametric scalar map on [0,1]. `param` is the inverse temperature for
/// the sigmoid families and the growth rate for the logistic families.
struct Map1D {
    MapFamily family = MapFamily::SigmoidCavi;
    double param = 0.0;
};

bool is_second_iterate(MapFamily family);
MapFamily base_of(MapFamily family);
const char* family_name(MapFamily family);

/// f(x, param). Throws std::domain_error for x outside [0,1].
double eval(const Map1D& map, double x);

/// Analytic derivative (closed form; second iterates use exact chain-rule
/// composition of the base family's derivatives, never finite differences).
double deriv(const Map1D& map, double x, DerivOrder order);

/// k-fold composition f^k(x), k >= 0.
double iterate(const Map1D& map, double x, int k);

/// d/dx f^k(x), the product of f' along the orbit.
double iterate_deriv(const Map1D& map, double x, int k);

} // namespace cavidyn
