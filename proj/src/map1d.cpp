#include "cavidyn/map1d.hpp"

#include <cmath>

namespace cavidyn {

namespace {

void require_unit_interval(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("map argument outside [0,1]");
    }
}

// Numerically stable logistic sigmoid of the net input u = 2b(2x-1).
double sigmoid_net(double u) {
    if (u >= 0.0) {
        return 1.0 / (1.0 + std::exp(-u));
    }
    const double t = std::exp(u);
    return t / (1.0 + t);
}

double sigmoid_eval(double x, double b) { return sigmoid_net(2.0 * b * (2.0 * x - 1.0)); }

double logistic_eval(double x, double mu) { return mu * x * (1.0 - x); }

struct Derivs {
    double f;   // value
    double fx;  // d/dx
    double fxx;
    double fxxx;
    double fa;   // d/dparam
    double fax;  // d^2/dparam dx
};

Derivs base_derivs(MapFamily family, double x, double p) {
    Derivs d{};
    if (family == MapFamily::SigmoidCavi) {
        const double g = sigmoid_eval(x, p);
        const double w = g * (1.0 - g);
        const double c = 4.0 * p;
        d.f = g;
        d.fx = c * w;
        d.fxx = c * c * w * (1.0 - 2.0 * g);
        d.fxxx = c * c * d.fx * ((1.0 - 2.0 * g) * (1.0 - 2.0 * g) - 2.0 * w);
        d.fa = 2.0 * (2.0 * x - 1.0) * w;
        d.fax = 4.0 * w + 8.0 * p * (2.0 * x - 1.0) * (1.0 - 2.0 * g) * w;
    } else {
        d.f = logistic_eval(x, p);
        d.fx = p * (1.0 - 2.0 * x);
        d.fxx = -2.0 * p;
        d.fxxx = 0.0;
        d.fa = x * (1.0 - x);
        d.fax = 1.0 - 2.0 * x;
    }
    return d;
}

// Exact composition rules for F = f(f(x)) up to third order in x, first in
// the parameter, and the mixed partial.
Derivs second_iterate_derivs(MapFamily base, double x, double p) {
    const Derivs in = base_derivs(base, x, p);
    const Derivs out = base_derivs(base, in.f, p);
    Derivs d{};
    d.f = out.f;
    d.fx = out.fx * in.fx;
    d.fxx = out.fxx * in.fx * in.fx + out.fx * in.fxx;
    d.fxxx = out.fxxx * in.fx * in.fx * in.fx + 3.0 * out.fxx * in.fx * in.fxx + out.fx * in.fxxx;
    d.fa = out.fx * in.fa + out.fa;
    d.fax = (out.fxx * in.fa + out.fax) * in.fx + out.fx * in.fax;
    return d;
}

} // namespace

bool is_second_iterate(MapFamily family) {
    return family == MapFamily::SigmoidCaviSecondIterate || family == MapFamily::LogisticSecondIterate;
}

MapFamily base_of(MapFamily family) {
    switch (family) {
    case MapFamily::SigmoidCaviSecondIterate: return MapFamily::SigmoidCavi;
    case MapFamily::LogisticSecondIterate: return MapFamily::Logistic;
    default: return family;
    }
}

const char* family_name(MapFamily family) {
    switch (family) {
    case MapFamily::SigmoidCavi: return "sigmoid";
    case MapFamily::SigmoidCaviSecondIterate: return "sigmoid2";
    case MapFamily::Logistic: return "logistic";
    case MapFamily::LogisticSecondIterate: return "logistic2";
    }
    return "?";
}

double eval(const Map1D& map, double x) {
    require_unit_interval(x);
    switch (map.family) {
    case MapFamily::SigmoidCavi:
        return sigmoid_eval(x, map.param);
    case MapFamily::SigmoidCaviSecondIterate:
        return sigmoid_eval(sigmoid_eval(x, map.param), map.param);
    case MapFamily::Logistic:
        return logistic_eval(x, map.param);
    case MapFamily::LogisticSecondIterate:
        return logistic_eval(logistic_eval(x, map.param), map.param);
    }
    throw std::logic_error("unknown map family");
}

double deriv(const Map1D& map, double x, DerivOrder order) {
    require_unit_interval(x);
    const Derivs d = is_second_iterate(map.family)
                         ? second_iterate_derivs(base_of(map.family), x, map.param)
                         : base_derivs(map.family, x, map.param);
    switch (order) {
    case DerivOrder::Dx: return d.fx;
    case DerivOrder::Dxx: return d.fxx;
    case DerivOrder::Dxxx: return d.fxxx;
    case DerivOrder::Dalpha: return d.fa;
    case DerivOrder::DalphaDx: return d.fax;
    }
    throw std::logic_error("unknown derivative order");
}

double iterate(const Map1D& map, double x, int k) {
    require_unit_interval(x);
    for (int i = 0; i < k; ++i) {
        x = eval(map, x);
    }
    return x;
}

double iterate_deriv(const Map1D& map, double x, int k) {
    require_unit_interval(x);
    double prod = 1.0;
    for (int i = 0; i < k; ++i) {
        prod *= deriv(map, x, DerivOrder::Dx);
        x = eval(map, x);
    }
    return prod;
}

} // namespace cavidyn
