#include "cavidyn/ising.hpp"

#include "cavidyn/map1d.hpp"
#include "cavidyn/scalar_dynamics.hpp"

#include <cmath>

namespace cavidyn::ising {

namespace {

// sigma(u, 2*beta) = 1/(1 + exp(-2*beta*u)), stable for either sign
double sigma2b(double u, double beta) {
    const double t = 2.0 * beta * u;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double binary_entropy(double q) {
    double h = 0.0;
    if (q > 0.0) h -= q * std::log(q);
    if (q < 1.0) h -= (1.0 - q) * std::log(1.0 - q);
    return h;
}

double log_partition(const IsingParams& p) {
    double z = 0.0;
    for (int s1 = -1; s1 <= 1; s1 += 2) {
        for (int s2 = -1; s2 <= 1; s2 += 2) {
            z += std::exp(p.beta * (p.j12 * s1 * s2 + p.h1 * s1 + p.h2 * s2));
        }
    }
    return std::log(z);
}

void require_analyzed_regime(const IsingParams& p) {
    if (p.j12 != 1.0 || p.h1 != 0.0 || p.h2 != 0.0) {
        throw UnsupportedParams("predict_regime covers only j12 = 1, h1 = h2 = 0");
    }
}

// Limit of second-iterate dynamics started on the given side of 1/2: the
// outer fixed points of f^2 for |beta| > 1 (side -1 -> c0, +1 -> c1), the
// symmetric point when started exactly there.
double side_limit(int side, double c0, double c1) {
    if (side < 0) return c0;
    if (side > 0) return c1;
    return 0.5;
}

int side_of(double x) { return x < 0.5 ? -1 : (x > 0.5 ? 1 : 0); }

} // namespace

MeanFieldState seq_step(const MeanFieldState& s, const IsingParams& p) {
    MeanFieldState out;
    out.zeta = sigma2b(p.j12 * (2.0 * s.xi - 1.0) + p.h1, p.beta);
    out.xi = sigma2b(p.j12 * (2.0 * out.zeta - 1.0) + p.h2, p.beta);
    return out;
}

MeanFieldState par_step(const MeanFieldState& s, const IsingParams& p) {
    MeanFieldState out;
    out.zeta = sigma2b(p.j12 * (2.0 * s.xi - 1.0) + p.h1, p.beta);
    out.xi = sigma2b(p.j12 * (2.0 * s.zeta - 1.0) + p.h2, p.beta);
    return out;
}

double elbo(const MeanFieldState& s, const IsingParams& p) {
    const double m1 = 2.0 * s.zeta - 1.0;
    const double m2 = 2.0 * s.xi - 1.0;
    const double energy = p.beta * (p.j12 * m1 * m2 + p.h1 * m1 + p.h2 * m2);
    return energy - log_partition(p) + binary_entropy(s.zeta) + binary_entropy(s.xi);
}

TrajectoryRecord simulate(const MeanFieldState& s0, const IsingParams& p, UpdateMode mode,
                          int max_iter, double tol) {
    if (max_iter < 1 || !(tol > 0.0)) {
        throw std::invalid_argument("simulate: need max_iter >= 1 and tol > 0");
    }
    TrajectoryRecord rec;
    rec.states.push_back(s0);
    rec.elbos.push_back(elbo(s0, p));
    for (int k = 0; k < max_iter; ++k) {
        const MeanFieldState& prev = rec.states.back();
        const MeanFieldState next =
            mode == UpdateMode::Sequential ? seq_step(prev, p) : par_step(prev, p);
        rec.states.push_back(next);
        rec.elbos.push_back(elbo(next, p));
        const std::size_t m = rec.states.size() - 1;
        if (state_distance(rec.states[m], rec.states[m - 1]) < tol) {
            rec.terminal.kind = TerminalKind::ConvergedToFixedPoint;
            rec.terminal.fixed_point = next;
            return rec;
        }
        // a genuine 2-cycle needs clearly separated alternating states;
        // oscillatory approach to a fixed point keeps iterating instead
        if (m >= 2 && state_distance(rec.states[m], rec.states[m - 2]) < tol &&
            state_distance(rec.states[m], rec.states[m - 1]) >= 100.0 * tol) {
            rec.terminal.kind = TerminalKind::ConvergedToCycle;
            rec.terminal.cycle = {rec.states[m - 1], rec.states[m]};
            rec.terminal.period = 2;
            return rec;
        }
    }
    rec.terminal.kind = TerminalKind::MaxIterations;
    return rec;
}

RegimePrediction predict_regime(const MeanFieldState& s0, const IsingParams& p, UpdateMode mode) {
    require_analyzed_regime(p);
    RegimePrediction pred;
    if (std::abs(p.beta) <= 1.0) {
        pred.regime = Regime::Dobrushin;
        pred.attractor.kind = AttractorKind::FixedPoint;
        pred.attractor.points = {MeanFieldState{0.5, 0.5}};
        return pred;
    }
    pred.regime = p.beta > 1.0 ? Regime::FerroOutside : Regime::AntiferroOutside;

    // outer fixed points of the second iterate: {c0, 1/2, c1}
    const auto fps = find_fixed_points(Map1D{MapFamily::SigmoidCaviSecondIterate, p.beta});
    const double c0 = fps.front().location;
    const double c1 = fps.back().location;
    const bool flip = p.beta < 0.0;  // one application of f swaps sides for beta < 0

    if (mode == UpdateMode::Sequential) {
        // after the first step the xi subsequence follows f^2 from xi_0 and
        // zeta tracks f(xi); xi_0 = 1/2 lands exactly on the repeller
        const int sx = side_of(s0.xi);
        if (sx == 0) {
            pred.attractor.kind = AttractorKind::BoundaryCase;
            pred.attractor.points = {MeanFieldState{0.5, 0.5}};
            return pred;
        }
        const double xi_lim = side_limit(sx, c0, c1);
        const double zeta_lim = side_limit(flip ? -sx : sx, c0, c1);
        pred.attractor.kind = AttractorKind::FixedPoint;
        pred.attractor.points = {MeanFieldState{zeta_lim, xi_lim}};
        return pred;
    }

    // parallel: even subsequences follow f^2 from (zeta_0, xi_0), odd ones
    // from (f(xi_0), f(zeta_0))
    const int sz = side_of(s0.zeta);
    const int sx = side_of(s0.xi);
    if (sz == 0 && sx == 0) {
        pred.attractor.kind = AttractorKind::BoundaryCase;
        pred.attractor.points = {MeanFieldState{0.5, 0.5}};
        return pred;
    }
    auto flip_side = [&](int s) { return flip ? -s : s; };
    const MeanFieldState even{side_limit(sz, c0, c1), side_limit(sx, c0, c1)};
    const MeanFieldState odd{side_limit(flip_side(sx), c0, c1), side_limit(flip_side(sz), c0, c1)};
    if (state_distance(even, odd) == 0.0) {
        pred.attractor.kind = AttractorKind::FixedPoint;
        pred.attractor.points = {even};
    } else {
        pred.attractor.kind = AttractorKind::Cycle2;
        pred.attractor.points = {even, odd};
    }
    return pred;
}

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::AntiferroOutside: return "antiferro_outside";
    case Regime::Dobrushin: return "dobrushin";
    case Regime::FerroOutside: return "ferro_outside";
    }
    return "?";
}

} // namespace cavidyn::ising
