#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cavidyn::ising {

/// Two-node Ising model: beta * j12 * x1 x2 + beta * (h1 x1 + h2 x2) on
/// {-1,+1}^2. The regime classification covers j12 = 1, h = 0.
struct IsingParams {
    double beta = 0.0;
    double j12 = 1.0;
    double h1 = 0.0;
    double h2 = 0.0;
};

/// Mean-field state: zeta = q1(x1 = 1), xi = q2(x2 = 1).
struct MeanFieldState {
    double zeta = 0.5;
    double xi = 0.5;
};

inline double state_distance(const MeanFieldState& a, const MeanFieldState& b) {
    return std::max(std::abs(a.zeta - b.zeta), std::abs(a.xi - b.xi));
}

enum class UpdateMode { Sequential, Parallel };

enum class TerminalKind { ConvergedToFixedPoint, ConvergedToCycle, MaxIterations };

struct Terminal {
    TerminalKind kind = TerminalKind::MaxIterations;
    MeanFieldState fixed_point;            // valid for ConvergedToFixedPoint
    std::vector<MeanFieldState> cycle;     // valid for ConvergedToCycle
    int period = 0;
};

struct TrajectoryRecord {
    std::vector<MeanFieldState> states;  // states[0] is the initialization
    std::vector<double> elbos;
    Terminal terminal;
};

enum class Regime { AntiferroOutside, Dobrushin, FerroOutside };

enum class AttractorKind { FixedPoint, Cycle2, BoundaryCase };

struct PredictedAttractor {
    AttractorKind kind = AttractorKind::FixedPoint;
    std::vector<MeanFieldState> points;  // one point, or the two cycle points
};

struct RegimePrediction {
    Regime regime = Regime::Dobrushin;
    PredictedAttractor attractor;
};

/// Regime prediction requested outside the analyzed setting
/// (j12 = 1, h1 = h2 = 0).
struct UnsupportedParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Gauss-Seidel update: zeta from the old xi, then xi from the new zeta.
MeanFieldState seq_step(const MeanFieldState& s, const IsingParams& p);

/// Jacobi update: both coordinates from the old state.
MeanFieldState par_step(const MeanFieldState& s, const IsingParams& p);

/// Exact ELBO in nats, including -log Z by enumeration of the four spin
/// configurations.
double elbo(const MeanFieldState& s, const IsingParams& p);

/// Iterates until successive states differ by < tol in max-norm (fixed point),
/// states two apart do while successive ones do not (2-cycle), or max_iter.
TrajectoryRecord simulate(const MeanFieldState& s0, const IsingParams& p, UpdateMode mode,
                          int max_iter, double tol);

inline TrajectoryRecord simulate(const MeanFieldState& s0, const IsingParams& p, UpdateMode mode) {
    return simulate(s0, p, mode, 100000, 1e-10);
}

/// The attractor the regime classification assigns to this initialization.
/// Initializations sitting exactly on the relevant repelling point are flagged
/// as boundary cases rather than perturbed.
RegimePrediction predict_regime(const MeanFieldState& s0, const IsingParams& p, UpdateMode mode);

const char* regime_name(Regime r);

} // namespace cavidyn::ising
