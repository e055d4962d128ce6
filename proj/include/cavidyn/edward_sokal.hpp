#pragma once

#include <cmath>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace cavidyn::es {

/// Edge-weight parameter of the coupling; p = 1 - e^{-beta} links it to the
/// Ising inverse temperature. Strictly inside (0,1).
struct ESParams {
    double p = 0.5;
};

/// Variational state: x1, x2 are the spin marginals, y is the weight on the
/// edge-absent configuration. Line-search grids keep all three in (0,1).
struct ESState {
    double x1 = 0.5;
    double x2 = 0.5;
    double y = 0.5;
};

inline double es_distance(const ESState& a, const ESState& b) {
    return std::max({std::abs(a.x1 - b.x1), std::abs(a.x2 - b.x2), std::abs(a.y - b.y)});
}

enum class Coord { X1, X2, Y };
enum class GradientSource { Printed, FiniteDifference };
enum class LineSearchMode { TwoStage, ExactGrid };

struct ESStepOptions {
    double resolution = 1e-6;
    LineSearchMode mode = LineSearchMode::TwoStage;
    GradientSource gradient = GradientSource::Printed;
};

/// The six-term coupling objective, evaluated exactly as written with the
/// 0 log 0 = 0 convention. A divergence-like quantity: the updates drive it
/// toward its minimum.
double es_elbo(const ESState& s, const ESParams& q);

/// Closed-form derivative expressions driving the coordinate updates; see
/// gradient_fidelity_check for how they relate to finite differences of
/// es_elbo.
double es_grad_x1(const ESState& s, const ESParams& q);
double es_grad_x2(const ESState& s, const ESParams& q);
double es_grad_y(const ESState& s, const ESParams& q);

/// Finite-difference gradient of es_elbo along one coordinate (5-point
/// stencil, step shrunk near the boundary of (0,1)).
double es_grad_fd(Coord coord, const ESState& s, const ESParams& q);

/// argmin over the resolution grid {d, 2d, ..., 1-d} of |gradient| along one
/// coordinate, holding the others at their values in `s`. Ties break toward
/// the smaller grid point.
double es_argmin_abs_grad(Coord coord, const ESState& s, const ESParams& q,
                          const ESStepOptions& opt = {});

/// One CAVI sweep in the order x1, then x2 (seeing the new x1), then y
/// (seeing both new values).
ESState es_cavi_step(const ESState& s, const ESParams& q, const ESStepOptions& opt = {});
ESState es_cavi_step(const ESState& s, const ESParams& q, double resolution);

struct ESTrajectory {
    std::vector<ESState> states;  // states[0] is the initialization
    std::vector<double> elbos;
    bool converged = false;
};

/// Repeated sweeps until successive states differ by < tol in max-norm or
/// max_iter is reached. tol <= 0 selects the default of twice the line-search
/// resolution (the grid quantizes fixed points).
ESTrajectory simulate_es(const ESState& s0, const ESParams& q, int max_iter, double tol = -1.0,
                         const ESStepOptions& opt = {});

struct GradientFidelityPoint {
    ESState state;
    double dev_x1 = 0.0;
    double dev_x2 = 0.0;
    double dev_y = 0.0;
};

/// Comparison of the printed partial derivatives against central finite
/// differences of the printed objective at seeded interior points.
struct GradientFidelityReport {
    double p = 0.0;
    double tolerance = 0.0;
    std::vector<GradientFidelityPoint> points;
    double max_dev_x1 = 0.0;
    double max_dev_x2 = 0.0;
    double max_dev_y = 0.0;
    bool all_within_tol = false;
};

GradientFidelityReport gradient_fidelity_check(const ESParams& q, int n_points, unsigned seed,
                                               double tol = 1e-5);

void write_fidelity_report(std::ostream& os, const GradientFidelityReport& report);

/// Multi-initialization convergence study plus the brute-force grid minimum
/// of the objective.
struct ESConvergenceReport {
    double p = 0.0;
    double resolution = 0.0;
    std::vector<ESState> inits;
    std::vector<ESState> terminal_states;
    std::vector<int> iterations;
    double elbo_min_grid = 0.0;
};

ESConvergenceReport run_es_convergence_study(const ESParams& q, int n_inits, unsigned seed,
                                             const ESStepOptions& opt = {}, int max_iter = 100,
                                             int grid_points_per_dim = 201);

/// JSON schema: {p, resolution, inits, terminal_states, iterations, elbo_min_grid}.
void write_convergence_report(std::ostream& os, const ESConvergenceReport& report);

/// Deterministic seeded state with all coordinates in (0.01, 0.99).
ESState random_interior_state(unsigned long long& rng_state);

} // namespace cavidyn::es
