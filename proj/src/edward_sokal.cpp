#include "cavidyn/edward_sokal.hpp"

#include "cavidyn/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cavidyn::es {

namespace {

void require_params(const ESParams& q) {
    if (!(q.p > 0.0 && q.p < 1.0)) {
        throw std::invalid_argument("ESParams: p must lie strictly inside (0,1)");
    }
}

double xlogx(double v) { return v == 0.0 ? 0.0 : v * std::log(v); }

double get_coord(const ESState& s, Coord c) {
    switch (c) {
    case Coord::X1: return s.x1;
    case Coord::X2: return s.x2;
    default: return s.y;
    }
}

ESState with_coord(ESState s, Coord c, double v) {
    switch (c) {
    case Coord::X1: s.x1 = v; break;
    case Coord::X2: s.x2 = v; break;
    default: s.y = v; break;
    }
    return s;
}

double grad_along(Coord coord, const ESState& s, const ESParams& q, GradientSource src) {
    if (src == GradientSource::FiniteDifference) return es_grad_fd(coord, s, q);
    switch (coord) {
    case Coord::X1: return es_grad_x1(s, q);
    case Coord::X2: return es_grad_x2(s, q);
    default: return es_grad_y(s, q);
    }
}

// splitmix64; deterministic across platforms
std::uint64_t next_u64(unsigned long long& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double next_unit(unsigned long long& state) {
    return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
}

} // namespace

double es_elbo(const ESState& s, const ESParams& q) {
    require_params(q);
    const double x1 = s.x1, x2 = s.x2, y = s.y, p = q.p;
    const double l1p = std::log1p(-p);  // log(1-p)
    const double lp = std::log(p);
    double t = 0.0;
    t += xlogx(x1 * x2 * y) - x1 * x2 * y * l1p;
    t += xlogx((1 - x1) * x2 * y) - (1 - x1) * x2 * y * l1p;
    t += xlogx(x1 * (1 - x2) * y) - x1 * (1 - x2) * y * l1p;
    t += xlogx((1 - x1) * (1 - x2) * y) - (1 - x1) * (1 - x2) * y * l1p;
    t += xlogx(x1 * x2 * (1 - y)) - x1 * x2 * (1 - y) * lp;
    t += xlogx((1 - x1) * (1 - x2) * (1 - y)) - (1 - x1) * (1 - x2) * (1 - y) * lp;
    return t;
}

double es_grad_x1(const ESState& s, const ESParams& q) {
    require_params(q);
    const double x1 = s.x1, x2 = s.x2, y = s.y, p = q.p;
    return y * std::log(x1 / (1 - x1)) + (1 - y) * std::log(1 / (1 - x1)) +
           x2 * (1 - y) * std::log(x1 * (1 - x1)) +
           x2 * (1 - y) * std::log(x2 * (1 - x2) * (1 - y) * (1 - y) / (p * p)) +
           std::log(p / ((1 - x2) * (1 - y))) + (2 * x2 - 1) * (1 - y);
}

double es_grad_x2(const ESState& s, const ESParams& q) {
    return es_grad_x1(ESState{s.x2, s.x1, s.y}, q);
}

double es_grad_y(const ESState& s, const ESParams& q) {
    require_params(q);
    const double x1 = s.x1, x2 = s.x2, y = s.y, p = q.p;
    // grouped into 1<->2 symmetric pairs so swapped inputs evaluate identically
    const double agree = x1 * x2 + (1 - x1) * (1 - x2);
    const double t_odds = agree * (std::log(y / (1 - y)) + std::log(p / (1 - p)));
    const double t_edge = (1 - x1) * x2 * std::log((1 - x1) * x2 * y / (1 - p)) +
                          x1 * (1 - x2) * std::log(x1 * (1 - x2) * y / (1 - p));
    const double t_lin = (1 - x1) * x2 + x1 * (1 - x2);
    return t_odds + t_edge + t_lin;
}

double es_grad_fd(Coord coord, const ESState& s, const ESParams& q) {
    const double z = get_coord(s, coord);
    const double h = std::min({1e-5, z / 3.0, (1.0 - z) / 3.0});
    auto f = [&](double v) { return es_elbo(with_coord(s, coord, v), q); };
    return oracle::fd_derivative(f, z, 1, h, 0.0, 1.0);
}

double es_argmin_abs_grad(Coord coord, const ESState& s, const ESParams& q,
                          const ESStepOptions& opt) {
    require_params(q);
    if (!(opt.resolution > 0.0 && opt.resolution <= 0.01)) {
        throw std::invalid_argument("es line search: resolution must lie in (0, 0.01]");
    }
    const double d = opt.resolution;
    const long long n = std::llround(1.0 / d) - 1;  // grid {d, 2d, ..., 1-d}
    auto value = [&](long long i) {
        return std::abs(grad_along(coord, with_coord(s, coord, i * d), q,
                                   opt.gradient));
    };
    auto scan = [&](long long lo, long long hi, long long stride) {
        long long best_i = lo;
        double best_v = value(lo);
        for (long long i = lo + stride; i <= hi; i += stride) {
            const double v = value(i);
            if (v < best_v) {  // strict: ties go to the smaller grid point
                best_v = v;
                best_i = i;
            }
        }
        return best_i;
    };
    if (opt.mode == LineSearchMode::ExactGrid || n <= 2000) {
        return scan(1, n, 1) * d;
    }
    // coarse pass over ~1000 spread indices, then every grid point across the
    // two coarse cells around the coarse minimizer
    const int coarse = 1000;
    long long best_j = 0;
    double best_v = 0.0;
    auto coarse_index = [&](int j) {
        return 1 + std::llround(static_cast<double>(j) * (n - 1) / (coarse - 1));
    };
    for (int j = 0; j < coarse; ++j) {
        const double v = value(coarse_index(j));
        if (j == 0 || v < best_v) {
            best_v = v;
            best_j = j;
        }
    }
    const long long lo = coarse_index(static_cast<int>(std::max<long long>(best_j - 1, 0)));
    const long long hi = coarse_index(static_cast<int>(std::min<long long>(best_j + 1, coarse - 1)));
    return scan(lo, hi, 1) * d;
}

ESState es_cavi_step(const ESState& s, const ESParams& q, const ESStepOptions& opt) {
    ESState out = s;
    out.x1 = es_argmin_abs_grad(Coord::X1, out, q, opt);
    out.x2 = es_argmin_abs_grad(Coord::X2, out, q, opt);
    out.y = es_argmin_abs_grad(Coord::Y, out, q, opt);
    return out;
}

ESState es_cavi_step(const ESState& s, const ESParams& q, double resolution) {
    ESStepOptions opt;
    opt.resolution = resolution;
    return es_cavi_step(s, q, opt);
}

ESTrajectory simulate_es(const ESState& s0, const ESParams& q, int max_iter, double tol,
                         const ESStepOptions& opt) {
    if (max_iter < 1) throw std::invalid_argument("simulate_es: max_iter >= 1 required");
    if (tol <= 0.0) tol = 2.0 * opt.resolution;
    ESTrajectory traj;
    traj.states.push_back(s0);
    traj.elbos.push_back(es_elbo(s0, q));
    for (int k = 0; k < max_iter; ++k) {
        const ESState next = es_cavi_step(traj.states.back(), q, opt);
        const double moved = es_distance(next, traj.states.back());
        traj.states.push_back(next);
        traj.elbos.push_back(es_elbo(next, q));
        if (moved < tol) {
            traj.converged = true;
            break;
        }
    }
    return traj;
}

GradientFidelityReport gradient_fidelity_check(const ESParams& q, int n_points, unsigned seed,
                                               double tol) {
    require_params(q);
    GradientFidelityReport rep;
    rep.p = q.p;
    rep.tolerance = tol;
    unsigned long long rng = seed;
    for (int i = 0; i < n_points; ++i) {
        ESState s = random_interior_state(rng);
        GradientFidelityPoint pt;
        pt.state = s;
        pt.dev_x1 = std::abs(es_grad_x1(s, q) - es_grad_fd(Coord::X1, s, q));
        pt.dev_x2 = std::abs(es_grad_x2(s, q) - es_grad_fd(Coord::X2, s, q));
        pt.dev_y = std::abs(es_grad_y(s, q) - es_grad_fd(Coord::Y, s, q));
        rep.max_dev_x1 = std::max(rep.max_dev_x1, pt.dev_x1);
        rep.max_dev_x2 = std::max(rep.max_dev_x2, pt.dev_x2);
        rep.max_dev_y = std::max(rep.max_dev_y, pt.dev_y);
        rep.points.push_back(pt);
    }
    rep.all_within_tol = rep.max_dev_x1 <= tol && rep.max_dev_x2 <= tol && rep.max_dev_y <= tol;
    return rep;
}

void write_fidelity_report(std::ostream& os, const GradientFidelityReport& report) {
    nlohmann::json j;
    j["p"] = report.p;
    j["tolerance"] = report.tolerance;
    j["max_dev_x1"] = report.max_dev_x1;
    j["max_dev_x2"] = report.max_dev_x2;
    j["max_dev_y"] = report.max_dev_y;
    j["all_within_tol"] = report.all_within_tol;
    auto points = nlohmann::json::array();
    for (const auto& pt : report.points) {
        points.push_back({{"x1", pt.state.x1},
                          {"x2", pt.state.x2},
                          {"y", pt.state.y},
                          {"dev_x1", pt.dev_x1},
                          {"dev_x2", pt.dev_x2},
                          {"dev_y", pt.dev_y}});
    }
    j["points"] = std::move(points);
    os << j.dump(2) << '\n';
}

ESConvergenceReport run_es_convergence_study(const ESParams& q, int n_inits, unsigned seed,
                                             const ESStepOptions& opt, int max_iter,
                                             int grid_points_per_dim) {
    require_params(q);
    ESConvergenceReport rep;
    rep.p = q.p;
    rep.resolution = opt.resolution;
    unsigned long long rng = seed;
    for (int i = 0; i < n_inits; ++i) {
        const ESState s0 = random_interior_state(rng);
        const ESTrajectory traj = simulate_es(s0, q, max_iter, -1.0, opt);
        rep.inits.push_back(s0);
        rep.terminal_states.push_back(traj.states.back());
        rep.iterations.push_back(static_cast<int>(traj.states.size()) - 1);
    }
    const int g = grid_points_per_dim;
    const oracle::GridSpec spec{1.0 / (g + 1), static_cast<double>(g) / (g + 1), g};
    auto [argmin, minval] = oracle::grid_minimize(
        [&](const std::vector<double>& v) {
            return es_elbo(ESState{v[0], v[1], v[2]}, q);
        },
        {spec, spec, spec});
    rep.elbo_min_grid = minval;
    return rep;
}

void write_convergence_report(std::ostream& os, const ESConvergenceReport& report) {
    auto state_json = [](const ESState& s) {
        return nlohmann::json{{"x1", s.x1}, {"x2", s.x2}, {"y", s.y}};
    };
    nlohmann::json j;
    j["p"] = report.p;
    j["resolution"] = report.resolution;
    j["inits"] = nlohmann::json::array();
    j["terminal_states"] = nlohmann::json::array();
    for (const auto& s : report.inits) j["inits"].push_back(state_json(s));
    for (const auto& s : report.terminal_states) j["terminal_states"].push_back(state_json(s));
    j["iterations"] = report.iterations;
    j["elbo_min_grid"] = report.elbo_min_grid;
    os << j.dump(2) << '\n';
}

ESState random_interior_state(unsigned long long& rng_state) {
    ESState s;
    s.x1 = 0.01 + 0.98 * next_unit(rng_state);
    s.x2 = 0.01 + 0.98 * next_unit(rng_state);
    s.y = 0.01 + 0.98 * next_unit(rng_state);
    return s;
}

} // namespace cavidyn::es
