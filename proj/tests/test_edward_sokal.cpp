#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cavidyn/edward_sokal.hpp"
#include "cavidyn/oracle.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace cavidyn;
using es::Coord;
using es::ESParams;
using es::ESState;
using es::ESStepOptions;

namespace {

const double kP5 = 1.0 - std::exp(-5.0);
const double kP1 = 1.0 - std::exp(-1.0);
const double kP01 = 1.0 - std::exp(-0.1);

ESState swap12(const ESState& s) { return ESState{s.x2, s.x1, s.y}; }

// one sweep with the coordinate labels (and therefore the schedule) exchanged:
// x2 first, then x1, then y
ESState relabeled_step(const ESState& s, const ESParams& q, const ESStepOptions& opt) {
    ESState out = s;
    out.x2 = es::es_argmin_abs_grad(Coord::X2, out, q, opt);
    out.x1 = es::es_argmin_abs_grad(Coord::X1, out, q, opt);
    out.y = es::es_argmin_abs_grad(Coord::Y, out, q, opt);
    return out;
}

} // namespace

TEST_CASE("es objective evaluates the six printed terms") {
    // direct arithmetic: all eight coefficient products equal 1/8 at the
    // symmetric state, so the sum collapses to 0.75 log(1/4)
    CHECK(es::es_elbo(ESState{0.5, 0.5, 0.5}, ESParams{0.5}) ==
          doctest::Approx(0.75 * std::log(0.25)).epsilon(1e-14));
    // finite on the open cube, including close to the faces
    for (double v : {1e-9, 0.5, 1.0 - 1e-9}) {
        CHECK(std::isfinite(es::es_elbo(ESState{v, 0.5, 0.5}, ESParams{kP5})));
        CHECK(std::isfinite(es::es_elbo(ESState{0.5, v, 0.3}, ESParams{kP01})));
        CHECK(std::isfinite(es::es_elbo(ESState{0.4, 0.6, v}, ESParams{kP1})));
    }
    CHECK_THROWS_AS(es::es_elbo(ESState{0.5, 0.5, 0.5}, ESParams{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(es::es_elbo(ESState{0.5, 0.5, 0.5}, ESParams{1.0}), std::invalid_argument);
}

TEST_CASE("printed gradient expressions") {
    SUBCASE("x1/x2 formulas are images of each other under the swap") {
        unsigned long long rng = 3;
        for (int i = 0; i < 40; ++i) {
            const ESState s = es::random_interior_state(rng);
            for (double p : {kP01, kP1, kP5}) {
                CHECK(es::es_grad_x1(s, ESParams{p}) == es::es_grad_x2(swap12(s), ESParams{p}));
                CHECK(es::es_grad_y(s, ESParams{p}) == es::es_grad_y(swap12(s), ESParams{p}));
            }
        }
    }
    SUBCASE("the y expression is the exact partial of the objective") {
        unsigned long long rng = 17;
        for (int i = 0; i < 20; ++i) {
            const ESState s = es::random_interior_state(rng);
            CHECK(es::es_grad_y(s, ESParams{kP1}) ==
                  doctest::Approx(es::es_grad_fd(Coord::Y, s, ESParams{kP1})).epsilon(1e-5).scale(1.0));
        }
    }
    SUBCASE("the x expressions deviate from the partial by y log(p/((1-x2)(1-y)))") {
        unsigned long long rng = 29;
        for (int i = 0; i < 20; ++i) {
            const ESState s = es::random_interior_state(rng);
            for (double p : {kP01, kP1, kP5}) {
                const double expected = s.y * std::log(p / ((1.0 - s.x2) * (1.0 - s.y)));
                const double dev =
                    es::es_grad_x1(s, ESParams{p}) - es::es_grad_fd(Coord::X1, s, ESParams{p});
                CHECK(dev == doctest::Approx(expected).epsilon(1e-5).scale(1.0));
            }
        }
    }
}

TEST_CASE("gradient fidelity report") {
    const auto rep = es::gradient_fidelity_check(ESParams{kP1}, 20, 12345);
    CHECK(rep.points.size() == 20);
    CHECK(rep.max_dev_y <= 1e-5);          // the printed y derivative is faithful
    CHECK(rep.max_dev_x1 > 1e-5);          // the printed x derivatives are not
    CHECK(rep.max_dev_x2 > 1e-5);
    CHECK_FALSE(rep.all_within_tol);

    std::ostringstream os;
    es::write_fidelity_report(os, rep);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["all_within_tol"] == false);
    CHECK(j["points"].size() == 20);
    CHECK(j["max_dev_y"].get<double>() <= 1e-5);
}

TEST_CASE("line search") {
    SUBCASE("argmin of |grad_x1| along the slice is interior") {
        const ESState s{0.5, 0.5, 0.5};
        const double z = es::es_argmin_abs_grad(Coord::X1, s, ESParams{kP5});
        CHECK(z > 1e-6);
        CHECK(z < 1.0 - 1e-6);
    }
    SUBCASE("grad_x2 changes sign along its slice") {
        const ESParams q{kP01};
        double prev = es::es_grad_x2(ESState{0.5, 1e-3, 0.5}, q);
        bool crossed = false;
        for (int i = 2; i <= 999; ++i) {
            const double cur = es::es_grad_x2(ESState{0.5, i / 1000.0, 0.5}, q);
            if ((cur < 0.0) != (prev < 0.0)) crossed = true;
            prev = cur;
        }
        CHECK(crossed);
    }
    SUBCASE("two-stage scan agrees with the exhaustive scan") {
        ESStepOptions exact;
        exact.mode = es::LineSearchMode::ExactGrid;
        ESStepOptions twostage;
        for (const ESState& s : {ESState{0.3, 0.6, 0.4}, ESState{0.7, 0.2, 0.8}}) {
            for (auto coord : {Coord::X1, Coord::X2, Coord::Y}) {
                const double a = es::es_argmin_abs_grad(coord, s, ESParams{kP5}, exact);
                const double b = es::es_argmin_abs_grad(coord, s, ESParams{kP5}, twostage);
                CHECK(std::abs(a - b) <= 1e-6);  // within one grid step
            }
        }
    }
    SUBCASE("resolution validation") {
        ESStepOptions opt;
        opt.resolution = 0.02;
        CHECK_THROWS_AS(es::es_argmin_abs_grad(Coord::X1, ESState{}, ESParams{0.5}, opt),
                        std::invalid_argument);
    }
}

TEST_CASE("es_cavi_step") {
    SUBCASE("a converged state moves by at most the grid resolution") {
        const auto traj = es::simulate_es(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 60);
        REQUIRE(traj.converged);
        const ESState fixed = traj.states.back();
        const ESState moved = es::es_cavi_step(fixed, ESParams{kP5}, 1e-6);
        CHECK(es::es_distance(moved, fixed) <= 2e-6);
    }
    SUBCASE("deterministic replay is bit-identical") {
        const auto a = es::es_cavi_step(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 1e-6);
        const auto b = es::es_cavi_step(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 1e-6);
        CHECK(a.x1 == b.x1);
        CHECK(a.x2 == b.x2);
        CHECK(a.y == b.y);
    }
}

TEST_CASE("simulate_es convergence") {
    SUBCASE("convergence from a fixed start") {
        const auto traj = es::simulate_es(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 50);
        CHECK(traj.converged);
        CHECK(traj.states.size() <= 51);
    }
    SUBCASE("terminal states agree across seeded initializations for each p") {
        for (double p : {kP01, kP1, kP5}) {
            std::vector<ESState> terminals;
            unsigned long long rng = 42;
            for (int i = 0; i < 10; ++i) {
                const ESState s0 = es::random_interior_state(rng);
                const auto traj = es::simulate_es(s0, ESParams{p}, 60);
                CHECK(traj.converged);
                terminals.push_back(traj.states.back());
            }
            for (std::size_t i = 0; i < terminals.size(); ++i) {
                for (std::size_t j = i + 1; j < terminals.size(); ++j) {
                    CHECK(es::es_distance(terminals[i], terminals[j]) <= 1e-4);
                }
            }
        }
    }
    SUBCASE("the y slice argmin at the fixed point reproduces y*") {
        const auto traj = es::simulate_es(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 60);
        REQUIRE(traj.converged);
        const ESState t = traj.states.back();
        ESStepOptions exact;
        exact.mode = es::LineSearchMode::ExactGrid;
        const double y_star = es::es_argmin_abs_grad(Coord::Y, t, ESParams{kP5}, exact);
        CHECK(std::abs(y_star - t.y) <= 2e-6);
    }
    SUBCASE("the x1 gradient is resolution-small at the converged state") {
        const auto traj = es::simulate_es(ESState{0.3, 0.6, 0.4}, ESParams{kP5}, 60);
        REQUIRE(traj.converged);
        CHECK(std::abs(es::es_grad_x1(traj.states.back(), ESParams{kP5})) <= 1e-4);
    }
}

TEST_CASE("swap symmetry") {
    const ESParams q{kP5};
    const ESStepOptions opt;
    SUBCASE("relabeling the coordinates (schedule included) swaps the trajectory exactly") {
        ESState a{0.3, 0.6, 0.4};
        ESState b = swap12(a);
        for (int k = 0; k < 8; ++k) {
            a = es::es_cavi_step(a, q, opt);
            b = relabeled_step(b, q, opt);
            CHECK(b.x1 == a.x2);
            CHECK(b.x2 == a.x1);
            CHECK(b.y == a.y);
        }
    }
    SUBCASE("under the fixed schedule, terminals are swaps of each other") {
        const auto ta = es::simulate_es(ESState{0.3, 0.6, 0.4}, q, 60);
        const auto tb = es::simulate_es(ESState{0.6, 0.3, 0.4}, q, 60);
        REQUIRE(ta.converged);
        REQUIRE(tb.converged);
        CHECK(es::es_distance(swap12(ta.states.back()), tb.states.back()) <= 2e-6);
    }
}

TEST_CASE("finite-difference gradient path") {
    ESStepOptions fd;
    fd.gradient = es::GradientSource::FiniteDifference;
    const auto traj = es::simulate_es(ESState{0.3, 0.6, 0.4}, ESParams{kP01}, 60, -1.0, fd);
    CHECK(traj.converged);
    // the fd path settles at the symmetric stationary point of the objective
    CHECK(traj.states.back().x1 == doctest::Approx(0.5).epsilon(2e-4));
    CHECK(traj.states.back().x2 == doctest::Approx(0.5).epsilon(2e-4));
}

TEST_CASE("convergence study report") {
    ESStepOptions opt;
    const auto rep = es::run_es_convergence_study(ESParams{kP5}, 3, 7, opt, 60, 41);
    CHECK(rep.inits.size() == 3);
    CHECK(rep.terminal_states.size() == 3);
    CHECK(rep.iterations.size() == 3);
    CHECK(std::isfinite(rep.elbo_min_grid));

    std::ostringstream os;
    es::write_convergence_report(os, rep);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["p"].get<double>() == doctest::Approx(kP5).epsilon(1e-15));
    CHECK(j["resolution"].get<double>() == 1e-6);
    CHECK(j["inits"].size() == 3);
    CHECK(j["terminal_states"].size() == 3);
    CHECK(j["iterations"].size() == 3);
    CHECK(j.contains("elbo_min_grid"));

    // identical seeds replay identically
    const auto rep2 = es::run_es_convergence_study(ESParams{kP5}, 3, 7, opt, 60, 41);
    for (int i = 0; i < 3; ++i) {
        CHECK(rep.terminal_states[i].x1 == rep2.terminal_states[i].x1);
        CHECK(rep.terminal_states[i].x2 == rep2.terminal_states[i].x2);
        CHECK(rep.terminal_states[i].y == rep2.terminal_states[i].y);
        CHECK(rep.iterations[i] == rep2.iterations[i]);
    }
}
