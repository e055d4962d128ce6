#include "cli_commands.hpp"

#include "cavidyn/bifurcation.hpp"
#include "cavidyn/edward_sokal.hpp"
#include "cavidyn/ising.hpp"
#include "cavidyn/map1d.hpp"
#include "cavidyn/scalar_dynamics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace cavidyn::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

MapFamily parse_family(const std::string& name) {
    if (name == "sigmoid") return MapFamily::SigmoidCavi;
    if (name == "sigmoid2") return MapFamily::SigmoidCaviSecondIterate;
    if (name == "logistic") return MapFamily::Logistic;
    if (name == "logistic2") return MapFamily::LogisticSecondIterate;
    throw UsageError("unknown family '" + name + "' (expected sigmoid|sigmoid2|logistic|logistic2)");
}

// writes through to --out when set, the provided stream otherwise
void with_output(const std::string& out_path, std::ostream& out,
                 const std::function<void(std::ostream&)>& body) {
    if (out_path.empty()) {
        body(out);
        return;
    }
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    body(f);
}

nlohmann::json report_to_json(const FixedPointReport& rep) {
    nlohmann::json evidence{{"f_x", rep.evidence.f_x}};
    if (rep.evidence.f_xx) evidence["f_xx"] = *rep.evidence.f_xx;
    if (rep.evidence.f_xxx) evidence["f_xxx"] = *rep.evidence.f_xxx;
    if (rep.evidence.schwarzian) evidence["schwarzian"] = *rep.evidence.schwarzian;
    return {{"location", rep.location},
            {"multiplier", rep.multiplier},
            {"stability", stability_name(rep.stability)},
            {"evidence", evidence}};
}

nlohmann::json check_to_json(const BifurcationCheck& check) {
    auto conditions = nlohmann::json::array();
    for (const auto& c : check.conditions) {
        conditions.push_back({{"name", c.name},
                              {"value", c.value},
                              {"threshold", c.threshold},
                              {"satisfied", c.satisfied}});
    }
    return {{"kind", kind_name(check.kind)},
            {"x_star", check.x_star},
            {"alpha_star", check.alpha_star},
            {"verdict", verdict_name(check.verdict)},
            {"criticality", criticality_name(check.criticality)},
            {"conditions", conditions}};
}

struct SimulateArgs {
    std::string model;
    double beta = 0.0;
    bool has_beta = false;
    double p = 0.0;
    bool has_p = false;
    std::vector<double> init;
    int iters = 100;
    double tol = 1e-10;
    bool has_tol = false;
    double j12 = 1.0, h1 = 0.0, h2 = 0.0;
    double resolution = 1e-6;
    bool exact_grid = false;
    unsigned seed = 0;
    std::string out_path;
};

void run_simulate_ising(const SimulateArgs& a, std::ostream& os) {
    if (!a.has_beta) throw UsageError("--beta is required for ising models");
    if (a.init.size() != 2) throw UsageError("--init needs two values for ising models");
    if (!(a.init[0] >= 0.0 && a.init[0] <= 1.0 && a.init[1] >= 0.0 && a.init[1] <= 1.0)) {
        throw std::domain_error("ising initialization must lie in [0,1]^2");
    }
    const ising::IsingParams params{a.beta, a.j12, a.h1, a.h2};
    const auto mode = a.model == "ising-seq" ? ising::UpdateMode::Sequential
                                             : ising::UpdateMode::Parallel;
    const auto rec = ising::simulate(ising::MeanFieldState{a.init[0], a.init[1]}, params, mode,
                                     a.iters, a.tol);
    os << "iter,zeta,xi,elbo\n";
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        os << k << ',' << fmt17(rec.states[k].zeta) << ',' << fmt17(rec.states[k].xi) << ','
           << fmt17(rec.elbos[k]) << '\n';
    }
    switch (rec.terminal.kind) {
    case ising::TerminalKind::ConvergedToFixedPoint:
        os << "# terminal=fixed_point zeta=" << fmt17(rec.terminal.fixed_point.zeta)
           << " xi=" << fmt17(rec.terminal.fixed_point.xi) << '\n';
        break;
    case ising::TerminalKind::ConvergedToCycle:
        os << "# terminal=cycle2";
        for (const auto& s : rec.terminal.cycle) {
            os << " (" << fmt17(s.zeta) << ';' << fmt17(s.xi) << ')';
        }
        os << '\n';
        break;
    case ising::TerminalKind::MaxIterations:
        os << "# terminal=max_iters\n";
        break;
    }
}

void run_simulate_es(const SimulateArgs& a, std::ostream& os) {
    if (!a.has_p) throw UsageError("--p is required for the es model");
    es::ESState s0;
    if (a.init.empty()) {
        unsigned long long rng = a.seed;
        s0 = es::random_interior_state(rng);
    } else if (a.init.size() == 3) {
        s0 = es::ESState{a.init[0], a.init[1], a.init[2]};
        if (!(s0.x1 > 0 && s0.x1 < 1 && s0.x2 > 0 && s0.x2 < 1 && s0.y > 0 && s0.y < 1)) {
            throw std::domain_error("es initialization must lie strictly inside (0,1)^3");
        }
    } else {
        throw UsageError("--init needs three values for the es model");
    }
    es::ESStepOptions opt;
    opt.resolution = a.resolution;
    opt.mode = a.exact_grid ? es::LineSearchMode::ExactGrid : es::LineSearchMode::TwoStage;
    const double tol = a.has_tol ? a.tol : -1.0;
    const auto traj = es::simulate_es(s0, es::ESParams{a.p}, a.iters, tol, opt);
    os << "iter,x1,x2,y,elbo\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        os << k << ',' << fmt17(s.x1) << ',' << fmt17(s.x2) << ',' << fmt17(s.y) << ','
           << fmt17(traj.elbos[k]) << '\n';
    }
    if (traj.converged) {
        const auto& s = traj.states.back();
        os << "# terminal=fixed_point x1=" << fmt17(s.x1) << " x2=" << fmt17(s.x2)
           << " y=" << fmt17(s.y) << '\n';
    } else {
        os << "# terminal=max_iters\n";
    }
}

} // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CAVI dynamics toolkit: fixed points, cycles, bifurcations and "
                 "trajectory exports for the two-node Ising model and its "
                 "Edward-Sokal coupling"};
    app.require_subcommand(1);
    app.set_config("--config")->description("key = value config file; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);  // unknown keys are errors

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Iterate a model and emit a trajectory CSV");
    c_sim->add_option("--model", sim.model, "ising-seq | ising-par | es")
        ->required()
        ->check(CLI::IsMember({"ising-seq", "ising-par", "es"}));
    c_sim->add_option("--beta", sim.beta, "inverse temperature (ising)")
        ->each([&](const std::string&) { sim.has_beta = true; });
    c_sim->add_option("--p", sim.p, "edge weight in (0,1) (es)")
        ->each([&](const std::string&) { sim.has_p = true; });
    c_sim->add_option("--init", sim.init, "comma-separated initialization")->delimiter(',');
    c_sim->add_option("--iters", sim.iters, "maximum iterations")->check(CLI::PositiveNumber);
    c_sim->add_option("--tol", sim.tol, "convergence tolerance (max-norm)")
        ->each([&](const std::string&) { sim.has_tol = true; });
    c_sim->add_option("--j12", sim.j12, "interaction strength (ising)");
    c_sim->add_option("--h1", sim.h1, "external field on node 1 (ising)");
    c_sim->add_option("--h2", sim.h2, "external field on node 2 (ising)");
    c_sim->add_option("--resolution", sim.resolution, "line-search grid step (es)");
    c_sim->add_flag("--exact-grid", sim.exact_grid, "full-grid line search (es)");
    c_sim->add_option("--seed", sim.seed, "seed for a random es initialization");
    c_sim->add_option("--out", sim.out_path, "write to file instead of stdout");
    c_sim->callback([&] {
        with_output(sim.out_path, out, [&](std::ostream& os) {
            if (sim.model == "es") {
                run_simulate_es(sim, os);
            } else {
                run_simulate_ising(sim, os);
            }
        });
    });

    struct {
        std::string family;
        double param = 0.0;
        std::string out_path;
    } fp;
    auto* c_fp = app.add_subcommand("fixed-points", "Fixed points of a map family as JSON");
    c_fp->add_option("--family", fp.family, "sigmoid | sigmoid2 | logistic | logistic2")->required();
    c_fp->add_option("--param", fp.param, "family parameter")->required();
    c_fp->add_option("--out", fp.out_path, "write to file instead of stdout");
    c_fp->callback([&] {
        const Map1D map{parse_family(fp.family), fp.param};
        auto reports = nlohmann::json::array();
        for (const auto& rep : find_fixed_points(map)) reports.push_back(report_to_json(rep));
        with_output(fp.out_path, out, [&](std::ostream& os) { os << reports.dump(2) << '\n'; });
    });

    struct {
        std::string family;
        double from = 0.0, to = 0.0, step = 0.01;
        std::string out_path;
    } bif;
    auto* c_bif = app.add_subcommand("bifurcate", "Scan a parameter range for bifurcations");
    c_bif->add_option("--family", bif.family)->required();
    c_bif->add_option("--from", bif.from, "lower parameter bound")->required();
    c_bif->add_option("--to", bif.to, "upper parameter bound")->required();
    c_bif->add_option("--step", bif.step, "sweep step");
    c_bif->add_option("--out", bif.out_path, "write to file instead of stdout");
    c_bif->callback([&] {
        const auto checks = scan_bifurcations(parse_family(bif.family), bif.from, bif.to, bif.step);
        auto list = nlohmann::json::array();
        for (const auto& c : checks) list.push_back(check_to_json(c));
        with_output(bif.out_path, out, [&](std::ostream& os) { os << list.dump(2) << '\n'; });
    });

    struct {
        double beta = 0.0;
        int grid = 201;
        double j12 = 1.0, h1 = 0.0, h2 = 0.0;
        int threads = 1;
        std::string out_path;
    } surf;
    auto* c_surf = app.add_subcommand("surface", "ELBO values on an interior grid of (0,1)^2");
    c_surf->add_option("--beta", surf.beta)->required();
    c_surf->add_option("--grid", surf.grid, "points per axis")->check(CLI::Range(2, 100000));
    c_surf->add_option("--j12", surf.j12);
    c_surf->add_option("--h1", surf.h1);
    c_surf->add_option("--h2", surf.h2);
    c_surf->add_option("--threads", surf.threads, "worker threads; output order is unchanged")
        ->check(CLI::PositiveNumber);
    c_surf->add_option("--out", surf.out_path, "write to file instead of stdout");
    c_surf->callback([&] {
        const ising::IsingParams params{surf.beta, surf.j12, surf.h1, surf.h2};
        const int g = surf.grid;
        auto node = [&](int i) { return static_cast<double>(i + 1) / (g + 1); };
        std::vector<std::vector<double>> values(g, std::vector<double>(g));
        std::vector<std::string> rows(g);
        auto fill = [&](int row_begin, int row_end) {
            for (int i = row_begin; i < row_end; ++i) {
                std::ostringstream line;
                const double zeta = node(i);
                for (int j = 0; j < g; ++j) {
                    const double xi = node(j);
                    values[i][j] = ising::elbo(ising::MeanFieldState{zeta, xi}, params);
                    line << fmt17(zeta) << ',' << fmt17(xi) << ',' << fmt17(values[i][j]) << '\n';
                }
                rows[i] = line.str();
            }
        };
        const int n_threads = std::min(surf.threads, g);
        if (n_threads <= 1) {
            fill(0, g);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (g + n_threads - 1) / n_threads;
            for (int t = 0; t < n_threads; ++t) {
                const int lo = t * chunk;
                const int hi = std::min(g, lo + chunk);
                if (lo < hi) pool.emplace_back(fill, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        // grid argmax points of the ELBO (ties within 1e-12)
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) best = std::max(best, values[i][j]);
        }
        std::vector<std::pair<double, double>> argmax;
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) {
                if (values[i][j] >= best - 1e-12) argmax.emplace_back(node(i), node(j));
            }
        }
        with_output(surf.out_path, out, [&](std::ostream& os) {
            os << "# argmax_count=" << argmax.size() << '\n';
            os << "# argmax_points=";
            for (std::size_t k = 0; k < argmax.size(); ++k) {
                if (k) os << ';';
                os << fmt17(argmax[k].first) << ':' << fmt17(argmax[k].second);
            }
            os << '\n' << "zeta,xi,elbo\n";
            for (const auto& r : rows) os << r;
        });
    });

    struct {
        std::string family;
        double param = 0.0;
        double init = 0.0;
        int iters = 100;
        std::string out_path;
    } cob;
    auto* c_cob = app.add_subcommand("cobweb", "Cobweb segment endpoints for a scalar map");
    c_cob->add_option("--family", cob.family)->required();
    c_cob->add_option("--param", cob.param)->required();
    c_cob->add_option("--init", cob.init)->required();
    c_cob->add_option("--iters", cob.iters)->check(CLI::PositiveNumber);
    c_cob->add_option("--out", cob.out_path, "write to file instead of stdout");
    c_cob->callback([&] {
        const Map1D map{parse_family(cob.family), cob.param};
        with_output(cob.out_path, out, [&](std::ostream& os) {
            os << "x0,y0,x1,y1\n";
            double x = cob.init;
            for (int k = 0; k < cob.iters; ++k) {
                const double fx = eval(map, x);
                os << fmt17(x) << ',' << fmt17(x) << ',' << fmt17(x) << ',' << fmt17(fx) << '\n';
                os << fmt17(x) << ',' << fmt17(fx) << ',' << fmt17(fx) << ',' << fmt17(fx) << '\n';
                x = fx;
            }
        });
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        err << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const std::length_error& e) {
        err << "domain error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace cavidyn::cli
