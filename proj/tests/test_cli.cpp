#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli_commands.hpp"

#include "cavidyn/edward_sokal.hpp"
#include "cavidyn/ising.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using cavidyn::cli::run_cli;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    return lines;
}

std::vector<double> split_csv_row(const std::string& line) {
    std::vector<double> vals;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) vals.push_back(std::stod(field));
    return vals;
}

} // namespace

TEST_CASE("simulate ising-seq emits the trajectory CSV") {
    const auto r = run({"simulate", "--model", "ising-seq", "--beta", "1.2", "--init", "0.3,0.3",
                        "--iters", "20"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "iter,zeta,xi,elbo");
    const auto last = split_csv_row(lines.back());
    REQUIRE(last.size() == 4);
    CHECK(last[1] == doctest::Approx(0.17071).epsilon(1e-4));
    CHECK(last[2] == doctest::Approx(0.17071).epsilon(1e-4));
    CHECK(r.out.find("# terminal=") != std::string::npos);
}

TEST_CASE("trajectory CSV round-trips: elbo column matches recomputation") {
    const auto r = run({"simulate", "--model", "ising-seq", "--beta", "-1.2", "--init", "0.31,0.73",
                        "--iters", "50"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = split_csv_row(lines[i]);
        REQUIRE(row.size() == 4);
        const double recomputed =
            cavidyn::ising::elbo(cavidyn::ising::MeanFieldState{row[1], row[2]},
                                 cavidyn::ising::IsingParams{-1.2});
        CHECK(std::abs(row[3] - recomputed) <= 1e-12);
    }
}

TEST_CASE("simulate ising-par reports the 2-cycle terminal") {
    const auto r = run({"simulate", "--model", "ising-par", "--beta", "-1.2", "--init", "0.3,0.3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# terminal=cycle2") != std::string::npos);
}

TEST_CASE("simulate es converges within 50 rows") {
    const auto r = run({"simulate", "--model", "es", "--p", "0.9932621", "--init", "0.3,0.6,0.4"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    CHECK(lines[0] == "iter,x1,x2,y,elbo");
    CHECK(lines.size() - 1 <= 51);
    CHECK(r.out.find("# terminal=fixed_point") != std::string::npos);
    // round-trip: the serialized states reproduce the elbo column
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = split_csv_row(lines[i]);
        REQUIRE(row.size() == 5);
        const double recomputed = cavidyn::es::es_elbo(
            cavidyn::es::ESState{row[1], row[2], row[3]}, cavidyn::es::ESParams{0.9932621});
        CHECK(std::abs(row[4] - recomputed) <= 1e-12);
    }
}

TEST_CASE("simulate es honors --exact-grid and --resolution") {
    const std::vector<std::string> base = {"simulate", "--model", "es",     "--p",
                                           "0.5",      "--init",  "0.3,0.6,0.4", "--resolution",
                                           "0.0001",   "--iters", "8"};
    auto with_flag = base;
    with_flag.push_back("--exact-grid");
    const auto exact = run(with_flag);
    const auto twostage = run(base);
    REQUIRE(exact.code == 0);
    REQUIRE(twostage.code == 0);
    // at this resolution the two-stage scan degenerates to the full scan
    CHECK(exact.out == twostage.out);
    // explicit tolerance reaches max_iters instead of converging
    const auto r = run({"simulate", "--model", "es", "--p", "0.5", "--init", "0.3,0.6,0.4",
                        "--resolution", "0.0001", "--tol", "1e-12", "--iters", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# terminal=max_iters") != std::string::npos);
}

TEST_CASE("seeded random es initialization is deterministic") {
    const auto a = run({"simulate", "--model", "es", "--p", "0.5", "--seed", "9", "--iters", "5"});
    const auto b = run({"simulate", "--model", "es", "--p", "0.5", "--seed", "9", "--iters", "5"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("fixed-points JSON") {
    SUBCASE("three entries at beta = 1.2") {
        const auto r = run({"fixed-points", "--family", "sigmoid", "--param", "1.2"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        REQUIRE(j.size() == 3);
        CHECK(j[0]["location"].get<double>() == doctest::Approx(0.17071).epsilon(1e-4));
        CHECK(j[1]["stability"] == "repelling_hyperbolic");
        CHECK(j[2]["stability"] == "attracting_hyperbolic");
        CHECK(j[0]["evidence"].contains("f_x"));
    }
    SUBCASE("constant map at beta = 0") {
        const auto r = run({"fixed-points", "--family", "sigmoid", "--param", "0.0"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        REQUIRE(j.size() == 1);
        CHECK(j[0]["location"].get<double>() == doctest::Approx(0.5));
        CHECK(j[0]["multiplier"].get<double>() == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("logistic at mu = 2.9") {
        const auto r = run({"fixed-points", "--family", "logistic", "--param", "2.9"});
        REQUIRE(r.code == 0);
        CHECK(nlohmann::json::parse(r.out).size() == 2);
    }
}

TEST_CASE("bifurcate JSON carries all condition entries") {
    const auto r = run({"bifurcate", "--family", "logistic", "--from", "2.5", "--to", "3.2",
                        "--step", "0.01"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.size() >= 1);
    int confirmed = 0;
    for (const auto& c : j) {
        if (c["verdict"] == "confirmed") {
            ++confirmed;
            CHECK(c["kind"] == "period_doubling");
            CHECK(c["alpha_star"].get<double>() == doctest::Approx(3.0).epsilon(1e-6));
        }
        CHECK(c["conditions"].size() >= 3);
        for (const auto& cond : c["conditions"]) {
            CHECK(cond.contains("name"));
            CHECK(cond.contains("value"));
            CHECK(cond.contains("threshold"));
            CHECK(cond.contains("satisfied"));
        }
    }
    CHECK(confirmed == 1);
}

TEST_CASE("surface grid with argmax comments") {
    SUBCASE("unique argmax at the symmetric point for beta = 0.7") {
        const auto r = run({"surface", "--beta", "0.7", "--grid", "41"});
        REQUIRE(r.code == 0);
        std::istringstream in(r.out);
        std::string l1, l2, header;
        std::getline(in, l1);
        std::getline(in, l2);
        std::getline(in, header);
        CHECK(l1 == "# argmax_count=1");
        CHECK(l2.find("0.5:0.5") != std::string::npos);
        CHECK(header == "zeta,xi,elbo");
        const auto lines = data_lines(r.out);
        CHECK(lines.size() == 1 + 41 * 41);
    }
    SUBCASE("two mirror-symmetric argmax points for beta = 1.2") {
        const auto r = run({"surface", "--beta", "1.2", "--grid", "41"});
        REQUIRE(r.code == 0);
        std::istringstream in(r.out);
        std::string l1;
        std::getline(in, l1);
        CHECK(l1 == "# argmax_count=2");
    }
    SUBCASE("beta = 0: entropy maximization at the symmetric point") {
        const auto r = run({"surface", "--beta", "0", "--grid", "41"});
        REQUIRE(r.code == 0);
        std::istringstream in(r.out);
        std::string l1, l2;
        std::getline(in, l1);
        std::getline(in, l2);
        CHECK(l1 == "# argmax_count=1");
        CHECK(l2.find("0.5:0.5") != std::string::npos);
    }
    SUBCASE("threaded evaluation produces identical output") {
        const auto serial = run({"surface", "--beta", "1.2", "--grid", "33"});
        const auto threaded = run({"surface", "--beta", "1.2", "--grid", "33", "--threads", "4"});
        REQUIRE(serial.code == 0);
        REQUIRE(threaded.code == 0);
        CHECK(serial.out == threaded.out);
    }
}

TEST_CASE("cobweb segments") {
    const auto r = run({"cobweb", "--family", "logistic", "--param", "3.1", "--init", "0.2",
                        "--iters", "100"});
    REQUIRE(r.code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 1 + 200);
    CHECK(lines[0] == "x0,y0,x1,y1");
    const auto first = split_csv_row(lines[1]);
    CHECK(first[0] == 0.2);  // first segment starts at (init, init)
    CHECK(first[1] == 0.2);
    // late endpoints accumulate on the 2-cycle
    const auto late = split_csv_row(lines.back());
    const double y = late[3];
    const bool on_cycle = std::abs(y - 0.558014) < 1e-4 || std::abs(y - 0.7645665) < 1e-4;
    CHECK(on_cycle);

    const auto r2 = run({"cobweb", "--family", "sigmoid", "--param", "0.7", "--init", "0.1",
                         "--iters", "60"});
    const auto l2 = data_lines(r2.out);
    CHECK(split_csv_row(l2.back())[3] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("exit codes") {
    SUBCASE("usage errors exit 2") {
        CHECK(run({"simulate", "--model", "nonsense"}).code == 2);
        CHECK(run({"fixed-points", "--family", "sigmoid"}).code == 2);  // missing --param
        CHECK(run({"simulate", "--model", "ising-seq", "--init", "0.3,0.3"}).code == 2);  // no beta
        CHECK(run({"simulate", "--model", "es", "--p", "0.5", "--init", "0.3,0.6"}).code == 2);
        CHECK(run({"unknown-command"}).code == 2);
    }
    SUBCASE("domain errors exit 1") {
        CHECK(run({"simulate", "--model", "ising-seq", "--beta", "1.0", "--init", "1.5,0.3"}).code ==
              1);
        CHECK(run({"simulate", "--model", "es", "--p", "1.5", "--init", "0.3,0.6,0.4"}).code == 1);
        CHECK(run({"cobweb", "--family", "sigmoid", "--param", "0.7", "--init", "1.4"}).code == 1);
    }
    SUBCASE("success exits 0 and help exits 0") {
        CHECK(run({"--help"}).code == 0);
        CHECK(run({"fixed-points", "--family", "sigmoid", "--param", "0.7"}).code == 0);
    }
}

TEST_CASE("--out writes a file and --config feeds flag values") {
    const std::string out_path = "cli_test_trajectory.csv";
    const auto r = run({"simulate", "--model", "ising-seq", "--beta", "0.7", "--init", "0.4,0.6",
                        "--out", out_path});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(out_path);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "iter,zeta,xi,elbo");
    f.close();
    std::remove(out_path.c_str());

    const std::string cfg_path = "cli_test_config.ini";
    {
        std::ofstream cfg(cfg_path);
        cfg << "[simulate]\n"
            << "model = ising-seq\n"
            << "beta = 1.2\n"
            << "init = 0.3,0.3\n"
            << "iters = 20\n";
    }
    const auto rc = run({"--config", cfg_path, "simulate"});
    REQUIRE(rc.code == 0);
    const auto lines = data_lines(rc.out);
    const auto last = split_csv_row(lines.back());
    CHECK(last[1] == doctest::Approx(0.17071).epsilon(1e-4));

    // flags override config values: beta 0.7 drives the state to 0.5
    const auto ro = run({"--config", cfg_path, "simulate", "--beta", "0.7", "--iters", "100"});
    REQUIRE(ro.code == 0);
    const auto last_o = split_csv_row(data_lines(ro.out).back());
    CHECK(last_o[1] == doctest::Approx(0.5).epsilon(1e-6));

    // unknown keys in the config file are rejected
    {
        std::ofstream cfg(cfg_path);
        cfg << "[simulate]\nmodel = ising-seq\nbeta = 1.0\ninit = 0.3,0.3\nbogus_key = 1\n";
    }
    CHECK(run({"--config", cfg_path, "simulate"}).code == 2);
    std::remove(cfg_path.c_str());
}
