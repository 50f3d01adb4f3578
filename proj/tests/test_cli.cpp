#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "outforest/cli.hpp"

using namespace outforest;

namespace {

const std::string kData = OUTFOREST_DATA_DIR;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("cli laplacian") {
    const CliResult r = run({"laplacian", "--input", kData + "/seven_agents.dg"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find(" 2  -2   0   0   0   0  0") != std::string::npos);
    CHECK(r.out.find("0   0  -4   0   0  -1  5") != std::string::npos);

    const CliResult zero = run({"laplacian", "--input", kData + "/edgeless3.dg"});
    REQUIRE(zero.code == 0);
    CHECK(zero.out == "0  0  0\n0  0  0\n0  0  0\n");
}

TEST_CASE("cli reports parse errors with line numbers and a nonzero exit") {
    const CliResult missing = run({"laplacian", "--input", kData + "/does_not_exist.dg"});
    CHECK(missing.code != 0);
    CHECK(missing.out.empty());
    CHECK(missing.err.find("error:") != std::string::npos);

    std::ofstream bad("/tmp/outforest_bad.dg");
    bad << "n 2\na 1 2 oops\n";
    bad.close();
    const CliResult malformed = run({"laplacian", "--input", "/tmp/outforest_bad.dg"});
    CHECK(malformed.code != 0);
    CHECK(malformed.err.find("line 2") != std::string::npos);
}

TEST_CASE("cli forests census lines") {
    const CliResult seven = run({"forests", "--input", kData + "/seven_agents.dg"});
    REQUIRE(seven.code == 0);
    CHECK(seven.out.find("count=32, d=2, f=750\n") != std::string::npos);

    const CliResult cycle = run({"forests", "--input", kData + "/two_cycle.dg"});
    CHECK(cycle.out.find("count=2, d=1, f=2\n") != std::string::npos);
    CHECK(cycle.out.find("#1 weight=1 arcs=(1->2)\n") != std::string::npos);

    const CliResult empty = run({"forests", "--input", kData + "/edgeless3.dg"});
    CHECK(empty.out.find("count=1, d=3, f=1\n") != std::string::npos);
    CHECK(empty.out.find("#1 weight=1 arcs=()\n") != std::string::npos);
}

TEST_CASE("cli forests respects the cap") {
    const CliResult r =
        run({"forests", "--input", kData + "/seven_agents.dg", "--cap", "3"});
    CHECK(r.code != 0);
    CHECK(r.err.find("cap") != std::string::npos);
}

TEST_CASE("cli eigenprojection routes agree") {
    const CliResult forest =
        run({"eigenprojection", "--input", kData + "/seven_agents.dg", "--method", "forest"});
    REQUIRE(forest.code == 0);
    CHECK(forest.out.find("1/3") != std::string::npos);   // J(1,1) = 250/750
    CHECK(forest.out.find("2/3") != std::string::npos);
    CHECK(forest.out.find("method=forest exact=true") != std::string::npos);
    CHECK(forest.out.find("max_row_sum_error=0") != std::string::npos);

    const CliResult recursive =
        run({"eigenprojection", "--input", kData + "/seven_agents.dg", "--method", "recursive",
             "--exact"});
    REQUIRE(recursive.code == 0);
    // same matrix block, different method line
    const auto strip_first_line = [](const std::string& s) {
        return s.substr(s.find('\n') + 1);
    };
    CHECK(strip_first_line(forest.out) == strip_first_line(recursive.out));
}

TEST_CASE("cli eigenprojection polynomial requires roots") {
    const CliResult r = run(
        {"eigenprojection", "--input", kData + "/seven_agents.dg", "--method", "polynomial"});
    CHECK(r.code != 0);
    CHECK(r.err.find("--roots") != std::string::npos);

    const CliResult ok =
        run({"eigenprojection", "--input", kData + "/seven_agents.dg", "--method", "polynomial",
             "--roots", "2:1,3:1,5:3"});
    REQUIRE(ok.code == 0);
    CHECK(ok.out.find("exact=true") != std::string::npos);
    CHECK(ok.out.find("idempotency=0") != std::string::npos);
}

TEST_CASE("cli eigenprojection float mode") {
    const CliResult r = run({"eigenprojection", "--input", kData + "/two_cycle.dg", "--method",
                             "recursive", "--no-exact"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method=recursive exact=false") != std::string::npos);
    CHECK(r.out.find("0.5  0.5") != std::string::npos);
}

TEST_CASE("cli simulate json carries the exact predicted limit") {
    const CliResult r = run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "0,1",
                             "--json", "--horizon", "40", "--samples", "3"});
    REQUIRE(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j.at("predicted_limit_exact")[0] == nlohmann::json({{"num", 1}, {"den", 2}}));
    CHECK(j.at("predicted_limit")[0] == 0.5);
}

TEST_CASE("cli eigenprojection resolvent reports convergence") {
    const CliResult r = run({"eigenprojection", "--input", kData + "/seven_agents.dg",
                             "--method", "resolvent"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method=resolvent exact=false") != std::string::npos);
    CHECK(r.out.find("alpha=1000 ") != std::string::npos);
    CHECK(r.err.find("--exact has no effect") != std::string::npos);
}

TEST_CASE("cli simulate continuous golden run") {
    const CliResult r = run({"simulate", "--input", kData + "/seven_agents.dg", "--x0",
                             "1,10,5,7,9,*,*", "--horizon", "60", "--samples", "13"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("t,x1,x2,x3,x4,x5,x6,x7\n") != std::string::npos);
    CHECK(r.out.find("converged=true") != std::string::npos);
    CHECK(r.out.find("predicted=(7, 7, 7, 7, 7, 7, 7)") != std::string::npos);
    CHECK(r.err.find("note: free entries (*) at vertices 6,7") != std::string::npos);
}

TEST_CASE("cli simulate discrete and cesaro") {
    const CliResult cesaro =
        run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "0,1", "--discrete",
             "--tau", "1", "--cesaro", "--steps", "10000"});
    REQUIRE(cesaro.code == 0);
    CHECK(cesaro.out.find("# tau=1 strictness=boundary") != std::string::npos);
    CHECK(cesaro.out.find("limit=(0.5, 0.5)") != std::string::npos);

    const CliResult over = run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "0,1",
                                "--discrete", "--tau", "2"});
    CHECK(over.code != 0);
    CHECK(over.err.find("exceeds the row-stochastic bound 1") != std::string::npos);

    const CliResult oscillate = run({"simulate", "--input", kData + "/two_cycle.dg", "--x0",
                                     "0,1", "--discrete", "--tau", "1", "--steps", "7"});
    REQUIRE(oscillate.code == 0);
    CHECK(oscillate.out.find("converged=false") != std::string::npos);
    CHECK(oscillate.err.find("--cesaro") != std::string::npos);
}

TEST_CASE("cli degroot subcommand mirrors simulate --discrete") {
    const CliResult r = run({"degroot", "--input", kData + "/seven_agents.dg", "--x0",
                             "1,10,5,7,9,0,0", "--tau", "1/6", "--steps", "500"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# tau=1/6 strictness=strict") != std::string::npos);
    CHECK(r.out.find("converged=true") != std::string::npos);
    CHECK(r.out.find("predicted=(7, 7, 7, 7, 7, 7, 7)") != std::string::npos);

    const CliResult no_tau =
        run({"degroot", "--input", kData + "/two_cycle.dg", "--x0", "0,1"});
    CHECK(no_tau.code != 0);
}

TEST_CASE("cli analyze") {
    const CliResult bare = run({"analyze", "--input", kData + "/seven_agents.dg"});
    REQUIRE(bare.code == 0);
    CHECK(bare.out.find("components: {1,2}* {3,4,5}* {6} {7}") != std::string::npos);
    CHECK(bare.out.find("d=2 spanning_diverging_tree=false") != std::string::npos);

    const CliResult with_state = run(
        {"analyze", "--input", kData + "/seven_agents.dg", "--x0", "0,6,3,9,10,*,*"});
    REQUIRE(with_state.code == 0);
    CHECK(with_state.out.find("limit=(4, 4, 7, 7, 7, 26/5, 166/25)") != std::string::npos);
    CHECK(with_state.out.find("bicomponent {1,2} value 4") != std::string::npos);
    CHECK(with_state.out.find("bicomponent {3,4,5} value 7") != std::string::npos);
    CHECK(with_state.out.find("consensus_reached=false") != std::string::npos);
    CHECK(with_state.out.find("shared_value=pass betweenness=pass free_vertices=pass") !=
          std::string::npos);
    CHECK(with_state.out.find("time_shift=pass") != std::string::npos);

    const CliResult path = run({"analyze", "--input", kData + "/path3.dg"});
    REQUIRE(path.code == 0);
    CHECK(path.out.find("d=1 spanning_diverging_tree=true") != std::string::npos);
    CHECK(path.out.find("left_eigenvector=(1, 0, 0)") != std::string::npos);
}

TEST_CASE("cli json output is schema-tagged and byte-stable") {
    const std::vector<std::string> args = {"analyze", "--input", kData + "/seven_agents.dg",
                                           "--x0", "0,6,3,9,10,0,0", "--json"};
    const CliResult first = run(args);
    const CliResult second = run(args);
    REQUIRE(first.code == 0);
    CHECK(first.out == second.out);

    const nlohmann::json j = nlohmann::json::parse(first.out);
    CHECK(j.at("schema") == 1);
    CHECK(j.at("command") == "analyze");
    CHECK(j.at("d") == 2);
    CHECK(j.at("has_spanning_diverging_tree") == false);
    CHECK(j.at("limit")[5] == nlohmann::json({{"num", 26}, {"den", 5}}));
    CHECK(j.at("limit_structure").at("betweenness").at("pass") == true);

    const CliResult forests =
        run({"forests", "--input", kData + "/two_cycle.dg", "--json"});
    const nlohmann::json fj = nlohmann::json::parse(forests.out);
    CHECK(fj.at("schema") == 1);
    CHECK(fj.at("count") == 2);
    CHECK(fj.at("f") == nlohmann::json({{"num", 2}, {"den", 1}}));
    CHECK(fj.at("forests")[0].at("arcs")[0] == nlohmann::json({1, 2}));

    const CliResult lap =
        run({"laplacian", "--input", kData + "/two_cycle.dg", "--json"});
    const nlohmann::json lj = nlohmann::json::parse(lap.out);
    CHECK(lj.at("entries")[0][0] == nlohmann::json({{"num", 1}, {"den", 1}}));

    const CliResult sim = run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "0,1",
                               "--json", "--horizon", "30", "--samples", "4"});
    const nlohmann::json sj = nlohmann::json::parse(sim.out);
    CHECK(sj.at("schema") == 1);
    CHECK(sj.at("mode") == "continuous");
    CHECK(sj.at("samples").size() == 4);
    CHECK(sj.at("converged") == true);
}

TEST_CASE("cli requires exactly one subcommand") {
    const CliResult none = run({"--input", kData + "/two_cycle.dg"});
    CHECK(none.code != 0);
    const CliResult unknown = run({"frobnicate", "--input", kData + "/two_cycle.dg"});
    CHECK(unknown.code != 0);
}

TEST_CASE("cli x0 validation") {
    const CliResult missing =
        run({"simulate", "--input", kData + "/two_cycle.dg"});
    CHECK(missing.code != 0);
    CHECK(missing.err.find("initial state") != std::string::npos);

    const CliResult wrong_len =
        run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "1,2,3"});
    CHECK(wrong_len.code != 0);

    const CliResult junk =
        run({"simulate", "--input", kData + "/two_cycle.dg", "--x0", "1,fish"});
    CHECK(junk.code != 0);
}

TEST_CASE("cli warns when a free entry sits in a basic bicomponent") {
    const CliResult r = run({"analyze", "--input", kData + "/two_cycle.dg", "--x0", "*,1"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning: vertex 1") != std::string::npos);
}

TEST_CASE("cli reads the initial state from a file") {
    std::ofstream state("/tmp/outforest_x0.txt");
    state << "1 10 5\n7 9 * *\n";
    state.close();
    const CliResult r = run({"simulate", "--input", kData + "/seven_agents.dg", "--x0-file",
                             "/tmp/outforest_x0.txt", "--horizon", "60", "--samples", "7"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("predicted=(7, 7, 7, 7, 7, 7, 7)") != std::string::npos);

    const CliResult both = run({"simulate", "--input", kData + "/seven_agents.dg", "--x0", "1,2",
                                "--x0-file", "/tmp/outforest_x0.txt"});
    CHECK(both.code != 0);
    CHECK(both.err.find("not both") != std::string::npos);
}

TEST_CASE("cli resolvent accepts a custom alpha schedule") {
    const CliResult r = run({"eigenprojection", "--input", kData + "/two_cycle.dg", "--method",
                             "resolvent", "--alphas", "10,1000", "--no-exact"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("alpha=1000 ") != std::string::npos);

    const CliResult bad = run({"eigenprojection", "--input", kData + "/two_cycle.dg", "--method",
                               "resolvent", "--alphas", "1000,10"});
    CHECK(bad.code != 0);
}

TEST_CASE("cli polynomial float route") {
    const CliResult r =
        run({"eigenprojection", "--input", kData + "/two_cycle.dg", "--method", "polynomial",
             "--roots", "2", "--no-exact"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method=polynomial exact=false") != std::string::npos);
    CHECK(r.out.find("0.5  0.5") != std::string::npos);
}
