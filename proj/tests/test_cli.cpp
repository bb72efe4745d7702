#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "qsnm/cli.hpp"
#include "qsnm/manifold.hpp"

using namespace qsnm;

namespace {

#ifndef QSNM_TEST_DATA_DIR
#define QSNM_TEST_DATA_DIR "."
#endif

std::string data_path(const std::string& name) {
    return std::string(QSNM_TEST_DATA_DIR) + "/" + name;
}

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qsnm");
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    int code = cli_main(std::move(args));
    std::cout.rdbuf(old);
    return {code, captured.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string normalize_elapsed(const std::string& json_text) {
    auto j = nlohmann::ordered_json::parse(json_text);
    j.back()["elapsed_ms"] = 0;
    return j.dump(2);
}

}  // namespace

TEST_CASE("verify passes the bundled constant-field manifold") {
    auto res = run_cli({"verify", "--manifold", data_path("e1.json")});
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("23/23 passed") != std::string::npos);
}

TEST_CASE("verify runs deterministic random suites") {
    auto res = run_cli({"verify", "--random", "--dim", "3", "--seed", "42",
                        "--points", "50", "--format", "json"});
    CHECK(res.exit_code == 0);

    auto res2 = run_cli({"verify", "--random", "--dim", "3", "--seed", "42",
                         "--points", "50", "--format", "json"});
    CHECK(normalize_elapsed(res.out) == normalize_elapsed(res2.out));

    auto parsed = nlohmann::ordered_json::parse(res.out);
    CHECK(parsed.size() == 24);
    CHECK(parsed.back()["seed"] == 42);
    CHECK(parsed.back()["dimension"] == 3);
}

TEST_CASE("verify writes the same report to --out") {
    std::string out_path = "qsnm_cli_report.json";
    auto res = run_cli({"verify", "--manifold", data_path("e1.json"),
                        "--format", "json", "--out", out_path});
    CHECK(res.exit_code == 0);
    CHECK(slurp(out_path) == res.out);
    std::remove(out_path.c_str());
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli({}).exit_code == 2);                     // no subcommand
    CHECK(run_cli({"verify"}).exit_code == 2);             // no source
    CHECK(run_cli({"verify", "--manifold", data_path("e1.json"), "--random"})
              .exit_code == 2);                            // both sources
    CHECK(run_cli({"verify", "--random", "--dim", "9"}).exit_code == 2);
    CHECK(run_cli({"compute", "--tensor", "nope", "--manifold",
                   data_path("e1.json"), "--point", "0,0"})
              .exit_code == 2);                            // unknown tensor
    CHECK(run_cli({"compute", "--tensor", "R1", "--manifold",
                   data_path("e1.json"), "--point", "0,0,0"})
              .exit_code == 2);                            // wrong arity
}

TEST_CASE("I/O and parse problems exit with code 3") {
    CHECK(run_cli({"verify", "--manifold", "missing.json"}).exit_code == 3);

    std::string bad = "qsnm_cli_bad.json";
    {
        std::ofstream out(bad);
        out << "{\"dimension\": 2}";
    }
    CHECK(run_cli({"verify", "--manifold", bad}).exit_code == 3);
    {
        std::ofstream out(bad);
        out << R"({"dimension":2,"coordinates":["x","y"],
                   "G":[["0","1"],["-1","0"]],"pi":["0","0"]})";
    }
    CHECK(run_cli({"verify", "--manifold", bad}).exit_code == 3);  // degenerate
    std::remove(bad.c_str());
}

TEST_CASE("check failures exit with code 1") {
    // a manifold spec that parses fine but fails verification does not exist
    // among the theorems, so drive the exit path with an absurd tolerance
    auto res = run_cli({"verify", "--manifold", data_path("e1.json"), "--tol",
                        "-1"});
    CHECK(res.exit_code == 1);
}

TEST_CASE("compute prints the known curvature component") {
    auto res = run_cli({"compute", "--tensor", "R1", "--manifold",
                        data_path("e1.json"), "--point", "0,0"});
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("R1^{1}_{1,2,2} = 0.25") != std::string::npos);
    CHECK(res.out.find("= -0\n") == std::string::npos);  // no negative zeros

    auto g = run_cli({"compute", "--tensor", "g", "--manifold",
                      data_path("e1.json"), "--point", "0.5,0.5"});
    CHECK(g.exit_code == 0);
    CHECK(g.out.find("g_{1,1} = 1") != std::string::npos);

    auto P = run_cli({"compute", "--tensor", "P", "--manifold",
                      data_path("e1.json"), "--point", "0,0"});
    CHECK(P.out.find("P^{1} = 1") != std::string::npos);
}

TEST_CASE("list prints the whole catalog") {
    auto res = run_cli({"list"});
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("23 checks") != std::string::npos);
    CHECK(res.out.find("bianchi_R4_R5") != std::string::npos);
    CHECK(res.out.find("we will obtain the first Bianchi identities") !=
          std::string::npos);
}

TEST_CASE("gen emits byte-identical specs for a fixed seed") {
    std::string p1 = "qsnm_gen_a.json";
    std::string p2 = "qsnm_gen_b.json";
    CHECK(run_cli({"gen", "--dim", "2", "--seed", "42", "--out", p1}).exit_code ==
          0);
    CHECK(run_cli({"gen", "--dim", "2", "--seed", "42", "--out", p2}).exit_code ==
          0);
    CHECK(slurp(p1) == slurp(p2));

    // the generated spec is itself verifiable
    auto res = run_cli({"verify", "--manifold", p1, "--points", "20"});
    CHECK(res.exit_code == 0);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("gen to stdout matches the library serialization") {
    auto res = run_cli({"gen", "--dim", "2", "--seed", "7", "--out", "-"});
    CHECK(res.exit_code == 0);
    RandomManifoldConfig cfg;
    cfg.seed = 7;
    cfg.dimension = 2;
    CHECK(res.out == manifold_spec_to_json(random_manifold(cfg)));
}
