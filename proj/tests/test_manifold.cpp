#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "qsnm/manifold.hpp"
#include "test_util.hpp"

using namespace qsnm;

namespace {

std::string e1_json() {
    return R"({
  "dimension": 2,
  "coordinates": ["x", "y"],
  "G": [["1", "1"], ["-1", "1"]],
  "pi": ["1", "0"]
})";
}

}  // namespace

TEST_CASE("manifold specs round-trip through JSON") {
    ManifoldSpec spec = parse_manifold_spec(e1_json());
    CHECK(spec.dimension == 2);
    CHECK(spec.coordinates[1] == "y");
    CHECK(spec.G[1][0] == "-1");
    CHECK_FALSE(spec.box.has_value());

    std::string serialized = manifold_spec_to_json(spec);
    ManifoldSpec again = parse_manifold_spec(serialized);
    CHECK(manifold_spec_to_json(again) == serialized);

    SUBCASE("box and note survive the round trip") {
        spec.box = std::vector<std::array<double, 2>>{{0.5, 2.0}, {-1.0, 1.0}};
        spec.note = "fixture";
        ManifoldSpec boxed = parse_manifold_spec(manifold_spec_to_json(spec));
        REQUIRE(boxed.box.has_value());
        CHECK((*boxed.box)[0][0] == 0.5);
        CHECK(boxed.note == "fixture");
    }
}

TEST_CASE("manifold spec validation") {
    CHECK_THROWS_AS(parse_manifold_spec("not json"), SpecError);
    CHECK_THROWS_AS(parse_manifold_spec("[1,2]"), SpecError);
    // non-square G
    CHECK_THROWS_AS(parse_manifold_spec(R"({
        "dimension": 2, "coordinates": ["x","y"],
        "G": [["1","0","0"],["0","1","0"]], "pi": ["0","0"]})"),
                    SpecError);
    // pi length mismatch
    CHECK_THROWS_AS(parse_manifold_spec(R"({
        "dimension": 2, "coordinates": ["x","y"],
        "G": [["1","0"],["0","1"]], "pi": ["0"]})"),
                    SpecError);
    // dimension too small
    CHECK_THROWS_AS(parse_manifold_spec(R"({
        "dimension": 1, "coordinates": ["x"], "G": [["1"]], "pi": ["0"]})"),
                    SpecError);
}

TEST_CASE("loading a spec builds validated fields") {
    ManifoldSpec spec = parse_manifold_spec(e1_json());
    ManifoldData data(spec);
    CHECK(data.chart()->dimension() == 2);
    auto A = data.structure().A.eval(Point{0.0, 0.0});
    CHECK(A.at(std::vector<int>{1, 0}) == doctest::Approx(1.0));
    auto P = data.gen().P.eval(Point{0.0, 0.0});
    CHECK(P.at(std::vector<int>{0}) == doctest::Approx(1.0));

    SUBCASE("bad expression errors carry the entry position") {
        ManifoldSpec broken = spec;
        broken.G[0][1] = "x +* y";
        try {
            ManifoldData bad(broken);
            FAIL("expected a spec error");
        } catch (const SpecError& err) {
            CHECK(std::string(err.what()).find("G[1][2]") != std::string::npos);
            CHECK(std::string(err.what()).find("offset 3") != std::string::npos);
        }
    }

    SUBCASE("unknown identifiers are reported") {
        ManifoldSpec broken = spec;
        broken.pi[0] = "z";
        CHECK_THROWS_AS(ManifoldData{broken}, SpecError);
    }

    SUBCASE("degenerate symmetric parts are rejected with a point") {
        ManifoldSpec degenerate = spec;
        degenerate.G = {{"0", "1"}, {"-1", "0"}};
        try {
            ManifoldData bad(degenerate);
            FAIL("expected a degeneracy error");
        } catch (const DegeneracyError& err) {
            CHECK(err.point.size() == 2);
            CHECK(std::string(err.what()).find("point") != std::string::npos);
        }
    }
}

TEST_CASE("random manifolds are deterministic in the seed") {
    RandomManifoldConfig cfg;
    cfg.seed = 42;
    cfg.dimension = 3;
    ManifoldSpec a = random_manifold(cfg);
    ManifoldSpec b = random_manifold(cfg);
    CHECK(manifold_spec_to_json(a) == manifold_spec_to_json(b));

    cfg.seed = 43;
    ManifoldSpec c = random_manifold(cfg);
    CHECK(manifold_spec_to_json(a) != manifold_spec_to_json(c));
}

TEST_CASE("zero perturbation produces the flat identity metric") {
    RandomManifoldConfig cfg;
    cfg.seed = 5;
    cfg.dimension = 2;
    cfg.perturbation = 0.0;
    ManifoldData data(random_manifold(cfg));
    auto g = data.metric().g.eval(Point{0.3, -0.3});
    CHECK(g.at(std::vector<int>{0, 0}) == 1.0);
    CHECK(g.at(std::vector<int>{0, 1}) == 0.0);
    CHECK(data.lc().as_tensor_field().eval(Point{0.3, -0.3}).max_abs() == 0.0);
}

TEST_CASE("default random metrics stay far from degeneracy") {
    // eps = 0.1, degree 2, n = 3: the determinant of g stays above 0.5 on a
    // 10x10x10 grid over the sample box
    for (std::uint64_t seed : {1ull, 42ull, 1234ull}) {
        RandomManifoldConfig cfg;
        cfg.seed = seed;
        cfg.dimension = 3;
        ManifoldData data(random_manifold(cfg));
        double min_det = 1e300;
        for (int a = 0; a < 10; ++a)
            for (int b = 0; b < 10; ++b)
                for (int c = 0; c < 10; ++c) {
                    Point p{-1.0 + 2.0 * a / 9.0, -1.0 + 2.0 * b / 9.0,
                            -1.0 + 2.0 * c / 9.0};
                    min_det = std::min(min_det,
                                       std::abs(evaluate(data.metric().det_g, p)));
                }
        CHECK(min_det > 0.5);
    }
}

TEST_CASE("trig entries parse and keep the structure field non-constant") {
    RandomManifoldConfig cfg;
    cfg.seed = 11;
    cfg.dimension = 3;
    cfg.trig_terms = true;
    ManifoldSpec spec = random_manifold(cfg);
    bool has_trig = false;
    for (const auto& row : spec.G)
        for (const auto& entry : row)
            if (entry.find("sin(") != std::string::npos ||
                entry.find("cos(") != std::string::npos)
                has_trig = true;
    CHECK(has_trig);

    ManifoldData data(spec);
    auto a0 = data.structure().A.eval(Point{-0.5, 0.2, 0.4});
    auto a1 = data.structure().A.eval(Point{0.5, -0.2, -0.4});
    CHECK(max_abs_diff(a0, a1) > 1e-6);
}

TEST_CASE("manifold files move through the filesystem intact") {
    RandomManifoldConfig cfg;
    cfg.seed = 77;
    cfg.dimension = 2;
    ManifoldSpec spec = random_manifold(cfg);
    std::string path = "qsnm_test_manifold.json";
    write_manifold_file(spec, path);
    ManifoldSpec loaded = read_manifold_file(path);
    CHECK(manifold_spec_to_json(loaded) == manifold_spec_to_json(spec));
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_manifold_file("definitely/absent.json"), SpecError);
}

TEST_CASE("fnv1a fingerprints are stable") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("qsnm") != fnv1a_hex("qsnn"));
}

TEST_CASE("tensor catalog covers every advertised name") {
    ManifoldData data(parse_manifold_spec(e1_json()));
    for (const std::string& name : ManifoldData::tensor_names()) {
        TensorField t = data.tensor_by_name(name);
        CHECK(t.size() > 0);
    }
    CHECK_THROWS_AS(data.tensor_by_name("bogus"), SpecError);

    // spot values on the constant-field manifold
    auto T = data.tensor_by_name("T").eval(Point{0, 0});
    CHECK(T.at(std::vector<int>{0, 0, 1}) == doctest::Approx(1.0));
    auto R5 = data.tensor_by_name("R5").eval(Point{0, 0});
    CHECK(R5.at(std::vector<int>{0, 0, 1, 1}) == doctest::Approx(-0.25));
    auto d1F = data.tensor_by_name("d1F").eval(Point{0, 0});
    CHECK(d1F.max_abs() <= 1e-15);
}
