#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "qsnm/expr.hpp"
#include "test_util.hpp"

using namespace qsnm;

namespace {

const std::vector<std::string> xy = {"x", "y"};

Expr parse_xy(const std::string& text) { return parse(text, xy); }

}  // namespace

TEST_CASE("parse produces the grammar-forced structure") {
    Expr zero = parse_xy("0");
    CHECK(zero.kind() == ExprKind::Constant);
    CHECK(zero.constant_value() == 0.0);

    Expr e = parse_xy("x^2 + sin(y)");
    REQUIRE(e.kind() == ExprKind::Add);
    REQUIRE(e.lhs().kind() == ExprKind::Pow);
    CHECK(e.lhs().exponent() == 2);
    CHECK(e.lhs().lhs().kind() == ExprKind::Coordinate);
    CHECK(e.lhs().lhs().coordinate_index() == 0);
    REQUIRE(e.rhs().kind() == ExprKind::Sin);
    CHECK(e.rhs().arg().coordinate_index() == 1);
}

TEST_CASE("parse reports positions and identifier errors") {
    try {
        parse_xy("x +* y");
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.offset == 3);
    }

    CHECK_THROWS_AS(parse_xy("x + z"), ParseError);
    CHECK_THROWS_AS(parse_xy("sin x"), ParseError);    // missing '('
    CHECK_THROWS_AS(parse_xy("sin(x, y)"), ParseError);  // arity
    CHECK_THROWS_AS(parse_xy("sin()"), ParseError);
    CHECK_THROWS_AS(parse_xy("x^y"), ParseError);      // non-integer exponent
    CHECK_THROWS_AS(parse_xy("x^1.5"), ParseError);
    CHECK_THROWS_AS(parse_xy("(x + y"), ParseError);
    CHECK_THROWS_AS(parse_xy(""), ParseError);
    CHECK_THROWS_AS(parse_xy("x(y)"), ParseError);     // coordinate call
}

TEST_CASE("parse accepts precedence, unary minus and literals") {
    CHECK(evaluate(parse_xy("1 + 2 * 3"), Point{0, 0}) == doctest::Approx(7.0));
    CHECK(evaluate(parse_xy("(1 + 2) * 3"), Point{0, 0}) == doctest::Approx(9.0));
    // the grammar binds unary minus inside the atom, so -x^2 is (-x)^2
    CHECK(evaluate(parse_xy("-x^2"), Point{3, 0}) == doctest::Approx(9.0));
    CHECK(evaluate(parse_xy("-(x^2)"), Point{3, 0}) == doctest::Approx(-9.0));
    CHECK(evaluate(parse_xy("2 - 3 - 4"), Point{0, 0}) == doctest::Approx(-5.0));
    CHECK(evaluate(parse_xy("12 / 4 / 3"), Point{0, 0}) == doctest::Approx(1.0));
    CHECK(evaluate(parse_xy("1.5e2"), Point{0, 0}) == doctest::Approx(150.0));
    CHECK(evaluate(parse_xy("x^-2"), Point{2, 0}) == doctest::Approx(0.25));
}

TEST_CASE("evaluate matches plain arithmetic") {
    CHECK(evaluate(Expr::constant(3.0), Point{1, 1}) == 3.0);
    CHECK(evaluate(parse_xy("x^2 + sin(y)"), Point{2, 0}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(evaluate(parse_xy("1/x"), Point{0, 1}), DomainError);
    CHECK_THROWS_AS(evaluate(parse_xy("ln(x)"), Point{-1, 0}), DomainError);
    CHECK_THROWS_AS(evaluate(parse_xy("sqrt(x)"), Point{-1, 0}), DomainError);
    CHECK_THROWS_AS(evaluate(parse_xy("x^-1"), Point{0, 0}), DomainError);
}

TEST_CASE("differentiate handles the calculus table") {
    Expr c = Expr::constant(42.0);
    Expr dc = differentiate(c, 0);
    CHECK(dc.is_constant(0.0));

    Expr sq = parse_xy("x^2");
    CHECK(evaluate(differentiate(sq, 0), Point{3, 0}) == doctest::Approx(6.0));

    // d/dx [sin(x)*y] at (0,5) = cos(0)*5 = 5, checked against the oracle
    Expr e = parse_xy("sin(x)*y");
    Expr de = differentiate(e, 0);
    Point p{0, 5};
    double sym = evaluate(de, p);
    CHECK(sym == doctest::Approx(5.0));
    CHECK(std::abs(sym - test::central_difference(e, p, 0)) <= 1e-7);

    // quotient, sqrt, ln, exp rules against the oracle
    for (const char* text : {"x / (2 + y^2)", "sqrt(1.5 + x^2)",
                             "ln(1.5 + y^2)", "exp(x * y)", "cos(x - y)"}) {
        Expr f = parse_xy(text);
        Point q{0.4, -0.7};
        for (int i = 0; i < 2; ++i) {
            double d = evaluate(differentiate(f, i), q);
            CHECK(std::abs(d - test::central_difference(f, q, i)) <=
                  1e-6 * (1.0 + std::abs(d)));
        }
    }
}

TEST_CASE("finite-difference oracle over 100 random expressions") {
    SplitMix64 rng(0xACCE55ED);
    int checked = 0;
    while (checked < 100) {
        Expr e = test::random_expr(rng, 2, 4);
        Point p = test::random_point(rng, 2);
        int coord = static_cast<int>(rng.next_below(2));
        Expr de = differentiate(e, coord);
        double sym = evaluate(de, p);
        double fd = test::central_difference(e, p, coord);
        CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
        ++checked;
    }
}

TEST_CASE("mixed partial derivatives commute") {
    SplitMix64 rng(0xC0FFEE);
    for (int trial = 0; trial < 25; ++trial) {
        Expr e = test::random_expr(rng, 3, 4);
        Expr dxy = differentiate(differentiate(e, 0), 1);
        Expr dyx = differentiate(differentiate(e, 1), 0);
        for (int k = 0; k < 4; ++k) {
            Point p = test::random_point(rng, 3);
            double a = evaluate(dxy, p);
            double b = evaluate(dyx, p);
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b))));
        }
    }
}

TEST_CASE("differentiation is linear") {
    SplitMix64 rng(0x11EA12);
    for (int trial = 0; trial < 25; ++trial) {
        Expr e1 = test::random_expr(rng, 2, 4);
        Expr e2 = test::random_expr(rng, 2, 4);
        double a = rng.next_symmetric() * 3.0;
        Expr combo = Expr::constant(a) * e1 + e2;
        Expr lhs = differentiate(combo, 0);
        Expr rhs = Expr::constant(a) * differentiate(e1, 0) + differentiate(e2, 0);
        for (int k = 0; k < 4; ++k) {
            Point p = test::random_point(rng, 2);
            double u = evaluate(lhs, p);
            double v = evaluate(rhs, p);
            CHECK(std::abs(u - v) <= 1e-12 * (1.0 + std::max(std::abs(u), std::abs(v))));
        }
    }
}

TEST_CASE("simplify applies exactly the advertised rules") {
    Expr e = parse_xy("sin(x)");
    Expr sum = Expr::binary(ExprKind::Add, e, Expr::constant(0.0));
    CHECK(structurally_equal(simplify(sum), e));

    Expr folded = simplify(Expr::binary(ExprKind::Mul, Expr::constant(2.0),
                                        Expr::constant(3.0)));
    CHECK(folded.is_constant(6.0));

    Expr absorbed = simplify(Expr::binary(ExprKind::Mul, e, Expr::constant(0.0)));
    CHECK(absorbed.is_constant(0.0));

    CHECK(simplify(Expr::pow(e, 0)).is_constant(1.0));
    CHECK(structurally_equal(simplify(Expr::pow(e, 1)), e));
    CHECK(simplify(Expr::pow(Expr::constant(0.0), 0)).is_constant(1.0));
    Expr dneg = Expr::unary(ExprKind::Negate, Expr::unary(ExprKind::Negate, e));
    CHECK(structurally_equal(simplify(dneg), e));

    // untouched shapes stay untouched (and pointer-identical)
    Expr keep = parse_xy("x - 0");
    CHECK(simplify(keep).id() == keep.id());
}

TEST_CASE("simplify preserves values at 100 random points") {
    SplitMix64 rng(0x51319);
    for (int trial = 0; trial < 20; ++trial) {
        Expr e = test::random_expr(rng, 2, 5);
        Expr s = simplify(e);
        for (int k = 0; k < 5; ++k) {
            Point p = test::random_point(rng, 2);
            double a = evaluate(e, p);
            double b = evaluate(s, p);
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b))));
        }
    }
}

TEST_CASE("canonical printer round-trips") {
    for (const char* text :
         {"0", "x^2 + sin(y)", "x*y - 3/(x + 2)", "-x", "sqrt(x^2 + 1)",
          "exp(ln(2 + x^2))", "1.25e-3 * y", "x^-3", "cos(x)*cos(y)"}) {
        Expr first = parse_xy(text);
        std::string printed = to_string(first, xy);
        Expr second = parse(printed, xy);
        CHECK(structurally_equal(first, second));
        // and printing is a fixed point from then on
        CHECK(to_string(second, xy) == printed);
    }

    SplitMix64 rng(0x97A1137);
    for (int trial = 0; trial < 50; ++trial) {
        Expr e = test::random_expr(rng, 2, 4);
        std::string printed = to_string(e, xy);
        Expr back = parse(printed, xy);
        Point p = test::random_point(rng, 2);
        CHECK(evaluate(back, p) == doctest::Approx(evaluate(e, p)).epsilon(1e-12));
    }
}

TEST_CASE("evaluation and differentiation are safe under concurrency") {
    SplitMix64 rng(0x7234EAD);
    std::vector<Expr> exprs;
    for (int i = 0; i < 8; ++i) exprs.push_back(test::random_expr(rng, 2, 4));
    Point p{0.3, -0.4};

    std::vector<double> expected;
    for (const Expr& e : exprs)
        expected.push_back(evaluate(differentiate(e, 0), p));
    purge_derivative_cache();

    std::vector<std::thread> workers;
    std::vector<double> got(exprs.size() * 4, 0.0);
    for (int t = 0; t < 4; ++t)
        workers.emplace_back([&, t] {
            for (std::size_t i = 0; i < exprs.size(); ++i)
                got[static_cast<std::size_t>(t) * exprs.size() + i] =
                    evaluate(differentiate(exprs[i], 0), p);
        });
    for (auto& w : workers) w.join();
    for (int t = 0; t < 4; ++t)
        for (std::size_t i = 0; i < exprs.size(); ++i)
            CHECK(got[static_cast<std::size_t>(t) * exprs.size() + i] ==
                  expected[i]);
}

TEST_CASE("evaluation cache is consistent with fresh evaluation") {
    SplitMix64 rng(0xCACE);
    Expr e = test::random_expr(rng, 2, 5);
    Point p = test::random_point(rng, 2);
    EvalCache cache;
    double with_cache = evaluate(e, p, cache);
    double again = evaluate(e, p, cache);
    CHECK(with_cache == again);
    CHECK(with_cache == evaluate(e, p));
}
