#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "horizon/expr.hpp"

using namespace horizon;

TEST_CASE("arithmetic precedence and power associativity") {
    CHECK(parse_expr("1 + 2 * 3")(0, 0) == doctest::Approx(7));
    CHECK(parse_expr("2 ^ 3 ^ 2")(0, 0) == doctest::Approx(512));
    CHECK(parse_expr("-2 ^ 2")(0, 0) == doctest::Approx(-4));
    CHECK(parse_expr("(1 + 2) * 3")(0, 0) == doctest::Approx(9));
    CHECK(parse_expr("x * y - x / y")(3, 2) == doctest::Approx(6 - 1.5));
}

TEST_CASE("functions, constants and parameters") {
    CHECK(parse_expr("sqrt(4) + exp(0) + sin(0) + cos(0) + atan(1)")(0, 0) == doctest::Approx(2 + 1 + 0 + 1 + M_PI / 4));
    CHECK(parse_expr("pi")(0, 0) == doctest::Approx(M_PI));
    CHECK(parse_expr("eps * x", {{"eps", 0.5}})(4, 0) == doctest::Approx(2));
    CHECK(parse_expr("1e-3 * 2.5E2")(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("malformed expressions are rejected with a position") {
    CHECK_THROWS_AS(parse_expr("x +"), ParseError);
    CHECK_THROWS_AS(parse_expr("x * (y"), ParseError);
    CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr("z"), ParseError);
    CHECK_THROWS_AS(parse_expr("x y"), ParseError);
    try {
        parse_expr("x + $");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
    }
}

TEST_CASE("symbolic derivatives match central differences") {
    const char* cases[] = {"x*y", "(y^2 - x^2)/2", "-y - 0.5*x/(1 + x^2 + y^2)", "x/sqrt(1 + x^2 + y^2)",
                           "exp(-x*y) * sin(x) + cos(y) * atan(x)", "x^3 - 3*x*y^2", "(1 + x^2 + y^2)^(-2) * y"};
    const double pts[][2] = {{0.3, 1.7}, {-2.1, 0.4}, {5.0, -3.0}};
    for (const char* text : cases) {
        const Expr e = parse_expr(text);
        const Expr ex = e.diff_x(), ey = e.diff_y();
        for (const auto& p : pts) {
            const double h = 1e-6;
            const double fdx = (e(p[0] + h, p[1]) - e(p[0] - h, p[1])) / (2 * h);
            const double fdy = (e(p[0], p[1] + h) - e(p[0], p[1] - h)) / (2 * h);
            INFO(text);
            CHECK(ex(p[0], p[1]) == doctest::Approx(fdx).epsilon(1e-6));
            CHECK(ey(p[0], p[1]) == doctest::Approx(fdy).epsilon(1e-6));
        }
    }
}

TEST_CASE("printing round-trips through the parser") {
    const Expr e = parse_expr("x^2*sin(y) - 3/(1+x)");
    const Expr back = parse_expr(e.to_string());
    CHECK(back(0.7, -1.2) == doctest::Approx(e(0.7, -1.2)));
}
