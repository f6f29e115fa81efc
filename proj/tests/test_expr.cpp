// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "pplog/expr.hpp"

using pplog::Expr;
using pplog::ParseError;

TEST_CASE("expression grammar: literals, precedence, functions") {
  CHECK(Expr::parse("1 + 2*3").eval(0, 0) == 7.0);
  CHECK(Expr::parse("(1 + 2)*3").eval(0, 0) == 9.0);
  CHECK(Expr::parse("2^3^2").eval(0, 0) == 512.0);  // right associative
  CHECK(Expr::parse("-2^2").eval(0, 0) == -4.0);    // unary minus binds loosely
  CHECK(Expr::parse("2^-1").eval(0, 0) == 0.5);
  CHECK(Expr::parse("x - t").eval(3.5, 1.25) == 2.25);
  CHECK(Expr::parse("sin(pi/2)").eval(0, 0) == Catch::Approx(1.0));
  CHECK(Expr::parse("cos(0) + exp(0)").eval(0, 0) == 2.0);
  CHECK(Expr::parse("1e-3 + 2.5E2").eval(0, 0) == Catch::Approx(250.001));
  CHECK(Expr::parse("10/4/5").eval(0, 0) == 0.5);  // left associative
}

TEST_CASE("expression parse errors carry the line") {
  CHECK_THROWS_AS(Expr::parse("1 +", 7), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin 3"), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(2)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("(1+2"), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 2"), ParseError);
  try {
    Expr::parse("y + 1", 42);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 42);
    CHECK(std::string(e.what()).find("line 42") != std::string::npos);
  }
}

TEST_CASE("serialization round-trips through the parser") {
  const char* cases[] = {
      "1 + 2*x - t^2",
      "-(x + t)*sin(2*pi*t)",
      "exp(1 - 1/(1 - x^2))",
      "((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2",
  };
  for (const char* s : cases) {
    Expr e = Expr::parse(s);
    Expr e2 = Expr::parse(e.to_string());
    CHECK(e == e2);
    for (double x : {0.0, 0.3, 0.9})
      for (double t : {0.0, 0.4})
        CHECK(e.eval(x, t) == e2.eval(x, t));
  }
}

TEST_CASE("positive-part idiom evaluates to exact zero inside the vanishing set") {
  // pos(u) = (u + (u^2)^0.5)/2 vanishes exactly for u <= 0
  Expr tube = Expr::parse("((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2");
  CHECK(tube.eval(0.5, 0) == 0.0);
  CHECK(tube.eval(0.40, 0) == 0.0);
  CHECK(tube.eval(0.64, 0) == 0.0);
  CHECK(tube.eval(0.66, 0) > 0.0);
  CHECK(tube.eval(0.0, 0) == Catch::Approx(0.25 - 0.0225));
  CHECK(tube.eval(1.0, 0) == Catch::Approx(0.25 - 0.0225));
}
