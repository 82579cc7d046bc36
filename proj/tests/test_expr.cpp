#include <doctest.h>

#include <cmath>

#include "ringmod/error.hpp"
#include "ringmod/expr.hpp"

using namespace ringmod;

TEST_CASE("expression arithmetic and precedence") {
  auto e = Expr::parse("1 + 2*3 - 4/2", {});
  CHECK(e.eval({}) == doctest::Approx(5.0));

  auto pow = Expr::parse("2^3^2", {});  // right associative
  CHECK(pow.eval({}) == doctest::Approx(512.0));

  auto neg = Expr::parse("-x1^2", {"x1"});
  double v[1] = {3.0};
  CHECK(neg.eval(std::span<const double>(v, 1)) == doctest::Approx(-9.0));

  auto frac = Expr::parse("2^-1", {});
  CHECK(frac.eval({}) == doctest::Approx(0.5));
}

TEST_CASE("expression functions and variables") {
  auto e = Expr::parse("sin(x1)^2 + cos(x1)^2", {"x1"});
  double v[1] = {0.7};
  CHECK(e.eval(std::span<const double>(v, 1)) == doctest::Approx(1.0));

  auto lam = Expr::parse("4/(1 - x1^2 - x2^2)^2", {"x1", "x2"});
  double w[2] = {0.5, 0.0};
  CHECK(lam.eval(std::span<const double>(w, 2)) == doctest::Approx(4.0 / (0.75 * 0.75)));

  auto pi = Expr::parse("2*pi", {});
  CHECK(pi.eval({}) == doctest::Approx(2.0 * M_PI));

  auto mixed = Expr::parse("exp(log(sqrt(tanh(1))))", {});
  CHECK(mixed.eval({}) == doctest::Approx(std::sqrt(std::tanh(1.0))));
}

TEST_CASE("expression constants are detected") {
  CHECK(Expr::parse("4", {"x1"}).is_constant());
  CHECK(Expr::parse("2*pi + 1", {"x1"}).is_constant());
  CHECK_FALSE(Expr::parse("x1", {"x1"}).is_constant());
}

TEST_CASE("expression parse errors") {
  CHECK_THROWS_AS(Expr::parse("1 +", {}), Error);
  CHECK_THROWS_AS(Expr::parse("foo(1)", {}), Error);
  CHECK_THROWS_AS(Expr::parse("x9", {"x1"}), Error);
  CHECK_THROWS_AS(Expr::parse("(1", {}), Error);
  CHECK_THROWS_AS(Expr::parse("1 2", {}), Error);
}
