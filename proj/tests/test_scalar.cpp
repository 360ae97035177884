#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "rtreelab/json_io.hpp"
#include "rtreelab/scalar.hpp"

using namespace rtreelab;

namespace {
BasisPtr golden_basis() { return ScalarBasis::with_sqrt(5); }
Scalar sqrt5() { return Scalar::generator(1, golden_basis()); }
// gamma = (sqrt5 - 1) / 2, the golden rotation number
Scalar golden_gamma() {
  return Scalar::from_coeffs({Rational(-1, 2), Rational(1, 2)}, golden_basis());
}
}  // namespace

TEST_CASE("zero scalar has sign 0", "[scalar]") {
  Scalar z = Scalar::from_coeffs({Rational(0), Rational(0)}, golden_basis());
  CHECK(z.sign() == 0);
  CHECK(z.is_zero());
  CHECK(Scalar().sign() == 0);
}

TEST_CASE("sign of sqrt5 - 2 is positive", "[scalar]") {
  Scalar s = Scalar::from_coeffs({Rational(-2), Rational(1)}, golden_basis());
  CHECK(s.sign() == 1);
}

TEST_CASE("sign of (sqrt5-1)/2 - 1 is negative", "[scalar]") {
  Scalar s = golden_gamma() - Scalar(Rational(1));
  CHECK(s.sign() == -1);
}

TEST_CASE("telescoping dyadic sums compare equal to 1", "[scalar]") {
  for (int k = 1; k <= 40; ++k) {
    Scalar sum;
    for (int i = 1; i <= k; ++i) sum += Scalar(Rational(1, Int(1) << i));
    sum += Scalar(Rational(1, Int(1) << k));
    CHECK(compare(sum, Scalar(Rational(1))) == 0);
  }
}

TEST_CASE("golden rotation number exceeds 3/5", "[scalar]") {
  CHECK(compare(golden_gamma(), Scalar(Rational(3, 5))) > 0);
}

TEST_CASE("tiny precision cap raises the budget error", "[scalar]") {
  Scalar s = Scalar::from_coeffs({Rational(-161, 72), Rational(1)}, golden_basis());
  CHECK(s.sign() != 0);  // decidable at default cap
  CHECK_THROWS_AS(s.sign(4), PrecisionBudgetExceeded);
}

TEST_CASE("dependent basis declaration cannot be refuted, only budgeted", "[scalar]") {
  // sqrt4 == 2 really, so (-2)*1 + 1*sqrt4 is exactly zero; the library
  // trusts the declared independence and gives up at the cap instead.
  BasisPtr b = ScalarBasis::with_sqrt(4);
  Scalar s = Scalar::from_coeffs({Rational(-2), Rational(1)}, b);
  CHECK_THROWS_AS(s.sign(64), PrecisionBudgetExceeded);
}

TEST_CASE("vector space arithmetic is exact", "[scalar]") {
  std::mt19937 rng(0);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 20);
  for (int trial = 0; trial < 200; ++trial) {
    Rational a(num(rng), den(rng)), b(num(rng), den(rng));
    Scalar x = Scalar(a) + a * sqrt5();
    Scalar y = Scalar(b) + b * sqrt5();
    CHECK(((x + y) - y) == x);
    CHECK((x - x).sign() == 0);
    Rational q(num(rng), den(rng));
    if (q != 0) CHECK(((q * x) / q) == x);
  }
}

TEST_CASE("rational scalars compare like rationals", "[scalar]") {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> num(-30, 30), den(1, 15);
  for (int trial = 0; trial < 300; ++trial) {
    Rational a(num(rng), den(rng)), b(num(rng), den(rng));
    int want = a < b ? -1 : (a > b ? 1 : 0);
    CHECK(compare(Scalar(a), Scalar(b)) == want);
  }
}

TEST_CASE("mixed-basis promotion and mismatch", "[scalar]") {
  Scalar half(Rational(1, 2));
  Scalar g = golden_gamma();
  CHECK((half + g).basis()->same(*golden_basis()));
  CHECK(compare(half + g, g + half) == 0);
  BasisPtr other = ScalarBasis::with_sqrt(2);
  Scalar r2 = Scalar::generator(1, other);
  CHECK_THROWS_AS(g + r2, InputError);
}

TEST_CASE("scalar ordering works in ordered containers", "[scalar]") {
  std::map<Scalar, int, ScalarLess> m;
  m[golden_gamma()] = 1;
  m[Scalar(Rational(3, 5))] = 2;
  m[Scalar(Rational(1))] = 3;
  m[golden_gamma() + Scalar(Rational(0))] = 9;  // same key as gamma
  REQUIRE(m.size() == 3);
  CHECK(m.begin()->second == 2);  // 3/5 smallest
  CHECK(m.rbegin()->second == 3);
}

TEST_CASE("string and json round trips", "[scalar]") {
  Scalar g = golden_gamma();
  CHECK(g.str() == "-1/2,1/2");
  CHECK(Scalar::parse(g.str(), golden_basis()) == g);
  CHECK(Scalar(Rational(3, 5)).str() == "3/5");
  CHECK(Scalar::parse("7/3", golden_basis()).as_rational() == Rational(7, 3));

  json j = scalar_to_json(g);
  REQUIRE(j.is_object());
  CHECK(j["basis"] == json::array({"1", "sqrt5"}));
  CHECK(j["coeffs"] == json::array({"-1/2", "1/2"}));
  CHECK(scalar_from_json(j) == g);

  json r = scalar_to_json(Scalar(Rational(-2, 7)));
  REQUIRE(r.is_string());
  CHECK(r.get<std::string>() == "-2/7");
  CHECK(scalar_from_json(r).as_rational() == Rational(-2, 7));
}

TEST_CASE("basis validation", "[scalar]") {
  CHECK_THROWS_AS(ScalarBasis::from_tags({"sqrt5"}), InputError);
  CHECK_THROWS_AS(ScalarBasis::from_tags({"1", "cbrt2"}), InputError);
  CHECK_THROWS_AS(ScalarBasis::from_tags({"1", "sqrt5", "sqrt5"}), InputError);
  CHECK_THROWS_AS(Scalar::from_coeffs({Rational(1)}, golden_basis()), InputError);
}
