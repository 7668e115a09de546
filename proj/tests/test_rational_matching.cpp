#include <doctest.h>

#include "vbs/errors.hpp"
#include "vbs/matching.hpp"
#include "vbs/rational.hpp"

using namespace vbs;

TEST_CASE("rational text round trip") {
  for (const char* s : {"0", "1", "-7", "28/27", "-262/243", "123456789012345678901234567891/2"})
    CHECK(to_string(parse_rational(s)) == s);
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), UsageError);
  CHECK_THROWS_AS(parse_rational("abc"), UsageError);
}

TEST_CASE("rational powers and the sphere moment") {
  const Rational q = sphere_q();
  CHECK(q == Rational(1, 3));
  CHECK(pow(q, 0) == 1);
  CHECK(pow(q, 5) == Rational(1, 243));
  CHECK(pow(q, -2) == 9);
  CHECK(to_double(Rational(1, 4)) == 0.25);
}

TEST_CASE("partial matchings are counted by the telephone numbers") {
  const int expected[] = {1, 1, 2, 4, 10, 26, 76};
  for (int m = 1; m <= 6; ++m) CHECK(partial_matchings(m).size() == static_cast<std::size_t>(expected[m]));
}

TEST_CASE("three-leg basis order") {
  const auto& b = partial_matchings(3);
  REQUIRE(b.size() == 4);
  CHECK(to_key(b[0]) == "()");
  CHECK(to_key(b[1]) == "(1,2)");
  CHECK(to_key(b[2]) == "(1,3)");
  CHECK(to_key(b[3]) == "(2,3)");
}

TEST_CASE("matching keys and indices round trip") {
  for (int m = 1; m <= 6; ++m) {
    const auto& b = partial_matchings(m);
    for (std::size_t k = 0; k < b.size(); ++k) {
      CHECK(matching_index(b[k], m) == k);
      CHECK(parse_key(to_key(b[k])) == b[k]);
    }
  }
  CHECK_THROWS_AS(parse_key("(1,2"), UsageError);
  CHECK_THROWS_AS(matching_index(PartialMatching({{0, 3}}), 3), UsageError);
}

TEST_CASE("pairs are normalized") {
  const PartialMatching a({{2, 0}});
  const PartialMatching b({{0, 2}});
  CHECK(a == b);
  CHECK(a.covers(0));
  CHECK_FALSE(a.covers(1));
}

TEST_CASE("relabel permutes legs") {
  const PartialMatching mu({{0, 1}});
  CHECK(relabel(mu, {2, 1, 0}) == PartialMatching({{1, 2}}));
}
