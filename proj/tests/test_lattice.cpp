#include <random>

#include "doctest.h"
#include "witness/lattice.hpp"

using witness::SecurityLevel;
using witness::leq;
using witness::meet;

namespace {

SecurityLevel random_level(std::mt19937& rng) {
  static const char* names[] = {"A", "B", "C", "D"};
  if (std::uniform_int_distribution<int>(0, 7)(rng) == 0) return SecurityLevel::bottom();
  std::set<std::string> ids;
  for (const char* n : names) {
    if (std::bernoulli_distribution(0.4)(rng)) ids.insert(n);
  }
  return SecurityLevel::known(std::move(ids));
}

}  // namespace

TEST_CASE("meet") {
  CHECK(meet(SecurityLevel::known({"A", "B", "C"}), SecurityLevel::known({"A", "B", "S"})) ==
        SecurityLevel::known({"A", "B", "C", "S"}));
  CHECK(meet(SecurityLevel::bottom(), SecurityLevel::known({"A"})).is_bottom());
  CHECK(meet(SecurityLevel::top(), SecurityLevel::known({"A", "B"})) == SecurityLevel::known({"A", "B"}));
}

TEST_CASE("order") {
  CHECK(leq(SecurityLevel::known({"A", "B", "S"}), SecurityLevel::known({"A", "B"})));
  CHECK(leq(SecurityLevel::known({"A"}), SecurityLevel::known({"A"})));
  CHECK_FALSE(leq(SecurityLevel::known({"A"}), SecurityLevel::known({"B"})));
  CHECK(leq(SecurityLevel::bottom(), SecurityLevel::top()));
  CHECK_FALSE(leq(SecurityLevel::top(), SecurityLevel::bottom()));
  CHECK(SecurityLevel::top().is_top());
}

TEST_CASE("meet is the greatest lower bound") {
  std::mt19937 rng(42);
  for (int i = 0; i < 2000; ++i) {
    SecurityLevel a = random_level(rng), b = random_level(rng), c = random_level(rng);
    SecurityLevel m = meet(a, b);
    CHECK(leq(m, a));
    CHECK(leq(m, b));
    if (leq(c, a) && leq(c, b)) CHECK(leq(c, m));
    CHECK(meet(a, b) == meet(b, a));
    CHECK(meet(meet(a, b), c) == meet(a, meet(b, c)));
    CHECK(meet(a, a) == a);
    if (leq(a, b) && leq(b, a)) CHECK(a == b);
    CHECK(leq(SecurityLevel::bottom(), a));
    CHECK(leq(a, SecurityLevel::top()));
  }
}

TEST_CASE("json form") {
  CHECK(witness::to_json(SecurityLevel::bottom()) == "BOTTOM");
  CHECK(witness::to_json(SecurityLevel::top()).dump() == "[]");
  CHECK(witness::to_json(SecurityLevel::known({"S", "A"})).dump() == R"(["A","S"])");
  std::mt19937 rng(1);
  for (int i = 0; i < 100; ++i) {
    SecurityLevel l = random_level(rng);
    CHECK(witness::level_from_json(witness::to_json(l)) == l);
  }
  CHECK(SecurityLevel::known({"B", "A"}).str() == "{A,B}");
}
