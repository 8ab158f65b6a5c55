#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <thread>

#include "puca/formula.hpp"

using namespace puca;

namespace {

Formula x(std::uint32_t i) { return Formula::var(VarId{i}); }

Formula random_formula(std::mt19937_64& rng, unsigned vars, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  if (depth == 0 || pick(rng) < 2) {
    const int r = pick(rng);
    if (r == 0) return Formula::zero();
    if (r == 1) return Formula::one();
    return x(static_cast<std::uint32_t>(rng() % vars));
  }
  Formula a = random_formula(rng, vars, depth - 1);
  Formula b = random_formula(rng, vars, depth - 1);
  switch (pick(rng) % 5) {
    case 0: return nand(a, b);
    case 1: return a & b;
    case 2: return a | b;
    case 3: return a ^ b;
    default: return conditional(a, b, random_formula(rng, vars, depth - 1));
  }
}

}  // namespace

TEST_CASE("hash consing gives structural identity") {
  CHECK(nand(x(0), x(1)) == nand(x(1), x(0)));
  CHECK((x(0) & x(1)) == (x(1) & x(0)));
  CHECK(x(3) == Formula::var(VarId{3}));
  CHECK(Formula() == Formula::zero());
}

TEST_CASE("local folding rules") {
  CHECK(nand(Formula::zero(), x(0)).is_one());
  CHECK(nand(x(0), Formula::one()) == ~x(0));
  CHECK(~~x(0) == x(0));
  CHECK(nand(x(0), ~x(0)).is_one());
  CHECK((x(0) & ~x(0)).is_zero());
  CHECK((x(0) | Formula::one()).is_one());
  CHECK(conditional(Formula::one(), x(1), x(2)) == x(1));
  CHECK(conditional(Formula::zero(), x(1), x(2)) == x(2));
  CHECK(conditional(x(0), x(1), x(1)) == x(1));
}

TEST_CASE("evaluation follows the connectives") {
  for (unsigned bits = 0; bits < 8; ++bits) {
    const Valuation v = Valuation::from_bits(bits, 3);
    const bool a = bits & 1, b = bits & 2, c = bits & 4;
    CHECK(evaluate(nand(x(0), x(1)), v) == !(a && b));
    CHECK(evaluate(x(0) ^ x(1), v) == (a != b));
    CHECK(evaluate(x(0) | x(2), v) == (a || c));
    CHECK(evaluate(conditional(x(0), x(1), x(2)), v) == (a ? b : c));
  }
  CHECK_THROWS_AS(evaluate(x(5), Valuation::from_bits(0, 3)), std::out_of_range);
}

TEST_CASE("truth tables and essential support") {
  const Formula f = (x(0) & x(2)) | (x(0) & ~x(2));  // depends on x0 only
  CHECK(f.support() == std::vector<std::uint32_t>{0, 2});
  CHECK(essential_support(f) == std::vector<std::uint32_t>{0});
  CHECK(canonical(f) == x(0));
  CHECK(equivalent(f, x(0)));
  const auto tt = truth_table(x(0) ^ x(1), {0, 1});
  CHECK(tt.size() == 1);
  CHECK(tt[0] == 0b0110u);
  CHECK(is_constant(x(1) | ~x(1)));
  CHECK(constant_value(x(4) & ~x(4)) == std::optional<bool>(false));
  CHECK_FALSE(is_constant(x(1)));
}

TEST_CASE("semantic canonical form is shared") {
  const Formula a = (x(0) & x(1)) | x(2);
  const Formula b = (x(2) | x(1)) & (x(2) | x(0));
  CHECK(a != b);
  CHECK(canonical(a) == canonical(b));
  CHECK(canonical(~x(3) ^ Formula::one()) == x(3));
  CHECK(canonical(x(3) ^ x(3)) == Formula::zero());
}

TEST_CASE("canonical agrees with brute force equivalence") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Formula f = random_formula(rng, 5, 5);
    const Formula g = random_formula(rng, 5, 5);
    bool same = true;
    for (unsigned bits = 0; bits < 32; ++bits) {
      const Valuation v = Valuation::from_bits(bits, 5);
      if (evaluate(f, v) != evaluate(g, v)) same = false;
      CHECK(evaluate(canonical(f), v) == evaluate(f, v));
    }
    CHECK(equivalent(f, g) == same);
  }
}

TEST_CASE("wide supports use the word-level evaluator") {
  Formula f = Formula::zero();
  for (std::uint32_t i = 0; i < 16; ++i) f = f ^ x(i);
  CHECK(f.support().size() == 16);
  CHECK(essential_support(f).size() == 16);
  Formula g = Formula::zero();
  for (std::uint32_t i = 16; i-- > 0;) g = g ^ x(i);
  CHECK(equivalent(f, g));
  CHECK_FALSE(equivalent(f, g ^ x(3)));
  CHECK_THROWS_AS(canonical(f, 8), SupportTooLarge);
}

TEST_CASE("prefix and infix rendering") {
  CHECK(to_prefix(nand(x(0), x(1))) == "(nand x0 x1)");
  CHECK(to_prefix(Formula::one()) == "1");
  CHECK(to_infix(x(0) & x(1)) == "(x0 & x1)");
  CHECK(to_infix(x(0) | x(1)) == "(x0 | x1)");
  CHECK(to_infix(~x(2)) == "~x2");
}

TEST_CASE("store is safe to use from several threads") {
  std::vector<std::thread> ts;
  std::vector<Formula> results(4);
  for (int i = 0; i < 4; ++i)
    ts.emplace_back([i, &results] {
      Formula f = Formula::zero();
      for (std::uint32_t k = 0; k < 200; ++k) f = canonical(f ^ (x(k % 7) & x((k + 1) % 7)));
      results[static_cast<std::size_t>(i)] = f;
    });
  for (auto& t : ts) t.join();
  for (int i = 1; i < 4; ++i) CHECK(results[static_cast<std::size_t>(i)] == results[0]);
}
