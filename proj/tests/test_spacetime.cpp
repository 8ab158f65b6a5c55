#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "puca/spacetime.hpp"

using namespace puca;

namespace {

Formula x(std::uint32_t i) { return Formula::var(VarId{i}); }

LogicalConfiguration random_base(std::mt19937_64& rng, int particles) {
  LogicalConfiguration out;
  for (int i = 0; i < particles; ++i) {
    const int s = kSpeeds[rng() % 4];
    const Coord pos = static_cast<Coord>(rng() % 9) - 4;
    Formula f = rng() % 3 == 0 ? Formula::one() : x(static_cast<std::uint32_t>(rng() % 4));
    out.set_track(pos, s, f);
  }
  return out;
}

std::vector<Placement> random_placements(std::mt19937_64& rng, int count) {
  std::vector<Placement> ps;
  for (int i = 0; i < count; ++i) {
    Coord pos = static_cast<Coord>(rng() % 61) - 30;
    if (pos >= -5 && pos <= 5) pos += pos < 0 ? -6 : 6;
    const int s = kSpeeds[rng() % 4];
    bool dup = false;
    for (const auto& p : ps) dup = dup || (p.x == pos && p.speed == s);
    if (!dup) ps.push_back({pos, s, Formula::one()});
  }
  return ps;
}

LogicalConfiguration with(LogicalConfiguration c, const std::vector<Placement>& ps) {
  for (const auto& p : ps) c.set_track(p.x, p.speed, p.label);
  return c;
}

// Store contents compared against a plain simulation.
void check_store_matches(const SpacetimeStore& s, const LogicalConfiguration& x0, Time horizon) {
  LogicalConfiguration cur = canonicalize(x0);
  for (Time t = 0; t <= horizon; ++t) {
    if (t > 0) cur = logical_step(cur);
    for (const auto& [pos, c] : cur.cells())
      for (int k = 0; k < 4; ++k)
        REQUIRE(s.label_at(pos, t, speed_of_track(k)) == c[static_cast<std::size_t>(k)]);
    for (int k = 0; k < 4; ++k)
      for (const auto& [b, h] : s.lines(speed_of_track(k))) {
        const Line l{b, speed_of_track(k)};
        REQUIRE(s.value(l, t) == cur.track(l.at(t), l.speed));
      }
  }
}

}  // namespace

TEST_CASE("store reproduces the simulated diagram") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const LogicalConfiguration x0 = random_base(rng, 8);
    const SpacetimeStore s = SpacetimeStore::from_initial(x0, {-5, 5});
    check_store_matches(s, x0, 40);
  }
}

TEST_CASE("committed modifications equal a rebuilt store") {
  std::mt19937_64 rng(2);
  int committed = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const LogicalConfiguration x0 = random_base(rng, 6);
    SpacetimeStore s = SpacetimeStore::from_initial(x0, {-5, 5});
    const auto ps = random_placements(rng, 1 + static_cast<int>(rng() % 3));
    ControlBudget budget;
    budget.a = 100;
    budget.b = 1000;
    const Trial tr = s.trial(ps, budget);
    if (!tr.valid()) continue;
    ++committed;
    s.commit(tr);
    const LogicalConfiguration after = with(x0, ps);
    const SpacetimeStore fresh = SpacetimeStore::from_initial(after, {-5, 5});
    CHECK(s.crossing_points() == fresh.crossing_points());
    CHECK(s.occupied_line_count() == fresh.occupied_line_count());
    check_store_matches(s, after, 80);
  }
  CHECK(committed > 50);
}

TEST_CASE("event validator agrees with the step-by-step validator") {
  std::mt19937_64 rng(3);
  int valid = 0, invalid = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const LogicalConfiguration x0 = random_base(rng, 5);
    const SpacetimeStore s = SpacetimeStore::from_initial(x0, {-5, 5});
    const auto ps = random_placements(rng, 1 + static_cast<int>(rng() % 4));
    ControlBudget budget;
    budget.a = 2 + rng() % 10;
    budget.b = rng() % 20;
    budget.t = static_cast<Time>(rng() % 30);
    budget.weak = rng() % 2;
    budget.region = {-3, 3};
    for (int i = 0; i < 3; ++i) {
      const Line l{static_cast<Coord>(rng() % 41) - 20, kSpeeds[rng() % 4]};
      if (rng() % 2)
        budget.protected_lines.insert(l);
      else
        budget.target_lines.insert(l);
    }
    for (const auto& p : ps)
      if (rng() % 2) budget.target_lines.insert(Line::through(p.x, 0, p.speed));
    const Trial tr = s.trial(ps, budget);
    const ValidationReport ref = validate_controlled(x0, with(x0, ps), budget);
    CHECK_MESSAGE(tr.valid() == ref.valid, "event: " << tr.report().summary() << " | reference: " << ref.summary());
    (ref.valid ? valid : invalid)++;
  }
  CHECK(valid > 20);
  CHECK(invalid > 20);
}

TEST_CASE("placements must be outside the block and on free tracks") {
  LogicalConfiguration x0;
  x0.set_track(0, 1, x(0));
  const SpacetimeStore s = SpacetimeStore::from_initial(x0, {0, 0});
  ControlBudget budget;
  budget.a = 10;
  budget.b = 10;
  CHECK_FALSE(s.trial({{0, 2, Formula::one()}}, budget).valid());
  CHECK(s.trial({{0, 2, Formula::one()}}, budget).report().condition == 1);
  CHECK(s.trial({{-20, -2, Formula::one()}}, budget).valid());
}

TEST_CASE("adding a particle across an occupied line is a crossing only") {
  LogicalConfiguration x0;
  x0.set_track(0, 1, x(0));
  const SpacetimeStore s = SpacetimeStore::from_initial(x0, {0, 0});
  ControlBudget budget;
  budget.a = 2;
  budget.b = 1;
  const Trial tr = s.trial({{30, -2, Formula::one()}}, budget);
  REQUIRE(tr.valid());
  CHECK(tr.report().new_crossings == 1);
  CHECK(tr.report().new_lines == 1);
  CHECK(tr.value(Line{0, 1}, 100) == x(0));
}

TEST_CASE("a redirect collision copies the label") {
  // +1 particle carrying x0; auxiliaries +2 and -1 make a -2 copy at (5, 5).
  LogicalConfiguration x0;
  x0.set_track(0, 1, x(0));
  const SpacetimeStore s = SpacetimeStore::from_initial(x0, {0, 0});
  ControlBudget budget;
  budget.a = 8;
  budget.b = 8;
  const Trial tr = s.trial({{5 - 2 * 5, 2, Formula::one()}, {5 + 5, -1, Formula::one()}}, budget);
  REQUIRE(tr.valid());
  CHECK(tr.value(Line::through(5, 5, -2), 5) == x(0));
  CHECK(tr.value(Line::through(5, 5, -2), 50) == x(0));
  CHECK(tr.value(Line{0, 1}, 50) == x(0));
  CHECK(tr.value(Line::through(5, 5, 2), 6) == canonical(~x(0)));
}

TEST_CASE("last time inside a region") {
  LogicalConfiguration x0;
  x0.set_track(-10, 1, Formula::one());
  const SpacetimeStore s = SpacetimeStore::from_initial(x0, {0, -1});
  CHECK(s.last_time_inside({0, 3}) == 13);
  CHECK(s.last_time_inside({-20, -15}) == -1);
}
