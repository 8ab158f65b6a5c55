#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "puca/logical_ca.hpp"

namespace puca {

// Exact rational with positive denominator, kept in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit from integers is intended
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  std::string str() const;

 private:
  static Rational make(__int128 n, __int128 d);
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Trajectory { (base + speed * tau, tau) }.
struct Line {
  Coord base = 0;
  int speed = 0;

  static Line through(Coord x, Time t, int speed) { return {x - speed * t, speed}; }
  Coord at(Time t) const { return base + speed * t; }
  bool contains(Coord x, Time t) const { return at(t) == x; }
  auto operator<=>(const Line&) const = default;
};

std::string to_string(const Line& l);

struct Intersection {
  enum class Kind { None, Point, Same } kind = Kind::None;
  Rational x, t;
  bool integral() const { return kind == Kind::Point && x.is_integer() && t.is_integer(); }
};

Intersection intersect(const Line& a, const Line& b);

// Spacetime points reachable from (x, t) with speeds in [-2, 2].
struct Cone {
  Coord x = 0;
  Time t = 0;
  bool contains(Coord y, Time s) const { return s >= t && y - x <= 2 * (s - t) && x - y <= 2 * (s - t); }
};

struct Interval {
  Coord lo = 0;
  Coord hi = -1;
  bool contains(Coord x) const { return lo <= x && x <= hi; }
  bool empty() const { return hi < lo; }
};

struct ControlBudget {
  std::size_t a = 0;  // particles added, and new lines
  std::size_t b = 0;  // new crossings
  std::set<Line> protected_lines;  // must stay free of new particles and crossings
  std::set<Line> target_lines;
  Time t = 0;
  Interval region;  // positions that must not gain Boolean particles at time t
  bool weak = false;
};

// Positions (x, t, s) with x in I whose line is not a target line.
std::vector<SpacetimePosition> forbidden_positions(const std::set<Line>& targets, Time t, const Interval& I);

struct ValidationReport {
  bool valid = true;
  int condition = 0;  // first violated condition, 0 if none
  std::string detail;
  std::size_t added = 0;
  std::size_t new_lines = 0;
  std::size_t new_crossings = 0;
  std::size_t events = 0;

  static ValidationReport fail(int cond, std::string why) {
    ValidationReport r;
    r.valid = false;
    r.condition = cond;
    r.detail = std::move(why);
    return r;
  }
  std::string summary() const;
};

// Step-by-step check of a modification of a diagram.  Both diagrams are
// simulated from time 0 until they are dispersed (or `horizon` if given),
// and the two censuses are compared.  Slow; used as a reference.
ValidationReport validate_controlled(const LogicalConfiguration& before, const LogicalConfiguration& after,
                                     const ControlBudget& budget, std::optional<Time> horizon = std::nullopt,
                                     unsigned cap = kDefaultSupportCap);

struct ResourceCounts {
  std::size_t crossings = 0;       // m1
  std::size_t occupied_lines = 0;  // m2
  std::size_t protected_lines = 0;  // m3
  std::size_t particles = 0;       // m4
};

struct DiagramLedger {
  std::set<Line> occupied_lines;
  std::set<std::pair<Coord, Time>> crossings;
  std::set<std::pair<Coord, Time>> collisions;
  std::vector<SpacetimePosition> added_particles;
};

// Ledger of the diagram of x0 over [0, horizon] computed from scratch.
DiagramLedger ledger_from_census(const LogicalConfiguration& x0, Time horizon, unsigned cap = kDefaultSupportCap);

}  // namespace puca
