#include "puca/geometry.hpp"

#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace puca {

Rational Rational::make(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
  if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

Rational::Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

Rational operator+(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                        static_cast<__int128>(a.den_) * b.den_);
}
Rational operator-(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                        static_cast<__int128>(a.den_) * b.den_);
}
Rational operator*(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}
Rational operator/(Rational a, Rational b) {
  return Rational::make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const __int128 l = static_cast<__int128>(a.num_) * b.den_;
  const __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

std::string to_string(const Line& l) {
  std::ostringstream os;
  os << "line(base=" << l.base << ", speed=" << (l.speed > 0 ? "+" : "") << l.speed << ")";
  return os.str();
}

Intersection intersect(const Line& a, const Line& b) {
  Intersection r;
  if (a.speed == b.speed) {
    r.kind = a.base == b.base ? Intersection::Kind::Same : Intersection::Kind::None;
    return r;
  }
  r.kind = Intersection::Kind::Point;
  r.t = Rational(b.base - a.base, a.speed - b.speed);
  r.x = Rational(a.base) + Rational(a.speed) * r.t;
  return r;
}

std::vector<SpacetimePosition> forbidden_positions(const std::set<Line>& targets, Time t, const Interval& I) {
  std::vector<SpacetimePosition> out;
  for (Coord x = I.lo; x <= I.hi; ++x)
    for (int s : kSpeeds)
      if (!targets.count(Line::through(x, t, s))) out.push_back({x, t, s});
  return out;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  if (valid)
    os << "valid";
  else
    os << "violates condition " << condition << ": " << detail;
  os << " (added " << added << ", new lines " << new_lines << ", new crossings " << new_crossings << ")";
  return os.str();
}

namespace {

using PointKey = std::pair<Coord, Time>;

struct Diagram {
  std::map<PointKey, LogicalCell> cells;  // post-gamma state, Boolean tracks only
  std::set<Line> lines;
};

Diagram record_diagram(const LogicalConfiguration& x0, Time horizon, unsigned cap) {
  Diagram d;
  LogicalConfiguration cur = canonicalize(x0, cap);
  for (Time t = 0; t <= horizon; ++t) {
    if (t > 0) cur = logical_step(cur, cap);
    for (const auto& [x, c] : cur.cells()) {
      d.cells[{x, t}] = c;
      for (int k = 0; k < 4; ++k)
        if (!c[static_cast<std::size_t>(k)].is_zero()) d.lines.insert(Line::through(x, t, speed_of_track(k)));
    }
  }
  return d;
}

Time dispersal_time(const LogicalConfiguration& x0, unsigned cap) {
  LogicalConfiguration cur = canonicalize(x0, cap);
  Time t = 0;
  while (!forward_dispersed(cur)) {
    cur = logical_step(cur, cap);
    ++t;
  }
  return t;
}

const LogicalCell& cell_at(const Diagram& d, Coord x, Time t) {
  static const LogicalCell zero{};
  auto it = d.cells.find({x, t});
  return it == d.cells.end() ? zero : it->second;
}

}  // namespace

ValidationReport validate_controlled(const LogicalConfiguration& before, const LogicalConfiguration& after,
                                     const ControlBudget& budget, std::optional<Time> horizon, unsigned cap) {
  ValidationReport rep;
  const LogicalConfiguration b0 = canonicalize(before, cap);
  const LogicalConfiguration a0 = canonicalize(after, cap);

  // The modification may only add particles.
  for (const auto& [x, c] : b0.cells()) {
    const LogicalCell& ac = a0.get(x);
    for (std::size_t k = 0; k < 4; ++k)
      if (!c[k].is_zero() && ac[k] != c[k])
        return ValidationReport::fail(1, "existing particle at " + std::to_string(x) + " was changed");
  }
  for (const auto& [x, c] : a0.cells()) {
    const LogicalCell& bc = b0.get(x);
    for (std::size_t k = 0; k < 4; ++k)
      if (!c[k].is_zero() && bc[k].is_zero()) ++rep.added;
  }
  if (rep.added > budget.a) {
    auto r = ValidationReport::fail(1, "added " + std::to_string(rep.added) + " particles, budget " +
                                           std::to_string(budget.a));
    r.added = rep.added;
    return r;
  }

  const Time full = horizon ? *horizon : std::max({dispersal_time(b0, cap), dispersal_time(a0, cap), budget.t}) + 1;
  const Diagram B = record_diagram(b0, full, cap);
  const Diagram A = record_diagram(a0, full, cap);
  const Time window = budget.weak ? std::min(budget.t, full) : full;

  auto count = [](const LogicalCell& c) { return nonzero_tracks(c); };
  auto fail = [&](int cond, const std::string& why) {
    auto r = ValidationReport::fail(cond, why);
    r.added = rep.added;
    r.new_lines = rep.new_lines;
    r.new_crossings = rep.new_crossings;
    return r;
  };
  auto where = [](Coord x, Time t) { return "(" + std::to_string(x) + ", " + std::to_string(t) + ")"; };

  // Condition 2: new trajectory lines and new crossings.
  for (const auto& l : A.lines)
    if (!B.lines.count(l)) {
      // a line only counts if it carries a particle inside the window
      bool inside = false;
      for (Time t = 0; t <= window && !inside; ++t) {
        const LogicalCell& c = cell_at(A, l.at(t), t);
        inside = !c[static_cast<std::size_t>(track_of_speed(l.speed))].is_zero();
      }
      if (inside) ++rep.new_lines;
    }
  for (const auto& [key, c] : A.cells) {
    if (key.second > window) continue;
    if (count(c) >= 2 && count(cell_at(B, key.first, key.second)) < 2) ++rep.new_crossings;
  }
  if (rep.new_lines > budget.a) return fail(2, "too many new lines: " + std::to_string(rep.new_lines));
  if (rep.new_crossings > budget.b) return fail(2, "too many new crossings: " + std::to_string(rep.new_crossings));

  // Condition 3: existing crossings must not turn into collisions.
  for (const auto& [key, c] : B.cells) {
    if (key.second > window) continue;
    const int nb = count(c);
    if (nb == 2 && count(cell_at(A, key.first, key.second)) >= 3)
      return fail(3, "crossing at " + where(key.first, key.second) + " became a collision");
  }

  // Condition 4: protected lines and occupied lines.
  for (const auto& l : budget.protected_lines) {
    const std::size_t k = static_cast<std::size_t>(track_of_speed(l.speed));
    for (Time t = 0; t <= window; ++t) {
      const Coord x = l.at(t);
      const LogicalCell& ac = cell_at(A, x, t);
      const LogicalCell& bc = cell_at(B, x, t);
      if (ac[k] != bc[k]) return fail(4, "protected " + to_string(l) + " changed at " + where(x, t));
      if (count(ac) >= 2 && count(bc) < 2) return fail(4, "new crossing on protected " + to_string(l) + " at " + where(x, t));
    }
  }
  for (const auto& l : B.lines) {
    const std::size_t k = static_cast<std::size_t>(track_of_speed(l.speed));
    bool occupied = false;
    for (Time t = 0; t <= window && !occupied; ++t) occupied = !cell_at(B, l.at(t), t)[k].is_zero();
    if (!occupied) continue;
    for (Time t = 0; t <= window; ++t) {
      const Coord x = l.at(t);
      if (cell_at(A, x, t)[k] != cell_at(B, x, t)[k])
        return fail(4, "occupied " + to_string(l) + " changed at " + where(x, t));
    }
  }

  // Condition 5: nothing new inside the region at time t except on target lines.
  if (budget.t <= full)
    for (Coord x = budget.region.lo; x <= budget.region.hi; ++x) {
      const LogicalCell& ac = cell_at(A, x, budget.t);
      const LogicalCell& bc = cell_at(B, x, budget.t);
      for (int k = 0; k < 4; ++k) {
        if (budget.target_lines.count(Line::through(x, budget.t, speed_of_track(k)))) continue;
        if (!ac[static_cast<std::size_t>(k)].is_zero() && bc[static_cast<std::size_t>(k)].is_zero())
          return fail(5, "new particle at forbidden position " + where(x, budget.t));
      }
    }

  // Condition 6: no new collisions on target lines after t.
  if (!budget.weak)
    for (const auto& [key, c] : A.cells) {
      if (key.second <= budget.t || count(c) < 3 || count(cell_at(B, key.first, key.second)) >= 3) continue;
      for (int s : kSpeeds)
        if (budget.target_lines.count(Line::through(key.first, key.second, s)))
          return fail(6, "new collision on target line at " + where(key.first, key.second));
    }

  rep.valid = true;
  return rep;
}

DiagramLedger ledger_from_census(const LogicalConfiguration& x0, Time horizon, unsigned cap) {
  DiagramLedger led;
  const Census c = census(x0, 0, horizon, cap);
  for (const auto& p : c.particles) led.occupied_lines.insert(Line::through(p.pos.x, p.pos.t, p.pos.speed));
  for (const auto& p : c.crossings) led.crossings.insert({p.x, p.t});
  for (const auto& p : c.collisions) led.collisions.insert({p.x, p.t});
  return led;
}

}  // namespace puca
