#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "puca/geometry.hpp"
#include "puca/logical_ca.hpp"

namespace puca {

// A particle placed at time 0.
struct Placement {
  Coord x = 0;
  int speed = 0;
  Formula label = Formula::one();
  auto operator<=>(const Placement& o) const {
    return std::pair(x, speed) <=> std::pair(o.x, o.speed);
  }
  bool operator==(const Placement& o) const { return x == o.x && speed == o.speed && label == o.label; }
};

class SpacetimeStore;

// Outcome of trying a set of placements against a store.  Holds the exact
// difference between the modified and the unmodified diagram.
class Trial {
 public:
  struct Entry {
    Time t;
    bool revert;  // back to the unmodified value from t on
    Formula label;
  };

  const ValidationReport& report() const { return report_; }
  bool valid() const { return report_.valid; }
  // Label on `l` at time t in the modified diagram.
  Formula value(const Line& l, Time t) const;
  const std::vector<Placement>& placements() const { return placements_; }

 private:
  friend class SpacetimeStore;
  const SpacetimeStore* base_ = nullptr;
  ValidationReport report_;
  std::vector<Placement> placements_;
  std::map<Line, std::vector<Entry>> overrides_;
  std::map<std::pair<Coord, Time>, int> counts_;  // Boolean particle count at touched points
};

// Exact space-time diagram of a logical configuration, stored as the label
// history of every trajectory line.  Diagrams here always disperse, so the
// history is finite.
class SpacetimeStore {
 public:
  struct Change {
    Time t;
    Formula label;  // value from t on
  };
  using History = std::vector<Change>;

  SpacetimeStore() = default;
  // `block` is the region where placements are not allowed.
  static SpacetimeStore from_initial(const LogicalConfiguration& x0, Interval block,
                                     unsigned cap = kDefaultSupportCap);

  Formula value(const Line& l, Time t) const;
  // Carries a Boolean particle at some time up to `until`.
  bool occupied(const Line& l, Time until = kForever) const;
  int count_at(Coord x, Time t) const;
  Formula label_at(Coord x, Time t, int speed) const { return value(Line::through(x, t, speed), t); }

  const std::map<Coord, History>& lines(int speed) const {
    return lines_[static_cast<std::size_t>(track_of_speed(speed))];
  }
  const std::map<std::pair<Coord, Time>, int>& crossing_points() const { return multi_; }
  const std::vector<Placement>& placements() const { return placements_; }
  const Interval& block() const { return block_; }

  std::size_t occupied_line_count() const;
  std::size_t crossing_count() const { return multi_.size(); }
  std::size_t collision_count() const;
  ResourceCounts counts(std::size_t protected_lines) const;

  Trial trial(const std::vector<Placement>& ps, const ControlBudget& budget, std::size_t max_events = 2000000) const;
  void commit(const Trial& t);

  // Initial configuration including every committed placement.
  LogicalConfiguration initial() const { return initial_; }
  LogicalConfiguration state_at(Time t) const;

  // Latest time at which any Boolean particle lies inside `I`.
  Time last_time_inside(const Interval& I) const;

  unsigned cap() const { return cap_; }

 private:
  friend class Trial;
  History& history(const Line& l) { return lines_[static_cast<std::size_t>(track_of_speed(l.speed))][l.base]; }
  const History* find(const Line& l) const;

  std::array<std::map<Coord, History>, 4> lines_;
  std::map<std::pair<Coord, Time>, int> multi_;  // points with two or more Boolean particles
  std::vector<Placement> placements_;
  LogicalConfiguration initial_;
  Interval block_;
  unsigned cap_ = kDefaultSupportCap;
};

}  // namespace puca
