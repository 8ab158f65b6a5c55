#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "puca/core_ca.hpp"
#include "puca/formula.hpp"

namespace puca {

using LogicalCell = std::array<Formula, 4>;  // tracks +2, +1, -1, -2

int nonzero_tracks(const LogicalCell& c);
bool is_zero_cell(const LogicalCell& c);

// The logical extension of gamma.  Cells with fewer than three nonzero tracks
// are returned unchanged; otherwise each output is canonicalized.
LogicalCell logical_gamma(const LogicalCell& c, unsigned cap = kDefaultSupportCap);

class LogicalConfiguration {
 public:
  using Map = std::map<Coord, LogicalCell>;

  LogicalConfiguration() = default;

  const LogicalCell& get(Coord x) const;
  void set(Coord x, const LogicalCell& c);
  void set_track(Coord x, int speed, Formula f);
  Formula track(Coord x, int speed) const;

  const Map& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }
  std::size_t boolean_particle_count() const;
  std::vector<std::uint32_t> variables() const;

  bool operator==(const LogicalConfiguration& o) const { return cells_ == o.cells_; }

 private:
  Map cells_;
};

LogicalConfiguration embed(const Configuration& x);
// Cell i of [0, n) gets variables 4i..4i+3 on tracks +2, +1, -1, -2.
LogicalConfiguration fully_general(int n);
// Replaces every track by its canonical representative and drops zero cells.
LogicalConfiguration canonicalize(const LogicalConfiguration& x, unsigned cap = kDefaultSupportCap);

LogicalConfiguration logical_step(const LogicalConfiguration& x, unsigned cap = kDefaultSupportCap);
LogicalConfiguration logical_step_inverse(const LogicalConfiguration& x, unsigned cap = kDefaultSupportCap);
LogicalConfiguration logical_run(const LogicalConfiguration& x, Time t, unsigned cap = kDefaultSupportCap);

Configuration apply_valuation(const LogicalConfiguration& x, const Valuation& v);

struct SpacetimePosition {
  Coord x = 0;
  Time t = 0;
  int speed = 0;
  auto operator<=>(const SpacetimePosition&) const = default;
};

struct BooleanParticle {
  SpacetimePosition pos;
  Formula label;
};

struct CensusPoint {
  Coord x = 0;
  Time t = 0;
  int count = 0;
};

struct Census {
  std::vector<BooleanParticle> particles;
  std::vector<CensusPoint> crossings;   // two or more Boolean particles
  std::vector<CensusPoint> collisions;  // three or more
};

// Boolean particles, crossings and collisions of the diagram of x0 at every
// time in [t_min, t_max], counted on the state after gamma.
Census census(const LogicalConfiguration& x0, Time t_min, Time t_max, unsigned cap = kDefaultSupportCap);

// True when no two particles can meet at any later time: sorted by position,
// speeds never decrease.
bool forward_dispersed(const LogicalConfiguration& x);
// Backward analogue; additionally no two particles share a cell.
bool backward_dispersed(const LogicalConfiguration& x);

struct DiffusionResult {
  int n = 0;
  Time t_dis = 0;
  std::vector<BooleanParticle> particles;  // positions at time t_dis
  LogicalConfiguration state;               // full state at t_dis
};

DiffusionResult diffuse(int n, unsigned cap = kDefaultSupportCap);

struct ReverseDiffusionResult {
  int n = 0;
  Time t_back = 0;
  std::vector<BooleanParticle> particles;  // positions at time -t_back
  LogicalConfiguration state;               // full state at -t_back
};

// labels[4i + k] is the target track k of cell i.
ReverseDiffusionResult reverse_diffuse(int n, const std::vector<Formula>& labels,
                                       unsigned cap = kDefaultSupportCap);

// "<coordinate> <speed> <formula>" per Boolean particle.
std::string dump(const LogicalConfiguration& x);

}  // namespace puca
