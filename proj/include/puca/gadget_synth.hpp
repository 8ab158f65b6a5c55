#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "puca/circuit.hpp"
#include "puca/spacetime.hpp"

namespace puca {

// A redirection of a particle of speed `from` onto speed `to`, triggered by
// two auxiliary constant particles meeting it.  Copies keep the original
// particle; u-turns (to == -from) consume it.
struct Primitive {
  int from = 0;
  int to = 0;
  std::array<int, 2> aux{};
  bool copy = true;
};

// Derived from the collision rule at startup; every cross-class pair has a
// copy and every reversal a u-turn.
const std::vector<Primitive>& primitive_table();
std::optional<Primitive> primitive(int from, int to);

// Label `label` travels on `line` from time `t` on.
struct SourceParticle {
  Line line;
  Formula label;
  Time t = 0;
};

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoFeasibleParameters : public SynthesisError {
 public:
  NoFeasibleParameters(const std::string& what, Time lo, Time hi, ValidationReport last)
      : SynthesisError(what), lo_(lo), hi_(hi), last_(std::move(last)) {}
  Time lo() const { return lo_; }
  Time hi() const { return hi_; }
  const ValidationReport& last() const { return last_; }

 private:
  Time lo_, hi_;
  ValidationReport last_;
};

struct MovementSolution {
  Line source, target;
  int via = 0;  // speed between the first two collisions
  Time t = 0;
  Time k = 0;        // first collision at t + k
  Time k_prime = 0;  // second collision k' later
  Coord x1 = 0, x2 = 0;
  Time tau1 = 0, tau2 = 0;
  bool destructive = false;
  int elementary = 1;  // 2 when composed of two elementary moves
  std::vector<int> speeds;  // speed sequence from source to target
  std::vector<Coord> xs;    // collision points
  std::vector<Time> taus;
  std::vector<Placement> added;
  std::vector<Line> new_lines;
  ValidationReport report;
  std::size_t candidates = 0;
};

// Moves the label of `p` onto `target` so that it is there at `deadline`.
// The caller's budget supplies protected/target lines, region and mode; its
// time is set to `deadline`.  On success the modification is committed.
// A single elementary move is tried first (ascending k); if none fits, two
// elementary moves through an intermediate speed are searched.  Throws
// NoFeasibleParameters when nothing fits before the deadline.
MovementSolution move_particle(SpacetimeStore& st, const SourceParticle& p, const Line& target, Time deadline,
                               ControlBudget budget);

// Sequential moves; the targets still to be served are protected.
std::vector<MovementSolution> move_many(SpacetimeStore& st, const std::vector<SourceParticle>& ps,
                                        const std::vector<Line>& targets, Time deadline, ControlBudget budget);

struct NandSolution {
  Line a, b, target;  // a is the input that is slowed down
  Time k1 = 0, k2 = 0, k = 0;
  std::array<Time, 5> tau{};  // copy of a, slow-down, copy of b, merge, output
  bool constant = false;  // output emitted directly as a constant particle
  bool empty = false;     // output is identically zero, nothing added
  Formula label;          // label on the target from ready() on
  std::vector<Placement> added;
  ValidationReport report;
  std::size_t candidates = 0;
  Time ready() const { return constant ? 0 : tau[4]; }
};

// Writes not(b1 and b2) onto `target` (a +1 line left of both inputs).
// Inputs must be +1 particles; they may coincide (negation).
NandSolution nand_gadget(SpacetimeStore& st, const SourceParticle& p1, const SourceParticle& p2, const Line& target,
                         Time start, ControlBudget budget);

struct CircuitEvaluation {
  std::vector<SourceParticle> gate_outputs;  // one per gate; label zero if absent
  std::vector<NandSolution> gadgets;
  Time end = 0;
};

// The first +1 line left of every occupied +1 line that has no crossing on it
// and is neither protected nor a target.
Line fresh_work_line(const SpacetimeStore& st, const ControlBudget& budget);

// Evaluates a NAND netlist gate by gate, each gate writing onto a fresh work
// line.
CircuitEvaluation evaluate_circuit(SpacetimeStore& st, const std::vector<SourceParticle>& inputs, const Netlist& c,
                                   Time start, ControlBudget budget);

struct StageReport {
  std::string name;
  Time start = 0;
  Time end = 0;
  std::size_t modifications = 0;
  std::size_t particles = 0;
  std::size_t retries = 0;
  ResourceCounts counts;
};

struct GadgetPlan {
  int n = 1;
  std::string function;
  std::vector<Placement> particles;
  Time t_dis = 0, t_coll = 0, t_comp = 0, t_ass = 0, t_final = 0, t_back = 0;
  std::size_t gates = 0;      // C, gates of the effective circuit
  std::size_t collected = 0;  // m, particles moved in collection
  std::size_t assembled = 0;  // k, nonzero output particles
  std::size_t function_gates = 0;  // C_H
  std::size_t crossings = 0, collisions = 0, occupied_lines = 0;
  std::vector<StageReport> stages;

  Configuration gadget() const;
};

struct SynthesisOptions {
  std::size_t move_budget = 16;
  std::size_t nand_budget = 24;
  int max_retries = 6;
  std::function<void(const std::string&)> log;
};

class StageFailure : public SynthesisError {
 public:
  StageFailure(std::string stage, int retries, ValidationReport last, const std::string& why)
      : SynthesisError(stage + " stage failed after " + std::to_string(retries) + " retries: " + why),
        stage_(std::move(stage)), retries_(retries), last_(std::move(last)) {}
  const std::string& stage() const { return stage_; }
  int retries() const { return retries_; }
  const ValidationReport& last() const { return last_; }

 private:
  std::string stage_;
  int retries_;
  ValidationReport last_;
};

GadgetPlan synthesize(const BlockFunction& h, const SynthesisOptions& opt = {});

}  // namespace puca
