#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "puca/circuit.hpp"
#include "puca/gadget_synth.hpp"

namespace puca {

// Runs `gadget` together with each block pattern (bit 4i+k is track k of cell
// i) for t steps, 64 patterns per machine word, and returns the block
// contents at time t for every pattern.  Particles that can no longer reach
// the block are dropped along the way.
std::vector<std::uint64_t> run_block_patterns(const Configuration& gadget, int n,
                                              const std::vector<std::uint64_t>& patterns, Time t);

struct PatternResult {
  std::uint64_t pattern = 0;
  std::uint64_t expected = 0;
  std::uint64_t got = 0;
  bool ok() const { return expected == got; }
};

struct Counterexample {
  std::string check;  // "concrete" or "symbolic"
  std::uint64_t pattern = 0;
  Coord cell = 0;
  std::string expected, got;
};

struct VerifyOptions {
  enum class Concrete { Exhaustive, Sample, Off };
  Concrete concrete = Concrete::Exhaustive;
  bool symbolic = true;
  unsigned exhaustive_cap = 16;  // larger blocks are sampled
  std::size_t samples = 64;
  std::uint64_t seed = 1;
};

struct VerificationReport {
  int n = 1;
  Time t_final = 0;
  std::size_t particles = 0;
  bool symbolic_checked = false, symbolic_ok = true;
  bool concrete_checked = false, sampled = false;
  std::vector<PatternResult> patterns;
  std::optional<Counterexample> counterexample;

  std::size_t failed_patterns() const;
  bool ok() const;
};

VerificationReport verify_plan(const GadgetPlan& plan, const BlockFunction& h, const VerifyOptions& opt = {});

}  // namespace puca
