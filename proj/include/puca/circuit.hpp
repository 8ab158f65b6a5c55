#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "puca/core_ca.hpp"
#include "puca/formula.hpp"
#include "puca/logical_ca.hpp"

namespace puca {

struct Ref {
  enum class Kind : std::uint8_t { Const0, Const1, Input, Gate } kind = Kind::Const0;
  std::uint32_t index = 0;

  static Ref zero() { return {Kind::Const0, 0}; }
  static Ref one() { return {Kind::Const1, 0}; }
  static Ref input(std::uint32_t i) { return {Kind::Input, i}; }
  static Ref gate(std::uint32_t i) { return {Kind::Gate, i}; }
  bool is_const() const { return kind == Kind::Const0 || kind == Kind::Const1; }
  auto operator<=>(const Ref&) const = default;
};

struct Gate {
  std::string name;
  Ref lhs, rhs;
};

// NAND netlist in topological order: gate i may only read inputs and gates < i.
class Netlist {
 public:
  Netlist() = default;
  explicit Netlist(std::uint32_t inputs) : inputs_(inputs) {}

  std::uint32_t input_count() const { return inputs_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<Ref>& outputs() const { return outputs_; }
  std::size_t gate_count() const { return gates_.size(); }

  Ref add_gate(Ref a, Ref b, std::string name = {});
  void add_output(Ref r);
  void set_outputs(std::vector<Ref> outs);

  std::string ref_name(Ref r) const;

  std::vector<bool> evaluate(const std::vector<bool>& in) const;
  // 64 input assignments at once; lane j of in[i] is input i of assignment j.
  std::vector<std::uint64_t> evaluate_words(const std::vector<std::uint64_t>& in) const;

 private:
  void check(Ref r, std::size_t limit) const;
  std::uint32_t inputs_ = 0;
  std::vector<Gate> gates_;
  std::vector<Ref> outputs_;
};

class NetlistError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Text format:
//   inputs <m>
//   gate <name> = nand <ref> <ref>      (also: not <ref>, and/or/xor <ref> <ref>)
//   outputs <ref> ...
// refs are in<i>, 0, 1 or an earlier gate name; '#' starts a comment.
Netlist parse_netlist(std::string_view text);
std::string serialize(const Netlist& c);

std::vector<Formula> netlist_to_formulas(const Netlist& c, const std::vector<Formula>& inputs);

// Builds NAND netlists with constant folding and structural sharing.
class NetlistBuilder {
 public:
  explicit NetlistBuilder(std::uint32_t inputs) : net_(inputs) {}

  Ref nand(Ref a, Ref b);
  Ref not_(Ref a) { return nand(a, a); }
  Ref and_(Ref a, Ref b) { return not_(nand(a, b)); }
  Ref cond(Ref a, Ref b, Ref c);  // a ? b : c

  // Netlist restricted to gates reachable from `outputs`, renumbered g0, g1, ...
  Netlist finish(const std::vector<Ref>& outputs) const;
  std::size_t raw_gate_count() const { return net_.gate_count(); }

 private:
  Netlist net_;
  std::map<std::pair<Ref, Ref>, Ref> memo_;
};

// A block function on A^n, either as a netlist on 4n inputs or as a table.
// Input/output bit 4i+k is track k of cell i.
struct BlockFunction {
  int n = 1;
  std::string name;
  Netlist netlist;

  // Evaluate on a concrete block pattern (bit 4i+k).
  std::uint64_t apply(std::uint64_t pattern) const;

  static BlockFunction from_netlist(int n, Netlist c, std::string name = {});
  // table[p] is the image of pattern p; synthesized by Shannon expansion.
  static BlockFunction from_table(int n, const std::vector<std::uint64_t>& table, std::string name = {});
  static BlockFunction builtin(const std::string& name, int n);
  static std::vector<std::string> builtin_names();
};

struct EffectiveCircuit {
  Netlist netlist;             // inputs: collected particles, outputs: kept targets
  std::vector<std::size_t> kept;  // indices into the reverse-diffused particle list
};

// Netlist mapping the dispersed particle labels (in the order of `diffusion.particles`)
// to the labels of the particles that must be placed before the reverse diffusion.
EffectiveCircuit build_effective_circuit(const BlockFunction& h, const DiffusionResult& diffusion,
                                         const ReverseDiffusionResult& reverse);

}  // namespace puca
