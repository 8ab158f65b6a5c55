#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace puca {

struct VarId {
  std::uint32_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

namespace detail {
struct Node;
}

inline constexpr unsigned kDefaultSupportCap = 24;

class SupportTooLarge : public std::runtime_error {
 public:
  SupportTooLarge(std::size_t size, unsigned cap)
      : std::runtime_error("formula support of " + std::to_string(size) + " variables exceeds cap " +
                           std::to_string(cap)) {}
};

// Handle to a hash-consed NAND node.  Two handles compare equal iff they point
// at the same node, so structurally equal formulas are always equal.
class Formula {
 public:
  enum class Kind : std::uint8_t { Zero, One, Var, Nand };

  Formula();  // constant 0

  static Formula zero();
  static Formula one();
  static Formula var(VarId v);
  static Formula constant(bool b) { return b ? one() : zero(); }

  Kind kind() const;
  bool is_zero() const { return kind() == Kind::Zero; }
  bool is_one() const { return kind() == Kind::One; }
  bool is_const() const { return is_zero() || is_one(); }
  VarId var_id() const;
  Formula lhs() const;
  Formula rhs() const;
  std::uint64_t id() const;
  const std::vector<std::uint32_t>& support() const;

  bool operator==(const Formula& o) const { return node_ == o.node_; }
  bool operator!=(const Formula& o) const { return node_ != o.node_; }

  const detail::Node* node() const { return node_; }
  explicit Formula(const detail::Node* n) : node_(n) {}

 private:
  const detail::Node* node_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const noexcept { return std::hash<const void*>{}(f.node()); }
};

Formula nand(Formula a, Formula b);
Formula operator~(Formula a);
Formula operator&(Formula a, Formula b);
Formula operator|(Formula a, Formula b);
Formula operator^(Formula a, Formula b);
// a ? b : c
Formula conditional(Formula a, Formula b, Formula c);

class Valuation {
 public:
  Valuation() = default;
  void set(VarId v, bool b) { values_[v.index] = b; }
  std::optional<bool> get(VarId v) const {
    auto it = values_.find(v.index);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  // Variables 0..n-1 from the low bits of `bits`.
  static Valuation from_bits(std::uint64_t bits, unsigned n);

 private:
  std::unordered_map<std::uint32_t, bool> values_;
};

// Throws std::out_of_range when a support variable has no value.
bool evaluate(Formula phi, const Valuation& v);

// Truth table over the given variables (variable vars[i] is bit i of the row index).
std::vector<std::uint64_t> truth_table(Formula phi, const std::vector<std::uint32_t>& vars,
                                       unsigned cap = kDefaultSupportCap);

bool equivalent(Formula a, Formula b, unsigned cap = kDefaultSupportCap);
std::optional<bool> constant_value(Formula phi, unsigned cap = kDefaultSupportCap);
inline bool is_constant(Formula phi, unsigned cap = kDefaultSupportCap) {
  return constant_value(phi, cap).has_value();
}
inline bool is_semantically_zero(Formula phi, unsigned cap = kDefaultSupportCap) {
  auto v = constant_value(phi, cap);
  return v && !*v;
}

// Variables the function actually depends on.
std::vector<std::uint32_t> essential_support(Formula phi, unsigned cap = kDefaultSupportCap);

// Representative of phi's semantic class.  Constants map to the constant nodes,
// literals to the variable node or its single negation, everything else to the
// first formula seen with that function.
Formula canonical(Formula phi, unsigned cap = kDefaultSupportCap);

// Prefix NAND notation with shared subterms printed once per occurrence:
// "0", "1", "x3", "(nand A B)".  Large DAGs print as "#<id>" beyond max_nodes.
std::string to_prefix(Formula phi, std::size_t max_nodes = 4096);
// Compact infix rendering using ~, &, | where the shape allows it.
std::string to_infix(Formula phi, std::size_t max_len = 200);

std::size_t formula_store_size();

}  // namespace puca
