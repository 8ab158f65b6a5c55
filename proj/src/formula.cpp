#include "puca/formula.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace puca {

namespace detail {

struct Node {
  Formula::Kind kind;
  std::uint32_t var = 0;
  const Node* l = nullptr;
  const Node* r = nullptr;
  std::uint64_t id = 0;
  std::vector<std::uint32_t> support;

  // Lazily filled, guarded by the store mutex.
  mutable bool has_tt = false;
  mutable std::vector<std::uint64_t> tt;  // over `support`
  mutable bool has_sem = false;
  mutable std::vector<std::uint32_t> essential;
  mutable const Node* rep = nullptr;
};

}  // namespace detail

namespace {

using detail::Node;
using Kind = Formula::Kind;

// Truth tables of intermediate nodes are cached when the support is at most
// this wide; wider ones are evaluated over the DAG word by word.
constexpr std::size_t kCachedSupport = 12;

constexpr std::uint64_t kVarMask[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

std::size_t word_count(std::size_t k) { return k <= 6 ? 1 : (std::size_t{1} << (k - 6)); }

std::uint64_t tail_mask(std::size_t k) {
  return k >= 6 ? ~0ull : ((1ull << (1u << k)) - 1);
}

struct StructKey {
  Kind kind;
  std::uint32_t var;
  std::uint64_t l, r;
  bool operator==(const StructKey&) const = default;
};

struct StructKeyHash {
  std::size_t operator()(const StructKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.kind) * 0x9E3779B97F4A7C15ull;
    h ^= k.var + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    h ^= k.l * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= k.r * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class Store {
 public:
  Store() {
    zero_ = make_raw(Kind::Zero, 0, nullptr, nullptr);
    one_ = make_raw(Kind::One, 0, nullptr, nullptr);
  }

  std::recursive_mutex mu;

  const Node* zero() const { return zero_; }
  const Node* one() const { return one_; }

  const Node* var(std::uint32_t v) {
    std::lock_guard lock(mu);
    return intern(Kind::Var, v, nullptr, nullptr);
  }

  const Node* negate(const Node* x) {
    std::lock_guard lock(mu);
    if (x == zero_) return one_;
    if (x == one_) return zero_;
    if (x->kind == Kind::Nand && x->l == x->r) return x->l;
    return intern(Kind::Nand, 0, x, x);
  }

  const Node* nand(const Node* a, const Node* b) {
    std::lock_guard lock(mu);
    if (a->id > b->id) std::swap(a, b);
    if (a == zero_) return one_;
    if (a == one_) return negate(b);
    if (a == b) return negate(a);
    if (b->kind == Kind::Nand && b->l == a && b->r == a) return one_;
    if (a->kind == Kind::Nand && a->l == b && a->r == b) return one_;
    return intern(Kind::Nand, 0, a, b);
  }

  std::size_t size() {
    std::lock_guard lock(mu);
    return nodes_.size();
  }

  std::unordered_map<std::string, const Node*> semantic;

 private:
  const Node* make_raw(Kind kind, std::uint32_t var, const Node* l, const Node* r) {
    Node& n = nodes_.emplace_back();
    n.kind = kind;
    n.var = var;
    n.l = l;
    n.r = r;
    n.id = nodes_.size() - 1;
    if (kind == Kind::Var) {
      n.support = {var};
    } else if (kind == Kind::Nand) {
      std::set_union(l->support.begin(), l->support.end(), r->support.begin(), r->support.end(),
                     std::back_inserter(n.support));
    }
    table_.emplace(StructKey{kind, var, l ? l->id : 0, r ? r->id : 0}, &n);
    return &n;
  }

  const Node* intern(Kind kind, std::uint32_t var, const Node* l, const Node* r) {
    auto it = table_.find(StructKey{kind, var, l ? l->id : 0, r ? r->id : 0});
    if (it != table_.end()) return it->second;
    return make_raw(kind, var, l, r);
  }

  std::deque<Node> nodes_;
  std::unordered_map<StructKey, const Node*, StructKeyHash> table_;
  const Node* zero_ = nullptr;
  const Node* one_ = nullptr;
};

Store& store() {
  static Store s;
  return s;
}

// Re-indexes a table over `from` vars onto the wider `to` var list.
std::vector<std::uint64_t> expand(const std::vector<std::uint64_t>& tt, const std::vector<std::uint32_t>& from,
                                  const std::vector<std::uint32_t>& to) {
  if (from == to) return tt;
  const std::size_t k = to.size();
  std::vector<std::size_t> pos(from.size());
  for (std::size_t j = 0, p = 0; j < from.size(); ++j) {
    while (to[p] != from[j]) ++p;
    pos[j] = p;
  }
  std::vector<std::uint64_t> out(word_count(k), 0);
  const std::size_t rows = std::size_t{1} << k;
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t ci = 0;
    for (std::size_t j = 0; j < pos.size(); ++j) ci |= ((i >> pos[j]) & 1u) << j;
    if ((tt[ci >> 6] >> (ci & 63)) & 1u) out[i >> 6] |= 1ull << (i & 63);
  }
  return out;
}

void topo_order(const Node* root, std::vector<const Node*>& order) {
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<const Node*, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, done] = stack.back();
    stack.pop_back();
    if (done) {
      order.push_back(n);
      continue;
    }
    if (!seen.insert(n).second) continue;
    stack.emplace_back(n, true);
    if (n->kind == Kind::Nand) {
      if (!seen.count(n->r)) stack.emplace_back(n->r, false);
      if (!seen.count(n->l)) stack.emplace_back(n->l, false);
    }
  }
}

void dag_eval(const Node* root) {
  const auto& S = root->support;
  const std::size_t k = S.size();
  std::vector<const Node*> order;
  topo_order(root, order);
  std::unordered_map<const Node*, std::size_t> index;
  index.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;
  std::unordered_map<std::uint32_t, std::size_t> var_pos;
  for (std::size_t p = 0; p < k; ++p) var_pos[S[p]] = p;

  // Per node: opcode 0 const0, 1 const1, 2 var (arg = position), 3 nand (arg/arg2 = operand slots).
  std::vector<std::uint8_t> op(order.size());
  std::vector<std::size_t> arg(order.size()), arg2(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Node* n = order[i];
    switch (n->kind) {
      case Kind::Zero: op[i] = 0; break;
      case Kind::One: op[i] = 1; break;
      case Kind::Var: op[i] = 2; arg[i] = var_pos[n->var]; break;
      case Kind::Nand: op[i] = 3; arg[i] = index[n->l]; arg2[i] = index[n->r]; break;
    }
  }
  const std::size_t words = word_count(k);
  std::vector<std::uint64_t> out(words);
  std::vector<std::uint64_t> val(order.size());
  for (std::size_t w = 0; w < words; ++w) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      switch (op[i]) {
        case 0: val[i] = 0; break;
        case 1: val[i] = ~0ull; break;
        case 2: {
          const std::size_t p = arg[i];
          val[i] = p < 6 ? kVarMask[p] : (((w >> (p - 6)) & 1u) ? ~0ull : 0ull);
          break;
        }
        default: val[i] = ~(val[arg[i]] & val[arg2[i]]); break;
      }
    }
    out[w] = val.back();
  }
  out.back() &= tail_mask(k);
  root->tt = std::move(out);
  root->has_tt = true;
}

void compute_local(const Node* n) {
  switch (n->kind) {
    case Kind::Zero: n->tt = {0}; break;
    case Kind::One: n->tt = {1}; break;
    case Kind::Var: n->tt = {2}; break;
    case Kind::Nand: {
      auto a = expand(n->l->tt, n->l->support, n->support);
      auto b = expand(n->r->tt, n->r->support, n->support);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = ~(a[i] & b[i]);
      a.back() &= tail_mask(n->support.size());
      n->tt = std::move(a);
      break;
    }
  }
  n->has_tt = true;
}

// Caller holds the store mutex.
void ensure_tt(const Node* root, unsigned cap) {
  if (root->has_tt) return;
  if (root->support.size() > cap) throw SupportTooLarge(root->support.size(), cap);
  if (root->support.size() > kCachedSupport) {
    dag_eval(root);
    return;
  }
  std::vector<const Node*> stack{root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    if (n->has_tt) {
      stack.pop_back();
      continue;
    }
    if (n->kind == Kind::Nand && (!n->l->has_tt || !n->r->has_tt)) {
      if (!n->l->has_tt) stack.push_back(n->l);
      if (!n->r->has_tt) stack.push_back(n->r);
      continue;
    }
    compute_local(n);
    stack.pop_back();
  }
}

bool depends_on(const std::vector<std::uint64_t>& tt, std::size_t p) {
  static constexpr std::uint64_t kLow[6] = {
      0x5555555555555555ull, 0x3333333333333333ull, 0x0F0F0F0F0F0F0F0Full,
      0x00FF00FF00FF00FFull, 0x0000FFFF0000FFFFull, 0x00000000FFFFFFFFull,
  };
  if (p < 6) {
    const unsigned shift = 1u << p;
    for (auto w : tt)
      if (((w >> shift) & kLow[p]) != (w & kLow[p])) return true;
    return false;
  }
  const std::size_t stride = std::size_t{1} << (p - 6);
  for (std::size_t w = 0; w < tt.size(); ++w)
    if (!(w & stride) && tt[w] != tt[w | stride]) return true;
  return false;
}

std::vector<std::uint64_t> project(const std::vector<std::uint64_t>& tt, const std::vector<std::size_t>& keep) {
  const std::size_t k = keep.size();
  std::vector<std::uint64_t> out(word_count(k), 0);
  const std::size_t rows = std::size_t{1} << k;
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t oi = 0;
    for (std::size_t j = 0; j < k; ++j) oi |= ((i >> j) & 1u) << keep[j];
    if ((tt[oi >> 6] >> (oi & 63)) & 1u) out[i >> 6] |= 1ull << (i & 63);
  }
  return out;
}

// Caller holds the store mutex.
void ensure_sem(const Node* n, unsigned cap) {
  if (n->support.size() > cap) throw SupportTooLarge(n->support.size(), cap);
  if (n->has_sem) return;
  Store& s = store();
  if (n->kind == Kind::Zero || n->kind == Kind::One || n->kind == Kind::Var) {
    if (n->kind == Kind::Var) n->essential = n->support;
    n->rep = n;
    n->has_sem = true;
    return;
  }
  ensure_tt(n, cap);
  std::vector<std::size_t> keep;
  for (std::size_t p = 0; p < n->support.size(); ++p)
    if (depends_on(n->tt, p)) keep.push_back(p);
  std::vector<std::uint64_t> proj = keep.size() == n->support.size() ? n->tt : project(n->tt, keep);
  std::vector<std::uint32_t> ess;
  for (auto p : keep) ess.push_back(n->support[p]);

  const Node* rep = nullptr;
  if (ess.empty()) {
    rep = (proj[0] & 1u) ? s.one() : s.zero();
  } else if (ess.size() == 1) {
    const Node* v = s.var(ess[0]);
    rep = (proj[0] & 3u) == 2u ? v : s.negate(v);
  } else {
    std::string key;
    key.resize(ess.size() * 4 + proj.size() * 8);
    std::memcpy(key.data(), ess.data(), ess.size() * 4);
    std::memcpy(key.data() + ess.size() * 4, proj.data(), proj.size() * 8);
    auto [it, inserted] = s.semantic.emplace(std::move(key), n);
    rep = it->second;
  }
  n->essential = std::move(ess);
  n->rep = rep;
  n->has_sem = true;
}

}  // namespace

Formula::Formula() : node_(store().zero()) {}
Formula Formula::zero() { return Formula(store().zero()); }
Formula Formula::one() { return Formula(store().one()); }
Formula Formula::var(VarId v) { return Formula(store().var(v.index)); }

Formula::Kind Formula::kind() const { return node_->kind; }

VarId Formula::var_id() const {
  if (node_->kind != Kind::Var) throw std::logic_error("not a variable");
  return VarId{node_->var};
}

Formula Formula::lhs() const {
  if (node_->kind != Kind::Nand) throw std::logic_error("not a nand node");
  return Formula(node_->l);
}

Formula Formula::rhs() const {
  if (node_->kind != Kind::Nand) throw std::logic_error("not a nand node");
  return Formula(node_->r);
}

std::uint64_t Formula::id() const { return node_->id; }
const std::vector<std::uint32_t>& Formula::support() const { return node_->support; }

Formula nand(Formula a, Formula b) { return Formula(store().nand(a.node(), b.node())); }
Formula operator~(Formula a) { return Formula(store().negate(a.node())); }
Formula operator&(Formula a, Formula b) { return ~nand(a, b); }
Formula operator|(Formula a, Formula b) { return nand(~a, ~b); }

Formula operator^(Formula a, Formula b) {
  const Formula t = nand(a, b);
  return nand(nand(a, t), nand(b, t));
}

Formula conditional(Formula a, Formula b, Formula c) {
  if (a.is_one() || b == c) return b;
  if (a.is_zero()) return c;
  return nand(nand(a, b), nand(~a, c));
}

Valuation Valuation::from_bits(std::uint64_t bits, unsigned n) {
  Valuation v;
  for (unsigned i = 0; i < n; ++i) v.set(VarId{i}, (bits >> i) & 1u);
  return v;
}

bool evaluate(Formula phi, const Valuation& v) {
  std::vector<const Node*> order;
  topo_order(phi.node(), order);
  std::unordered_map<const Node*, bool> val;
  val.reserve(order.size());
  for (const Node* n : order) {
    bool b = false;
    switch (n->kind) {
      case Kind::Zero: b = false; break;
      case Kind::One: b = true; break;
      case Kind::Var: {
        auto x = v.get(VarId{n->var});
        if (!x) throw std::out_of_range("no value for variable x" + std::to_string(n->var));
        b = *x;
        break;
      }
      case Kind::Nand: b = !(val[n->l] && val[n->r]); break;
    }
    val[n] = b;
  }
  return val[phi.node()];
}

std::vector<std::uint64_t> truth_table(Formula phi, const std::vector<std::uint32_t>& vars, unsigned cap) {
  if (vars.size() > cap) throw SupportTooLarge(vars.size(), cap);
  if (!std::is_sorted(vars.begin(), vars.end())) throw std::invalid_argument("variables must be sorted");
  const auto& S = phi.support();
  if (!std::includes(vars.begin(), vars.end(), S.begin(), S.end()))
    throw std::invalid_argument("variable list does not cover the support");
  std::lock_guard lock(store().mu);
  ensure_tt(phi.node(), cap);
  return expand(phi.node()->tt, S, vars);
}

Formula canonical(Formula phi, unsigned cap) {
  std::lock_guard lock(store().mu);
  ensure_sem(phi.node(), cap);
  return Formula(phi.node()->rep);
}

bool equivalent(Formula a, Formula b, unsigned cap) {
  if (a == b) return true;
  std::vector<std::uint32_t> u;
  std::set_union(a.support().begin(), a.support().end(), b.support().begin(), b.support().end(),
                 std::back_inserter(u));
  if (u.size() > cap) throw SupportTooLarge(u.size(), cap);
  return canonical(a, cap) == canonical(b, cap);
}

std::optional<bool> constant_value(Formula phi, unsigned cap) {
  const Formula c = canonical(phi, cap);
  if (c.is_zero()) return false;
  if (c.is_one()) return true;
  return std::nullopt;
}

std::vector<std::uint32_t> essential_support(Formula phi, unsigned cap) {
  std::lock_guard lock(store().mu);
  ensure_sem(phi.node(), cap);
  return phi.node()->essential;
}

namespace {

void prefix_rec(const Node* n, std::ostringstream& os, std::size_t& budget) {
  switch (n->kind) {
    case Kind::Zero: os << '0'; return;
    case Kind::One: os << '1'; return;
    case Kind::Var: os << 'x' << n->var; return;
    case Kind::Nand:
      if (budget == 0) {
        os << '#' << n->id;
        return;
      }
      --budget;
      os << "(nand ";
      prefix_rec(n->l, os, budget);
      os << ' ';
      prefix_rec(n->r, os, budget);
      os << ')';
      return;
  }
}

bool is_not(const Node* n) { return n->kind == Kind::Nand && n->l == n->r; }

void infix_rec(const Node* n, std::string& out, std::size_t max_len) {
  if (out.size() > max_len) return;
  switch (n->kind) {
    case Kind::Zero: out += '0'; return;
    case Kind::One: out += '1'; return;
    case Kind::Var: out += 'x' + std::to_string(n->var); return;
    case Kind::Nand: break;
  }
  if (is_not(n)) {
    const Node* x = n->l;
    if (x->kind == Kind::Nand && !is_not(x)) {  // and
      out += '(';
      infix_rec(x->l, out, max_len);
      out += " & ";
      infix_rec(x->r, out, max_len);
      out += ')';
      return;
    }
    out += '~';
    infix_rec(x, out, max_len);
    return;
  }
  if (is_not(n->l) && is_not(n->r)) {  // or
    out += '(';
    infix_rec(n->l->l, out, max_len);
    out += " | ";
    infix_rec(n->r->l, out, max_len);
    out += ')';
    return;
  }
  out += "~(";
  infix_rec(n->l, out, max_len);
  out += " & ";
  infix_rec(n->r, out, max_len);
  out += ')';
}

}  // namespace

std::string to_prefix(Formula phi, std::size_t max_nodes) {
  std::ostringstream os;
  std::size_t budget = max_nodes;
  prefix_rec(phi.node(), os, budget);
  return os.str();
}

std::string to_infix(Formula phi, std::size_t max_len) {
  std::string out;
  infix_rec(phi.node(), out, max_len);
  if (out.size() > max_len) {
    out.resize(max_len);
    out += "...";
  }
  return out;
}

std::size_t formula_store_size() { return store().size(); }

}  // namespace puca
