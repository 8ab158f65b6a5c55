#include "puca/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace puca {

Ref Netlist::add_gate(Ref a, Ref b, std::string name) {
  check(a, gates_.size());
  check(b, gates_.size());
  if (name.empty()) name = "g" + std::to_string(gates_.size());
  gates_.push_back({std::move(name), a, b});
  return Ref::gate(static_cast<std::uint32_t>(gates_.size() - 1));
}

void Netlist::add_output(Ref r) {
  check(r, gates_.size());
  outputs_.push_back(r);
}

void Netlist::set_outputs(std::vector<Ref> outs) {
  for (const auto& r : outs) check(r, gates_.size());
  outputs_ = std::move(outs);
}

void Netlist::check(Ref r, std::size_t limit) const {
  if (r.kind == Ref::Kind::Input && r.index >= inputs_) throw std::out_of_range("input index out of range");
  if (r.kind == Ref::Kind::Gate && r.index >= limit) throw std::out_of_range("gate reference out of order");
}

std::string Netlist::ref_name(Ref r) const {
  switch (r.kind) {
    case Ref::Kind::Const0: return "0";
    case Ref::Kind::Const1: return "1";
    case Ref::Kind::Input: return "in" + std::to_string(r.index);
    case Ref::Kind::Gate: return gates_[r.index].name;
  }
  return "?";
}

std::vector<bool> Netlist::evaluate(const std::vector<bool>& in) const {
  std::vector<std::uint64_t> words(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) words[i] = in[i] ? 1 : 0;
  auto out = evaluate_words(words);
  std::vector<bool> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i] & 1u;
  return r;
}

std::vector<std::uint64_t> Netlist::evaluate_words(const std::vector<std::uint64_t>& in) const {
  if (in.size() != inputs_) throw std::invalid_argument("wrong number of circuit inputs");
  std::vector<std::uint64_t> g(gates_.size());
  auto val = [&](Ref r) -> std::uint64_t {
    switch (r.kind) {
      case Ref::Kind::Const0: return 0;
      case Ref::Kind::Const1: return ~0ull;
      case Ref::Kind::Input: return in[r.index];
      case Ref::Kind::Gate: return g[r.index];
    }
    return 0;
  };
  for (std::size_t i = 0; i < gates_.size(); ++i) g[i] = ~(val(gates_[i].lhs) & val(gates_[i].rhs));
  std::vector<std::uint64_t> out;
  out.reserve(outputs_.size());
  for (const auto& r : outputs_) out.push_back(val(r));
  return out;
}

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_uint(std::string_view s, std::uint32_t& v) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool valid_name(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  std::uint32_t dummy;
  if (s.size() > 2 && s.substr(0, 2) == "in" && parse_uint(s.substr(2), dummy)) return false;
  return true;
}

}  // namespace

Netlist parse_netlist(std::string_view text) {
  std::optional<Netlist> net;
  std::unordered_map<std::string, Ref> names;
  bool have_outputs = false;
  int line_no = 0;
  int last_line = 0;
  std::size_t start = 0;

  auto resolve = [&](std::string_view tok, int ln) -> Ref {
    if (tok == "0") return Ref::zero();
    if (tok == "1") return Ref::one();
    std::uint32_t i = 0;
    if (tok.size() > 2 && tok.substr(0, 2) == "in" && parse_uint(tok.substr(2), i)) {
      if (i >= net->input_count())
        throw NetlistError(ln, "input '" + std::string(tok) + "' out of range (" +
                                   std::to_string(net->input_count()) + " inputs)");
      return Ref::input(i);
    }
    auto it = names.find(std::string(tok));
    if (it == names.end()) throw NetlistError(ln, "unknown or forward reference '" + std::string(tok) + "'");
    return it->second;
  };

  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    auto w = split_words(line);
    if (w.empty()) {
      if (end == text.size()) break;
      continue;
    }
    last_line = line_no;
    if (w[0] == "inputs") {
      std::uint32_t m = 0;
      if (net) throw NetlistError(line_no, "duplicate 'inputs' line");
      if (w.size() != 2 || !parse_uint(w[1], m)) throw NetlistError(line_no, "expected 'inputs <count>'");
      net.emplace(m);
    } else if (w[0] == "gate") {
      if (!net) throw NetlistError(line_no, "'inputs' must come first");
      if (have_outputs) throw NetlistError(line_no, "gate after 'outputs'");
      if (w.size() < 4 || w[2] != "=") throw NetlistError(line_no, "expected 'gate <name> = <op> <refs>'");
      const std::string name(w[1]);
      if (!valid_name(name)) throw NetlistError(line_no, "invalid gate name '" + name + "'");
      if (names.count(name)) throw NetlistError(line_no, "duplicate gate name '" + name + "'");
      const std::string_view op = w[3];
      const std::size_t arity = w.size() - 4;
      const std::size_t want = op == "not" ? 1 : 2;
      if (op != "nand" && op != "not" && op != "and" && op != "or" && op != "xor")
        throw NetlistError(line_no, "unknown operation '" + std::string(op) + "'");
      if (arity != want)
        throw NetlistError(line_no, "'" + std::string(op) + "' takes " + std::to_string(want) + " operand(s), got " +
                                        std::to_string(arity));
      const std::size_t first_new = net->gate_count();
      const Ref a = resolve(w[4], line_no);
      const Ref b = want == 2 ? resolve(w[5], line_no) : a;
      Ref out;
      if (op == "nand" || op == "not") {
        out = net->add_gate(a, b, name);
      } else if (op == "and") {
        const Ref t = net->add_gate(a, b, name + ".n");
        out = net->add_gate(t, t, name);
      } else if (op == "or") {
        const Ref na = net->add_gate(a, a, name + ".a");
        const Ref nb = net->add_gate(b, b, name + ".b");
        out = net->add_gate(na, nb, name);
      } else {  // xor
        const Ref t = net->add_gate(a, b, name + ".t");
        const Ref u = net->add_gate(a, t, name + ".u");
        const Ref v = net->add_gate(b, t, name + ".v");
        out = net->add_gate(u, v, name);
      }
      names[name] = out;
      for (std::size_t g = first_new; g < net->gate_count(); ++g) names.emplace(net->gates()[g].name, Ref::gate(static_cast<std::uint32_t>(g)));
    } else if (w[0] == "outputs") {
      if (!net) throw NetlistError(line_no, "'inputs' must come first");
      if (have_outputs) throw NetlistError(line_no, "duplicate 'outputs' line");
      std::vector<Ref> outs;
      for (std::size_t i = 1; i < w.size(); ++i) outs.push_back(resolve(w[i], line_no));
      net->set_outputs(std::move(outs));
      have_outputs = true;
    } else {
      throw NetlistError(line_no, "unknown directive '" + std::string(w[0]) + "'");
    }
    if (end == text.size()) break;
  }
  if (!net) throw NetlistError(std::max(last_line, 1), "missing 'inputs' line");
  if (!have_outputs) throw NetlistError(last_line, "missing 'outputs' line");
  return *net;
}

std::string serialize(const Netlist& c) {
  std::ostringstream os;
  os << "inputs " << c.input_count() << '\n';
  for (const auto& g : c.gates())
    os << "gate " << g.name << " = nand " << c.ref_name(g.lhs) << ' ' << c.ref_name(g.rhs) << '\n';
  os << "outputs";
  for (const auto& r : c.outputs()) os << ' ' << c.ref_name(r);
  os << '\n';
  return os.str();
}

std::vector<Formula> netlist_to_formulas(const Netlist& c, const std::vector<Formula>& inputs) {
  if (inputs.size() != c.input_count()) throw std::invalid_argument("wrong number of circuit inputs");
  std::vector<Formula> g;
  g.reserve(c.gate_count());
  auto val = [&](Ref r) -> Formula {
    switch (r.kind) {
      case Ref::Kind::Const0: return Formula::zero();
      case Ref::Kind::Const1: return Formula::one();
      case Ref::Kind::Input: return inputs[r.index];
      case Ref::Kind::Gate: return g[r.index];
    }
    return Formula::zero();
  };
  for (const auto& gate : c.gates()) g.push_back(nand(val(gate.lhs), val(gate.rhs)));
  std::vector<Formula> out;
  for (const auto& r : c.outputs()) out.push_back(val(r));
  return out;
}

Ref NetlistBuilder::nand(Ref a, Ref b) {
  if (b < a) std::swap(a, b);
  auto negate = [&](Ref x) -> Ref {
    if (x.kind == Ref::Kind::Const0) return Ref::one();
    if (x.kind == Ref::Kind::Const1) return Ref::zero();
    if (x.kind == Ref::Kind::Gate) {
      const Gate& g = net_.gates()[x.index];
      if (g.lhs == g.rhs) return g.lhs;
    }
    auto [it, fresh] = memo_.try_emplace({x, x});
    if (fresh) it->second = net_.add_gate(x, x);
    return it->second;
  };
  auto is_not_of = [&](Ref x, Ref y) {
    if (x.kind != Ref::Kind::Gate) return false;
    const Gate& g = net_.gates()[x.index];
    return g.lhs == y && g.rhs == y;
  };
  if (a.kind == Ref::Kind::Const0 || b.kind == Ref::Kind::Const0) return Ref::one();
  if (a.kind == Ref::Kind::Const1 && b.kind == Ref::Kind::Const1) return Ref::zero();
  if (a.kind == Ref::Kind::Const1) return negate(b);
  if (a == b) return negate(a);
  if (is_not_of(a, b) || is_not_of(b, a)) return Ref::one();
  auto [it, fresh] = memo_.try_emplace({a, b});
  if (fresh) it->second = net_.add_gate(a, b);
  return it->second;
}

Ref NetlistBuilder::cond(Ref a, Ref b, Ref c) {
  if (a.kind == Ref::Kind::Const1 || b == c) return b;
  if (a.kind == Ref::Kind::Const0) return c;
  return nand(nand(a, b), nand(not_(a), c));
}

Netlist NetlistBuilder::finish(const std::vector<Ref>& outputs) const {
  const auto& gates = net_.gates();
  std::vector<bool> live(gates.size(), false);
  for (const auto& r : outputs)
    if (r.kind == Ref::Kind::Gate) live[r.index] = true;
  for (std::size_t i = gates.size(); i-- > 0;) {
    if (!live[i]) continue;
    if (gates[i].lhs.kind == Ref::Kind::Gate) live[gates[i].lhs.index] = true;
    if (gates[i].rhs.kind == Ref::Kind::Gate) live[gates[i].rhs.index] = true;
  }
  Netlist out(net_.input_count());
  std::vector<Ref> remap(gates.size());
  auto map = [&](Ref r) { return r.kind == Ref::Kind::Gate ? remap[r.index] : r; };
  for (std::size_t i = 0; i < gates.size(); ++i)
    if (live[i]) remap[i] = out.add_gate(map(gates[i].lhs), map(gates[i].rhs));
  std::vector<Ref> outs;
  for (const auto& r : outputs) outs.push_back(map(r));
  out.set_outputs(std::move(outs));
  return out;
}

std::uint64_t BlockFunction::apply(std::uint64_t pattern) const {
  std::vector<bool> in(static_cast<std::size_t>(4 * n));
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = (pattern >> i) & 1u;
  auto out = netlist.evaluate(in);
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i]) r |= 1ull << i;
  return r;
}

BlockFunction BlockFunction::from_netlist(int n, Netlist c, std::string name) {
  if (n < 1 || n > 8) throw std::invalid_argument("block size must be in 1..8");
  if (c.input_count() != static_cast<std::uint32_t>(4 * n) || c.outputs().size() != static_cast<std::size_t>(4 * n))
    throw std::invalid_argument("block function netlist must have 4n inputs and 4n outputs");
  BlockFunction h;
  h.n = n;
  h.name = std::move(name);
  h.netlist = std::move(c);
  return h;
}

BlockFunction BlockFunction::from_table(int n, const std::vector<std::uint64_t>& table, std::string name) {
  if (n < 1 || n > 4) throw std::invalid_argument("tables are supported for n <= 4");
  const unsigned bits = static_cast<unsigned>(4 * n);
  if (table.size() != (std::size_t{1} << bits)) throw std::invalid_argument("table must list every pattern");
  NetlistBuilder b(bits);
  std::vector<Ref> outs;
  for (unsigned o = 0; o < bits; ++o) {
    std::map<std::vector<bool>, Ref> memo;
    // Shannon expansion on the highest variable first.
    auto rec = [&](auto&& self, std::vector<bool> f, unsigned var) -> Ref {
      if (std::all_of(f.begin(), f.end(), [](bool x) { return !x; })) return Ref::zero();
      if (std::all_of(f.begin(), f.end(), [](bool x) { return x; })) return Ref::one();
      if (auto it = memo.find(f); it != memo.end()) return it->second;
      const std::size_t half = f.size() / 2;
      std::vector<bool> lo(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(half));
      std::vector<bool> hi(f.begin() + static_cast<std::ptrdiff_t>(half), f.end());
      const Ref r = b.cond(Ref::input(var - 1), self(self, hi, var - 1), self(self, lo, var - 1));
      memo[f] = r;
      return r;
    };
    std::vector<bool> f(table.size());
    for (std::size_t p = 0; p < table.size(); ++p) f[p] = (table[p] >> o) & 1u;
    outs.push_back(rec(rec, f, bits));
  }
  return from_netlist(n, b.finish(outs), std::move(name));
}

std::vector<std::string> BlockFunction::builtin_names() { return {"identity", "zero", "reverse", "mix", "swap", "not"}; }

BlockFunction BlockFunction::builtin(const std::string& name, int n) {
  const auto m = static_cast<std::uint32_t>(4 * n);
  Netlist c(m);
  std::vector<Ref> outs(m);
  if (name == "identity") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = Ref::input(i);
  } else if (name == "zero") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = Ref::zero();
  } else if (name == "reverse") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = Ref::input(4 * (i / 4) + (3 - i % 4));
  } else if (name == "swap") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = Ref::input(4 * (static_cast<std::uint32_t>(n) - 1 - i / 4) + i % 4);
  } else if (name == "mix") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = Ref::input(i);
    const Ref g0 = c.add_gate(Ref::input(0), Ref::input(1));
    const Ref g1 = c.add_gate(Ref::input(2), Ref::input(3));
    const Ref g2 = c.add_gate(g0, g1);
    const Ref g3 = c.add_gate(Ref::input(0), Ref::input(3));
    outs[0] = g2;
    outs[1] = g3;
    outs[2] = g0;
    outs[3] = g1;
  } else if (name == "not") {
    for (std::uint32_t i = 0; i < m; ++i) outs[i] = c.add_gate(Ref::input(i), Ref::input(i));
  } else {
    throw std::invalid_argument("unknown block function '" + name + "'");
  }
  c.set_outputs(outs);
  return from_netlist(n, std::move(c), name);
}

namespace {

using WireCell = std::array<Ref, 4>;
using WireConfig = std::map<Coord, WireCell>;

int live_wires(const WireCell& c) {
  int k = 0;
  for (const auto& r : c) k += r.kind == Ref::Kind::Const0 ? 0 : 1;
  return k;
}

WireConfig wire_step_inverse(const WireConfig& x, NetlistBuilder& b) {
  WireConfig out;
  for (const auto& [pos, c] : x) {
    WireCell m = c;
    if (live_wires(c) >= 3) {
      const Ref bc = b.and_(c[1], c[2]);
      const Ref ad = b.and_(c[0], c[3]);
      m = {b.cond(bc, c[3], c[0]), b.cond(ad, c[2], c[1]), b.cond(ad, c[1], c[2]), b.cond(bc, c[0], c[3])};
    }
    for (int k = 0; k < 4; ++k)
      if (m[static_cast<std::size_t>(k)].kind != Ref::Kind::Const0)
        out[pos - speed_of_track(k)][static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k)];
  }
  return out;
}

Ref wire_at(const WireConfig& x, Coord pos, int speed) {
  auto it = x.find(pos);
  if (it == x.end()) return Ref::zero();
  return it->second[static_cast<std::size_t>(track_of_speed(speed))];
}

}  // namespace

EffectiveCircuit build_effective_circuit(const BlockFunction& h, const DiffusionResult& diffusion,
                                         const ReverseDiffusionResult& reverse) {
  if (diffusion.n != h.n || reverse.n != h.n) throw std::invalid_argument("block sizes disagree");
  const auto m = static_cast<std::uint32_t>(diffusion.particles.size());
  NetlistBuilder b(m);

  WireConfig cur;
  for (std::uint32_t i = 0; i < m; ++i) {
    const auto& p = diffusion.particles[i].pos;
    cur[p.x][static_cast<std::size_t>(track_of_speed(p.speed))] = Ref::input(i);
  }
  for (Time t = 0; t < diffusion.t_dis; ++t) cur = wire_step_inverse(cur, b);

  std::vector<Ref> alpha(static_cast<std::size_t>(4 * h.n));
  for (int i = 0; i < h.n; ++i)
    for (int k = 0; k < 4; ++k) alpha[static_cast<std::size_t>(4 * i + k)] = wire_at(cur, i, speed_of_track(k));

  const Netlist& H = h.netlist;
  std::vector<Ref> g(H.gate_count());
  auto val = [&](Ref r) -> Ref {
    switch (r.kind) {
      case Ref::Kind::Input: return alpha[r.index];
      case Ref::Kind::Gate: return g[r.index];
      default: return r;
    }
  };
  for (std::size_t i = 0; i < H.gate_count(); ++i) g[i] = b.nand(val(H.gates()[i].lhs), val(H.gates()[i].rhs));

  WireConfig fin;
  for (int i = 0; i < h.n; ++i)
    for (int k = 0; k < 4; ++k) {
      const Ref r = val(H.outputs()[static_cast<std::size_t>(4 * i + k)]);
      if (r.kind != Ref::Kind::Const0) fin[i][static_cast<std::size_t>(k)] = r;
    }
  for (Time t = 0; t < reverse.t_back; ++t) fin = wire_step_inverse(fin, b);

  EffectiveCircuit ec;
  std::vector<Ref> outs;
  for (std::size_t j = 0; j < reverse.particles.size(); ++j) {
    const auto& p = reverse.particles[j];
    if (is_semantically_zero(p.label)) continue;
    const Ref r = wire_at(fin, p.pos.x, p.pos.speed);
    if (r.kind == Ref::Kind::Const0) throw std::logic_error("effective circuit lost a nonzero target");
    ec.kept.push_back(j);
    outs.push_back(r);
  }
  ec.netlist = b.finish(outs);
  return ec;
}

}  // namespace puca
