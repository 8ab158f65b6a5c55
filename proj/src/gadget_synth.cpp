#include "puca/gadget_synth.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace puca {

namespace {

std::vector<Primitive> derive_primitives() {
  const Formula beta = Formula::var(VarId{0});
  std::vector<Primitive> out;
  for (int from : kSpeeds)
    for (int to : kSpeeds) {
      if (to == from) continue;
      std::vector<int> aux;
      for (int s : kSpeeds)
        if (s != from && s != to) aux.push_back(s);
      LogicalCell c;
      c[static_cast<std::size_t>(track_of_speed(from))] = beta;
      for (int s : aux) c[static_cast<std::size_t>(track_of_speed(s))] = Formula::one();
      const LogicalCell r = logical_gamma(c);
      if (r[static_cast<std::size_t>(track_of_speed(to))] != beta) continue;
      Primitive p;
      p.from = from;
      p.to = to;
      p.aux = {aux[0], aux[1]};
      p.copy = r[static_cast<std::size_t>(track_of_speed(from))] == beta;
      out.push_back(p);
    }
  return out;
}

std::string fmt_pos(Coord x, Time t) {
  std::ostringstream os;
  os << '(' << x << ", " << t << ')';
  return os.str();
}

bool has_duplicates(std::vector<Placement> ps) {
  std::sort(ps.begin(), ps.end());
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (ps[i].x == ps[i - 1].x && ps[i].speed == ps[i - 1].speed) return true;
  return false;
}

void aux_at(std::vector<Placement>& ps, Coord x, Time t, std::initializer_list<int> speeds) {
  for (int u : speeds) ps.push_back({x - u * t, u, Formula::one()});
}

void say(const SynthesisOptions& opt, const std::string& s) {
  if (opt.log) opt.log(s);
}

}  // namespace

const std::vector<Primitive>& primitive_table() {
  static const std::vector<Primitive> table = derive_primitives();
  return table;
}

std::optional<Primitive> primitive(int from, int to) {
  for (const auto& p : primitive_table())
    if (p.from == from && p.to == to) return p;
  return std::nullopt;
}

namespace {

// Intermediate speeds for one elementary move from `a` to `b`.
std::vector<int> vias(int a, int b) {
  std::vector<int> out;
  if (is_fast(a) == is_fast(b)) {
    for (int s : kSpeeds)
      if (is_fast(s) != is_fast(a) && (s > 0) == (a > 0)) out.push_back(s);
    for (int s : kSpeeds)
      if (is_fast(s) != is_fast(a) && (s > 0) != (a > 0)) out.push_back(s);
  } else {
    out.push_back(-b);
  }
  return out;
}

constexpr Time kMaxDelay = 1024;
constexpr int kOuterTries = 4;

struct Tally {
  std::map<int, std::size_t> by_condition;
  ValidationReport last = ValidationReport::fail(0, "no candidate in range");
  std::size_t candidates = 0;
  void add(const ValidationReport& r) {
    ++by_condition[r.condition];
    last = r;
  }
  std::string str() const {
    std::string s = std::to_string(candidates) + " candidates";
    for (const auto& [c, k] : by_condition) s += ", cond " + std::to_string(c) + " x" + std::to_string(k);
    return s + "; last: " + last.summary();
  }
};

// An auxiliary particle running through an existing crossing before its own
// collision would turn that crossing into a collision.  Checked before the
// full trial because it rejects most candidates in a crowded diagram.
bool meets_crossing(const SpacetimeStore& st, const Placement& p, Time until, const ControlBudget& b) {
  const Time hi = b.weak ? std::min(until, b.t + 1) : until;
  const auto& cross = st.crossing_points();
  for (int s : kSpeeds) {
    if (s == p.speed) continue;
    const int den = p.speed - s;
    for (const auto& entry : st.lines(s)) {
      const Coord num = entry.first - p.x;
      if (num % den != 0) continue;
      const Time t = num / den;
      if (t < 1 || t >= hi) continue;
      auto it = cross.find({p.x + p.speed * t, t});
      if (it != cross.end() && it->second == 2) return true;
    }
  }
  return false;
}

struct RouteGeometry {
  std::vector<Coord> xs;
  std::vector<Time> taus;
  std::vector<Placement> aux;
  std::vector<Time> aux_until;
};

// Collision points of a route whose free collision times are `free`; the last
// collision is where the route meets the target.
std::optional<RouteGeometry> route_geometry(const Line& source, const std::vector<int>& speeds, const Line& target,
                                            const std::vector<Time>& free, Time deadline) {
  RouteGeometry g;
  Line line = source;
  for (std::size_t i = 0; i < free.size(); ++i) {
    const Time tau = free[i];
    if (!g.taus.empty() && tau <= g.taus.back()) return std::nullopt;
    g.xs.push_back(line.at(tau));
    g.taus.push_back(tau);
    line = Line::through(g.xs.back(), tau, speeds[i + 1]);
  }
  const Coord num = target.base - line.base;
  const int den = line.speed - target.speed;
  if (den == 0 || num % den != 0) return std::nullopt;
  const Time tau = num / den;
  if (tau <= g.taus.back() || tau > deadline) return std::nullopt;
  g.xs.push_back(target.at(tau));
  g.taus.push_back(tau);
  for (std::size_t i = 0; i + 1 < speeds.size(); ++i) {
    const auto prim = primitive(speeds[i], speeds[i + 1]);
    aux_at(g.aux, g.xs[i], g.taus[i], {prim->aux[0], prim->aux[1]});
    g.aux_until.insert(g.aux_until.end(), 2, g.taus[i]);
  }
  if (has_duplicates(g.aux)) return std::nullopt;
  return g;
}

}  // namespace

MovementSolution move_particle(SpacetimeStore& st, const SourceParticle& p, const Line& target, Time deadline,
                               ControlBudget budget) {
  const int s0 = p.line.speed, sT = target.speed;
  if (!is_speed(s0) || !is_speed(sT)) throw std::invalid_argument("bad speed");
  if (p.line == target) throw std::invalid_argument("source and target are the same line");
  budget.t = deadline;
  budget.target_lines.insert(target);
  const Formula want = canonical(p.label, st.cap());
  if (want.is_zero()) throw std::invalid_argument("cannot move a zero label");

  Tally tally;
  auto attempt = [&](const std::vector<int>& speeds, const RouteGeometry& g) -> std::optional<MovementSolution> {
    if (st.value(p.line, g.taus.front() - 1) != want) return std::nullopt;
    ++tally.candidates;
    for (std::size_t i = 0; i < g.aux.size(); ++i)
      if (meets_crossing(st, g.aux[i], g.aux_until[i], budget)) {
        tally.add(ValidationReport::fail(3, "auxiliary " + std::to_string(i) + " runs into a crossing"));
        return std::nullopt;
      }
    const Trial tr = st.trial(g.aux, budget);
    if (!tr.valid()) {
      tally.add(tr.report());
      return std::nullopt;
    }
    if (tr.value(target, g.taus.back()) != want || tr.value(target, deadline) != want) {
      tally.add(ValidationReport::fail(0, "label did not arrive on " + to_string(target)));
      return std::nullopt;
    }
    MovementSolution sol;
    sol.source = p.line;
    sol.target = target;
    sol.via = speeds[1];
    sol.t = p.t;
    sol.k = g.taus[0] - p.t;
    sol.k_prime = g.taus[1] - g.taus[0];
    sol.tau1 = g.taus[0];
    sol.tau2 = g.taus[1];
    sol.x1 = g.xs[0];
    sol.x2 = g.xs[1];
    sol.destructive = !primitive(speeds[speeds.size() - 2], speeds.back())->copy;
    sol.elementary = static_cast<int>(speeds.size() - 1) / 2;
    sol.speeds = speeds;
    sol.xs = g.xs;
    sol.taus = g.taus;
    sol.added = tr.placements();
    for (std::size_t i = 0; i < g.xs.size(); ++i)
      sol.new_lines.push_back(Line::through(g.xs[i], g.taus[i], speeds[i + 1]));
    for (const auto& q : g.aux) sol.new_lines.push_back(Line::through(q.x, 0, q.speed));
    sol.report = tr.report();
    sol.candidates = tally.candidates;
    st.commit(tr);
    return sol;
  };

  // One elementary move, ascending k.
  const std::vector<int> single = vias(s0, sT);
  for (Time tau1 = p.t + 1; tau1 < deadline; ++tau1)
    for (int via : single) {
      const std::vector<int> speeds{s0, via, sT};
      if (auto g = route_geometry(p.line, speeds, target, {tau1}, deadline))
        if (auto sol = attempt(speeds, *g)) return *sol;
    }

  // Two elementary moves through an intermediate speed.
  std::vector<std::vector<int>> routes;
  for (int m : kSpeeds) {
    if (m == s0 || m == sT) continue;
    for (int v1 : vias(s0, m))
      for (int v2 : vias(m, sT)) routes.push_back({s0, v1, m, v2, sT});
  }
  // Two elementary moves: the first one picks the intermediate line, the
  // second is then a scan over its first collision.  Each existing crossing
  // blocks only a bounded number of values of either scan.
  int outer = 0;
  for (Time d = 2; p.t + d < deadline && outer < kOuterTries; ++d)
    for (Time k2 = 1; k2 < d && outer < kOuterTries; ++k2) {
      const Time t1 = p.t + d - k2, t2 = t1 + k2;
      if (st.value(p.line, t1 - 1) != want) continue;
      for (const auto& route : routes) {
        const Coord x1 = p.line.at(t1);
        const Coord x2 = Line::through(x1, t1, route[1]).at(t2);
        std::vector<Placement> first;
        const auto p1 = primitive(route[0], route[1]), p2 = primitive(route[1], route[2]);
        aux_at(first, x1, t1, {p1->aux[0], p1->aux[1]});
        aux_at(first, x2, t2, {p2->aux[0], p2->aux[1]});
        const std::array<Time, 4> until{t1, t1, t2, t2};
        bool blocked = has_duplicates(first);
        for (std::size_t i = 0; i < first.size() && !blocked; ++i)
          blocked = meets_crossing(st, first[i], until[i], budget);
        if (blocked) continue;
        ++outer;
        for (Time t3 = t2 + 1; t3 < deadline; ++t3)
          if (auto g = route_geometry(p.line, route, target, {t1, t2, t3}, deadline))
            if (auto sol = attempt(route, *g)) return *sol;
      }
    }
  throw NoFeasibleParameters("no feasible move from " + to_string(p.line) + " at t=" + std::to_string(p.t) + " to " +
                                 to_string(target) + " by t=" + std::to_string(deadline) + " (" + tally.str() + ")",
                             1, deadline - p.t - 1, tally.last);
}

std::vector<MovementSolution> move_many(SpacetimeStore& st, const std::vector<SourceParticle>& ps,
                                        const std::vector<Line>& targets, Time deadline, ControlBudget budget) {
  if (ps.size() != targets.size()) throw std::invalid_argument("one target per particle");
  for (const auto& l : targets) budget.target_lines.insert(l);
  std::vector<MovementSolution> out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ControlBudget b = budget;
    for (std::size_t j = i + 1; j < targets.size(); ++j) b.protected_lines.insert(targets[j]);
    try {
      out.push_back(move_particle(st, ps[i], targets[i], deadline, b));
    } catch (const NoFeasibleParameters& e) {
      throw NoFeasibleParameters("particle " + std::to_string(i) + ": " + e.what(), e.lo(), e.hi(), e.last());
    }
  }
  return out;
}

namespace {


struct NandGeometry {
  Time tau5, k1, k2, k;
  int order;
  std::array<Time, 5> tau;
  std::array<Coord, 5> x;
};

std::optional<NandGeometry> nand_geometry(const Line& a, const Line& b, const Line& target, Time start, Time k1,
                                          Time k2, Time k, int order) {
  NandGeometry g{};
  g.k1 = k1;
  g.k2 = k2;
  g.k = k;
  g.order = order;
  // copy of a onto -2, then onto -1
  g.tau[0] = start + k1;
  g.x[0] = a.at(g.tau[0]);
  g.tau[1] = g.tau[0] + k;
  g.x[1] = g.x[0] - 2 * k;
  // copy of b onto -2
  g.tau[2] = start + k2;
  g.x[2] = b.at(g.tau[2]);
  // the -2 copy of b catches the -1 copy of a
  const Coord c = g.x[1] + g.tau[1];
  const Coord d = g.x[2] + 2 * g.tau[2];
  g.tau[3] = d - c;
  if (g.tau[3] <= g.tau[1] || g.tau[3] <= g.tau[2]) return std::nullopt;
  g.x[3] = c - g.tau[3];
  // the +2 conjunction catches the target
  g.tau[4] = target.base - (g.x[3] - 2 * g.tau[3]);
  if (g.tau[4] <= g.tau[3]) return std::nullopt;
  g.x[4] = target.at(g.tau[4]);
  g.tau5 = g.tau[4];
  return g;
}

std::vector<Placement> nand_aux(const NandGeometry& g, const Line& target) {
  std::vector<Placement> ps;
  aux_at(ps, g.x[0], g.tau[0], {2, -1});
  aux_at(ps, g.x[1], g.tau[1], {2, 1});
  aux_at(ps, g.x[2], g.tau[2], {2, -1});
  aux_at(ps, g.x[3], g.tau[3], {1});
  aux_at(ps, g.x[4], g.tau[4], {-2});
  ps.push_back({target.base, 1, Formula::one()});
  return ps;
}

}  // namespace

NandSolution nand_gadget(SpacetimeStore& st, const SourceParticle& p1, const SourceParticle& p2, const Line& target,
                         Time start, ControlBudget budget) {
  if (p1.line.speed != 1 || p2.line.speed != 1 || target.speed != 1)
    throw std::invalid_argument("NAND gadget works on +1 lines");
  const unsigned cap = st.cap();
  const Formula b1 = canonical(p1.label, cap), b2 = canonical(p2.label, cap);
  NandSolution sol;
  sol.target = target;
  sol.label = canonical(nand(b1, b2), cap);
  budget.target_lines.insert(target);

  if (sol.label.is_zero()) {
    sol.empty = true;
    return sol;
  }
  if (sol.label.is_one()) {
    budget.t = start;
    const Trial tr = st.trial({{target.base, 1, Formula::one()}}, budget);
    if (!tr.valid() || tr.value(target, start) != sol.label)
      throw NoFeasibleParameters("constant output on " + to_string(target) + " rejected: " + tr.report().summary(), 0, 0,
                                 tr.report());
    sol.constant = true;
    sol.added = tr.placements();
    sol.report = tr.report();
    st.commit(tr);
    return sol;
  }

  // A constant-one input turns the gate into a negation of the other.
  std::array<SourceParticle, 2> in{p1, p2};
  if (b1.is_one()) in = {p2, p2};
  if (b2.is_one()) in = {p1, p1};
  const bool same = in[0].line == in[1].line;
  for (const auto& q : in)
    if (q.t > start) start = q.t;

  Tally tally;
  // Whether the gadget works on its own depends only on its shape, which is
  // invariant under the common shift; checked once per shape without the
  // rest of the diagram.
  std::map<std::tuple<int, Time, Time>, bool> shape_ok;
  auto isolated_ok = [&](const NandGeometry& g, const std::vector<Placement>& ps) {
    const auto key = std::tuple(g.order, g.k2 - g.k1, g.k);
    if (auto it = shape_ok.find(key); it != shape_ok.end()) return it->second;
    const SourceParticle& A = in[static_cast<std::size_t>(g.order)];
    const SourceParticle& B = in[static_cast<std::size_t>(1 - g.order)];
    LogicalConfiguration x0;
    x0.set_track(A.line.base, 1, A.label);
    x0.set_track(B.line.base, 1, B.label);
    const SpacetimeStore alone = SpacetimeStore::from_initial(x0, Interval{}, cap);
    ControlBudget loose;
    loose.a = ps.size() + 64;
    loose.b = std::size_t{1} << 20;
    loose.t = g.tau5;
    const Trial tr = alone.trial(ps, loose);
    const bool ok = tr.valid() && tr.value(target, g.tau5) == sol.label &&
                    tr.value(A.line, g.tau5) == canonical(A.label, cap) && tr.value(B.line, g.tau5) == canonical(B.label, cap);
    shape_ok.emplace(key, ok);
    return ok;
  };
  auto attempt = [&](const NandGeometry& g) -> bool {
    const SourceParticle& A = in[static_cast<std::size_t>(g.order)];
    const SourceParticle& B = in[static_cast<std::size_t>(1 - g.order)];
    const Formula la = canonical(A.label, cap), lb = canonical(B.label, cap);
    const std::vector<Placement> ps = nand_aux(g, target);
    if (has_duplicates(ps) || !isolated_ok(g, ps)) return false;
    ++tally.candidates;
    budget.t = g.tau5;
    const std::array<Time, 9> until{g.tau[0], g.tau[0], g.tau[1], g.tau[1], g.tau[2], g.tau[2], g.tau[3], g.tau[4], g.tau[4]};
    for (std::size_t i = 0; i < until.size(); ++i)
      if (meets_crossing(st, ps[i], until[i], budget)) {
        tally.add(ValidationReport::fail(3, "auxiliary " + std::to_string(i) + " runs into a crossing"));
        return false;
      }
    const Trial tr = st.trial(ps, budget);
    if (!tr.valid()) {
      tally.add(tr.report());
      return false;
    }
    if (tr.value(target, g.tau5) != sol.label) {
      tally.add(ValidationReport::fail(0, "gadget output wrong at " + fmt_pos(g.x[4], g.tau5) + ": " +
                                              to_infix(tr.value(target, g.tau5))));
      return false;
    }
    if (tr.value(A.line, g.tau5) != la || tr.value(B.line, g.tau5) != lb) {
      tally.add(ValidationReport::fail(0, "gadget input disturbed by " + fmt_pos(g.x[4], g.tau5)));
      return false;
    }
    sol.a = A.line;
    sol.b = B.line;
    sol.k1 = g.k1;
    sol.k2 = g.k2;
    sol.k = g.k;
    sol.tau = g.tau;
    sol.added = tr.placements();
    sol.report = tr.report();
    sol.candidates = tally.candidates;
    st.commit(tr);
    return true;
  };
  // A common shift of both copies moves every auxiliary line except the +1
  // ones, which move with the slow-down length k instead; the spacing delta
  // between the copies changes the shape.  Triples are scanned by their sum.
  for (Time d = 1; d <= kMaxDelay; ++d) {
    std::vector<NandGeometry> cands;
    for (Time k = 1; k <= d; ++k)
      for (Time delta = 0; k + delta <= d; ++delta) {
        const Time shift = d - k - delta;
        for (int order = 0; order < (same ? 1 : 2); ++order) {
          const Line& a = in[static_cast<std::size_t>(order)].line;
          const Line& b = in[static_cast<std::size_t>(1 - order)].line;
          for (int side = 0; side < (delta == 0 ? 1 : 2); ++side) {
            if (same && delta == 0) continue;
            const Time k1 = side == 0 ? 1 : 1 + delta, k2 = side == 0 ? 1 + delta : 1;
            if (auto g = nand_geometry(a, b, target, start, shift + k1, shift + k2, k, order)) cands.push_back(*g);
          }
        }
      }
    std::sort(cands.begin(), cands.end(), [](const NandGeometry& u, const NandGeometry& v) {
      return std::tie(u.tau5, u.k1, u.k2, u.k, u.order) < std::tie(v.tau5, v.k1, v.k2, v.k, v.order);
    });
    for (const auto& g : cands)
      if (attempt(g)) return sol;
  }
  throw NoFeasibleParameters("no feasible NAND gadget onto " + to_string(target) + " from t=" + std::to_string(start) +
                                 " (" + tally.str() + ")",
                             1, kMaxDelay, tally.last);
}

Line fresh_work_line(const SpacetimeStore& st, const ControlBudget& budget) {
  Coord b = 0;
  for (const auto& entry : st.lines(1)) b = std::min(b, entry.first);
  std::set<Coord> crossed;
  for (const auto& entry : st.crossing_points()) crossed.insert(entry.first.first - entry.first.second);
  for (--b;; --b) {
    const Line l{b, 1};
    if (!crossed.count(b) && !st.occupied(l) && !budget.protected_lines.count(l) && !budget.target_lines.count(l))
      return l;
  }
}

CircuitEvaluation evaluate_circuit(SpacetimeStore& st, const std::vector<SourceParticle>& inputs, const Netlist& c,
                                   Time start, ControlBudget budget) {
  if (inputs.size() != c.input_count()) throw std::invalid_argument("one source per circuit input");
  {
    std::vector<Formula> in;
    for (const auto& s : inputs) in.push_back(s.label);
    for (const auto& f : netlist_to_formulas(c, in))
      if (is_semantically_zero(f)) throw std::invalid_argument("circuit output is identically zero");
  }
  CircuitEvaluation ev;
  ev.end = start;
  auto resolve = [&](Ref r) -> SourceParticle {
    switch (r.kind) {
      case Ref::Kind::Const0: return {Line{}, Formula::zero(), 0};
      case Ref::Kind::Const1: return {Line{}, Formula::one(), 0};
      case Ref::Kind::Input: return inputs[r.index];
      case Ref::Kind::Gate: return ev.gate_outputs[r.index];
    }
    return {};
  };
  for (std::size_t i = 0; i < c.gate_count(); ++i) {
    const Gate& g = c.gates()[i];
    const SourceParticle a = resolve(g.lhs), b = resolve(g.rhs);
    const Line work = fresh_work_line(st, budget);
    Time s = ev.end;
    for (const auto& q : {a, b})
      if (!is_constant(q.label)) s = std::max(s, q.t);
    try {
      NandSolution sol;
      const Formula fa = canonical(a.label, st.cap()), fb = canonical(b.label, st.cap());
      if (fa.is_zero() || fb.is_zero() || (fa.is_one() && fb.is_one())) {
        // no gadget inputs needed; route through the gadget for the constant case
        SourceParticle dummy{work, fa.is_zero() || fb.is_zero() ? Formula::zero() : Formula::one(), 0};
        sol = nand_gadget(st, dummy, dummy, work, s, budget);
      } else {
        sol = nand_gadget(st, a, b, work, s, budget);
      }
      ev.gate_outputs.push_back({work, sol.label, sol.ready()});
      if (!sol.constant && !sol.empty) ev.end = std::max(ev.end, sol.tau[4]);
      ev.gadgets.push_back(std::move(sol));
    } catch (const NoFeasibleParameters& e) {
      throw NoFeasibleParameters("gate " + std::to_string(i) + " (" + g.name + "): " + e.what(), e.lo(), e.hi(), e.last());
    }
  }
  return ev;
}

Configuration GadgetPlan::gadget() const {
  Configuration c;
  for (const auto& p : particles) c.add_particle(p.x, p.speed);
  return c;
}

namespace {

Formula value_at(const SpacetimeStore& st, Coord x, Time t, int s) { return st.value(Line::through(x, t, s), t); }

void finish_stage(StageReport& r, const SpacetimeStore& st, std::size_t before, Time start, Time end) {
  r.start = start;
  r.end = end;
  r.particles = st.placements().size() - before;
  r.counts = st.counts(0);
}

}  // namespace

GadgetPlan synthesize(const BlockFunction& h, const SynthesisOptions& opt) {
  const int n = h.n;
  if (n < 1) throw std::invalid_argument("block size must be positive");
  GadgetPlan plan;
  plan.n = n;
  plan.function = h.name;
  plan.function_gates = h.netlist.gate_count();

  const DiffusionResult diff = diffuse(n);
  std::vector<Formula> alpha;
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(4 * n); ++i) alpha.push_back(Formula::var(VarId{i}));
  const std::vector<Formula> outputs = netlist_to_formulas(h.netlist, alpha);
  const ReverseDiffusionResult rev = reverse_diffuse(n, outputs);
  const EffectiveCircuit ec = build_effective_circuit(h, diff, rev);
  const Netlist& H = ec.netlist;
  plan.t_dis = diff.t_dis;
  plan.t_back = rev.t_back;
  plan.gates = H.gate_count();
  plan.assembled = ec.kept.size();
  say(opt, "diffusion: t_dis=" + std::to_string(diff.t_dis) + " particles=" + std::to_string(diff.particles.size()) +
               " effective gates=" + std::to_string(H.gate_count()) + " outputs=" + std::to_string(ec.kept.size()) +
               " t_back=" + std::to_string(rev.t_back));

  // Inputs of the effective circuit that are actually read.
  std::vector<bool> used(H.input_count(), false);
  for (const auto& g : H.gates())
    for (Ref r : {g.lhs, g.rhs})
      if (r.kind == Ref::Kind::Input) used[r.index] = true;
  for (Ref r : H.outputs())
    if (r.kind == Ref::Kind::Input) used[r.index] = true;
  std::vector<std::size_t> collect;
  for (std::size_t i = 0; i < used.size(); ++i)
    if (used[i]) collect.push_back(i);
  plan.collected = collect.size();

  const Interval block{0, n - 1};
  const SpacetimeStore base = SpacetimeStore::from_initial(fully_general(n), block);
  const Interval I{-2 * rev.t_back, n - 1 + 2 * rev.t_back};

  const auto C = static_cast<Time>(H.gate_count());
  Time g_coll = 4 * (static_cast<Time>(collect.size()) + n) + 8;
  Time g_comp = 160 * (C + 1);
  Time g_ass = 16 * (static_cast<Time>(ec.kept.size()) + n) + 32;
  ValidationReport last;
  std::string failed_stage = "collection";
  const auto clock0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
    std::ostringstream os;
    os.precision(3);
    os << " [" << s << "s]";
    return os.str();
  };
  std::map<std::string, int> failures;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0 && ++failures[failed_stage] > opt.max_retries)
      throw StageFailure(failed_stage, failures[failed_stage] - 1, last, "retries exhausted");
    SpacetimeStore st = base;
    const Time t_coll = diff.t_dis + g_coll;
    // Lines reserved for assembly must not pass through the computation's
    // crossings; they only reach that part of the diagram after about 9 t_comp.
    const Time t_ass = 10 * (t_coll + g_comp) + g_ass;
    // Every line through the assembly region stays clear until assembly.
    std::set<Line> reserved;
    for (Coord x = I.lo; x <= I.hi; ++x)
      for (int s : kSpeeds) reserved.insert(Line::through(x, t_ass, s));

    StageReport coll;
    coll.name = "collection";
    coll.retries = static_cast<std::size_t>(failures["collection"]);
    std::vector<SourceParticle> circuit_in(H.input_count(), SourceParticle{Line{}, Formula::zero(), 0});
    try {
      std::vector<SourceParticle> src;
      std::vector<Line> dst;
      for (std::size_t r = 0; r < collect.size(); ++r) {
        const auto& p = diff.particles[collect[r]];
        src.push_back({Line::through(p.pos.x, diff.t_dis, p.pos.speed), p.label, diff.t_dis});
        dst.push_back(Line::through(static_cast<Coord>(r), t_coll, 1));
        circuit_in[collect[r]] = {dst.back(), canonical(p.label), t_coll};
      }
      ControlBudget b;
      b.a = opt.move_budget;
      b.b = b.a * (st.occupied_line_count() + b.a * (src.size() + 1));
      b.protected_lines.insert(reserved.begin(), reserved.end());
      const std::size_t before = st.placements().size();
      const auto moves = move_many(st, src, dst, t_coll, b);
      coll.modifications = moves.size();
      finish_stage(coll, st, before, diff.t_dis, t_coll);
    } catch (const NoFeasibleParameters& e) {
      last = e.last();
      failed_stage = "collection";
      say(opt, std::string("collection retry: ") + e.what() + elapsed());
      g_coll *= 2;
      continue;
    }
    say(opt, "collection: t_coll=" + std::to_string(t_coll) + " particles=" + std::to_string(st.placements().size()) +
                 elapsed());

    StageReport comp;
    comp.name = "computation";
    comp.retries = static_cast<std::size_t>(failures["computation"]);
    Time t_comp = t_coll + 1;
    CircuitEvaluation ev;
    try {
      ControlBudget b;
      b.a = opt.nand_budget;
      b.b = b.a * (st.occupied_line_count() + b.a * (H.gate_count() + 1));
      b.protected_lines.insert(reserved.begin(), reserved.end());
      const std::size_t before = st.placements().size();
      ev = evaluate_circuit(st, circuit_in, H, t_coll, b);
      t_comp = std::max(t_comp, ev.end);
      comp.modifications = ev.gadgets.size();
      finish_stage(comp, st, before, t_coll, t_comp);
    } catch (const NoFeasibleParameters& e) {
      last = e.last();
      failed_stage = "computation";
      say(opt, std::string("computation retry: ") + e.what() + elapsed());
      g_coll *= 2;
      continue;
    }
    say(opt, "computation: t_comp=" + std::to_string(t_comp) + " particles=" + std::to_string(st.placements().size()) +
                 elapsed());
    if (t_comp > t_coll + g_comp) {
      failed_stage = "computation";
      last = ValidationReport::fail(0, "computation ended at " + std::to_string(t_comp));
      g_comp = std::max(2 * g_comp, 2 * (t_comp - t_coll));
      say(opt, "computation overran the reserved assembly time, retrying");
      continue;
    }

    auto source_of = [&](Ref r) -> SourceParticle {
      switch (r.kind) {
        case Ref::Kind::Input: return circuit_in[r.index];
        case Ref::Kind::Gate: return ev.gate_outputs[r.index];
        case Ref::Kind::Const1: return {Line{}, Formula::one(), 0};
        default: return {Line{}, Formula::zero(), 0};
      }
    };

    StageReport ass;
    ass.name = "assembly";
    ass.retries = static_cast<std::size_t>(failures["assembly"]);
    try {
      std::vector<Line> targets;
      for (std::size_t j : ec.kept) {
        const auto& q = rev.particles[j].pos;
        targets.push_back(Line::through(q.x, t_ass, q.speed));
      }
      ControlBudget b;
      b.a = opt.move_budget;
      b.b = b.a * (st.occupied_line_count() + b.a * (targets.size() + 1));
      b.weak = true;
      b.t = t_ass;
      b.region = I;
      b.target_lines.insert(targets.begin(), targets.end());
      const std::size_t before = st.placements().size();
      for (std::size_t j = 0; j < targets.size(); ++j) {
        ControlBudget bj = b;
        for (const auto& l : reserved)
          if (!st.occupied(l) && l != targets[j]) bj.protected_lines.insert(l);
        SourceParticle s = source_of(H.outputs()[j]);
        const Formula want = canonical(rev.particles[ec.kept[j]].label);
        if (canonical(s.label) != want) throw std::logic_error("effective circuit output disagrees with its target");
        if (want.is_one()) {
          const Trial tr = st.trial({{targets[j].base, targets[j].speed, Formula::one()}}, bj);
          if (!tr.valid() || tr.value(targets[j], t_ass) != want)
            throw NoFeasibleParameters("constant output particle rejected: " + tr.report().summary(), 0, 0, tr.report());
          st.commit(tr);
        } else {
          s.t = std::max(s.t, t_comp);
          move_particle(st, s, targets[j], t_ass, bj);
        }
        ++ass.modifications;
      }
      finish_stage(ass, st, before, t_comp, t_ass);
    } catch (const NoFeasibleParameters& e) {
      last = e.last();
      failed_stage = "assembly";
      say(opt, std::string("assembly retry: ") + e.what() + elapsed());
      g_ass *= 2;
      continue;
    }

    // The region must now hold exactly the reverse-diffused configuration.
    for (Coord x = I.lo; x <= I.hi; ++x)
      for (int s : kSpeeds) {
        const Formula got = value_at(st, x, t_ass, s);
        const Formula exp = canonical(rev.state.track(x, s));
        if (got != exp)
          throw std::logic_error("assembly left " + to_infix(got) + " at " + fmt_pos(x, t_ass) + " speed " +
                                 std::to_string(s) + ", expected " + to_infix(exp));
      }

    plan.t_coll = t_coll;
    plan.t_comp = t_comp;
    plan.t_ass = t_ass;
    plan.t_final = t_ass + rev.t_back;
    plan.particles = st.placements();
    std::sort(plan.particles.begin(), plan.particles.end());
    plan.crossings = st.crossing_count();
    plan.collisions = st.collision_count();
    plan.occupied_lines = st.occupied_line_count();
    plan.stages = {coll, comp, ass};
    say(opt, "assembly: t_ass=" + std::to_string(t_ass) + " t_final=" + std::to_string(plan.t_final) +
                 " particles=" + std::to_string(plan.particles.size()) + elapsed());
    return plan;
  }
}

}  // namespace puca
