#include "puca/verify.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace puca {

namespace {

// One word per occupied track position; bit j is pattern j.  Positions are
// kept relative to the track's motion so that shifting is free.
class SlicedRun {
 public:
  SlicedRun(int n, Time horizon) : n_(n), horizon_(horizon) {}

  void add(Coord x, int track, std::uint64_t lanes) {
    if (lanes) tracks_[static_cast<std::size_t>(track)][x] |= lanes;
  }

  void step() {
    ++t_;
    exchange(0, 3, 1, 2);
    exchange(1, 2, 0, 3);
    prune();
  }

  Time time() const { return t_; }

  std::uint64_t word(Coord x, int track) const {
    const auto& m = tracks_[static_cast<std::size_t>(track)];
    auto it = m.find(x - speed_of_track(track) * t_);
    return it == m.end() ? 0 : it->second;
  }

 private:
  Coord pos(int track, Coord base) const { return base + speed_of_track(track) * t_; }

  std::uint64_t take(int track, Coord x) const { return word(x, track); }

  void put(int track, Coord x, std::uint64_t w) {
    auto& m = tracks_[static_cast<std::size_t>(track)];
    const Coord base = x - speed_of_track(track) * t_;
    if (w)
      m[base] = w;
    else
      m.erase(base);
  }

  // Where tracks p and q (a pair of opposite speeds) meet, the other pair r,s
  // is exchanged on the lanes holding both p and q.  For the slow pair the
  // lanes that also hold both fast particles were handled already.
  void exchange(int p, int q, int r, int s) {
    auto& mp = tracks_[static_cast<std::size_t>(p)];
    auto& mq = tracks_[static_cast<std::size_t>(q)];
    auto a = mp.begin();
    auto b = mq.begin();
    std::vector<std::pair<Coord, std::uint64_t>> hits;
    while (a != mp.end() && b != mq.end()) {
      const Coord xa = pos(p, a->first), xb = pos(q, b->first);
      if (xa < xb) {
        ++a;
      } else if (xb < xa) {
        ++b;
      } else {
        hits.emplace_back(xa, a->second & b->second);
        ++a;
        ++b;
      }
    }
    for (auto [x, both] : hits) {
      if (p == 1) both &= ~(take(0, x) & take(3, x));
      if (!both) continue;
      const std::uint64_t wr = take(r, x), ws = take(s, x);
      put(r, x, (both & ws) | (~both & wr));
      put(s, x, (both & wr) | (~both & ws));
    }
  }

  void prune() {
    const Time left = horizon_ - t_;
    const Coord lo = -2 * left, hi = n_ - 1 + 2 * left;
    for (int k = 0; k < 4; ++k) {
      auto& m = tracks_[static_cast<std::size_t>(k)];
      while (!m.empty() && pos(k, m.begin()->first) < lo) m.erase(m.begin());
      while (!m.empty() && pos(k, std::prev(m.end())->first) > hi) m.erase(std::prev(m.end()));
    }
  }

  int n_;
  Time horizon_;
  Time t_ = 0;
  std::array<std::map<Coord, std::uint64_t>, 4> tracks_;
};

std::vector<std::uint64_t> run_batch(const Configuration& gadget, int n, const std::uint64_t* patterns,
                                     std::size_t count, Time t) {
  const std::uint64_t all = count == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
  SlicedRun run(n, t);
  for (const auto& [x, c] : gadget.cells())
    for (int k = 0; k < 4; ++k)
      if (c.has(k)) run.add(x, k, all);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) {
      std::uint64_t lanes = 0;
      for (std::size_t j = 0; j < count; ++j)
        if ((patterns[j] >> (4 * i + k)) & 1u) lanes |= std::uint64_t{1} << j;
      run.add(i, k, lanes);
    }
  while (run.time() < t) run.step();
  std::vector<std::uint64_t> out(count, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) {
      const std::uint64_t w = run.word(i, k);
      for (std::size_t j = 0; j < count; ++j)
        if ((w >> j) & 1u) out[j] |= std::uint64_t{1} << (4 * i + k);
    }
  return out;
}

std::string cell_bits(std::uint64_t pattern, int i) {
  return cell_to_string(Cell(static_cast<std::uint8_t>((pattern >> (4 * i)) & 0xF)));
}

}  // namespace

std::vector<std::uint64_t> run_block_patterns(const Configuration& gadget, int n,
                                              const std::vector<std::uint64_t>& patterns, Time t) {
  if (n < 1 || n > 16) throw std::invalid_argument("block size out of range");
  if (t < 0) throw std::invalid_argument("negative time");
  for (const auto& [x, c] : gadget.cells())
    if (x >= 0 && x < n) throw std::invalid_argument("gadget particle inside the block");
  std::vector<std::future<std::vector<std::uint64_t>>> jobs;
  for (std::size_t start = 0; start < patterns.size(); start += 64) {
    const std::size_t count = std::min<std::size_t>(64, patterns.size() - start);
    jobs.push_back(std::async(std::launch::async, run_batch, std::cref(gadget), n, patterns.data() + start, count, t));
  }
  std::vector<std::uint64_t> out;
  out.reserve(patterns.size());
  for (auto& j : jobs) {
    const auto part = j.get();
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::size_t VerificationReport::failed_patterns() const {
  return static_cast<std::size_t>(std::count_if(patterns.begin(), patterns.end(), [](const auto& p) { return !p.ok(); }));
}

bool VerificationReport::ok() const { return symbolic_ok && failed_patterns() == 0 && !counterexample; }

VerificationReport verify_plan(const GadgetPlan& plan, const BlockFunction& h, const VerifyOptions& opt) {
  if (plan.n != h.n) throw std::invalid_argument("plan and function disagree on n");
  const int n = plan.n;
  const unsigned bits = static_cast<unsigned>(4 * n);
  VerificationReport rep;
  rep.n = n;
  rep.t_final = plan.t_final;
  rep.particles = plan.particles.size();
  const Configuration gadget = plan.gadget();

  if (opt.symbolic) {
    rep.symbolic_checked = true;
    // The gadget goes in as one modification of the block's own diagram.  A
    // weak budget whose window ends before time 0 switches every control
    // check off, so this is plain event-driven simulation.
    const SpacetimeStore st = SpacetimeStore::from_initial(fully_general(n), Interval{0, n - 1});
    ControlBudget unchecked;
    unchecked.a = std::numeric_limits<std::size_t>::max();
    unchecked.b = unchecked.a;
    unchecked.weak = true;
    unchecked.t = -1;
    const Trial run = st.trial(plan.particles, unchecked, std::numeric_limits<std::size_t>::max());
    if (!run.valid()) throw std::invalid_argument("gadget rejected: " + run.report().detail);
    std::vector<Formula> vars;
    for (std::uint32_t i = 0; i < bits; ++i) vars.push_back(Formula::var(VarId{i}));
    const auto want = netlist_to_formulas(h.netlist, vars);
    for (int i = 0; i < n && rep.symbolic_ok; ++i)
      for (int k = 0; k < 4; ++k) {
        const int s = speed_of_track(k);
        const Formula got = run.value(Line::through(i, plan.t_final, s), plan.t_final);
        const Formula exp = want[static_cast<std::size_t>(4 * i + k)];
        if (equivalent(got, exp)) continue;
        rep.symbolic_ok = false;
        // a pattern that tells the two apart
        std::uint64_t witness = 0;
        for (std::uint64_t p = 0; p < (std::uint64_t{1} << std::min(bits, 20u)); ++p) {
          const Valuation v = Valuation::from_bits(p, bits);
          if (evaluate(got, v) != evaluate(exp, v)) {
            witness = p;
            break;
          }
        }
        rep.counterexample = Counterexample{"symbolic", witness, i, "track " + std::to_string(s) + ": " + to_infix(exp),
                                            "track " + std::to_string(s) + ": " + to_infix(got)};
        break;
      }
  }

  if (opt.concrete != VerifyOptions::Concrete::Off) {
    rep.concrete_checked = true;
    std::vector<std::uint64_t> patterns;
    if (opt.concrete == VerifyOptions::Concrete::Exhaustive && bits <= opt.exhaustive_cap) {
      for (std::uint64_t p = 0; p < (std::uint64_t{1} << bits); ++p) patterns.push_back(p);
    } else {
      rep.sampled = true;
      std::mt19937_64 rng(opt.seed);
      const std::uint64_t mask = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
      for (std::size_t j = 0; j < opt.samples; ++j) patterns.push_back(rng() & mask);
    }
    const auto got = run_block_patterns(gadget, n, patterns, plan.t_final);
    for (std::size_t j = 0; j < patterns.size(); ++j) {
      PatternResult r{patterns[j], h.apply(patterns[j]), got[j]};
      if (!r.ok() && !rep.counterexample) {
        int cell = 0;
        while (((r.expected ^ r.got) >> (4 * cell) & 0xF) == 0) ++cell;
        rep.counterexample = Counterexample{"concrete", r.pattern, cell, cell_bits(r.expected, cell), cell_bits(r.got, cell)};
      }
      rep.patterns.push_back(r);
    }
  }
  return rep;
}

}  // namespace puca
