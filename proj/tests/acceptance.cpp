// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "puca/gadget_synth.hpp"
#include "puca/verify.hpp"

using namespace puca;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Formula var(std::uint32_t i) { return Formula::var(VarId{i}); }

Formula random_formula(std::mt19937_64& rng, unsigned vars, int depth) {
  if (depth == 0 || rng() % 3 == 0) {
    switch (rng() % 6) {
      case 0: return Formula::one();
      case 1: return Formula::zero();
      default: return var(static_cast<std::uint32_t>(rng() % vars));
    }
  }
  const Formula l = random_formula(rng, vars, depth - 1), r = random_formula(rng, vars, depth - 1);
  switch (rng() % 4) {
    case 0: return l & r;
    case 1: return l | r;
    case 2: return l ^ r;
    default: return nand(l, r);
  }
}

// 1. reversibility and particle conservation
Outcome reversibility() {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 1000; ++i) {
    const int support = 1 + static_cast<int>(rng() % 64);
    const double density = 0.5 * static_cast<double>(rng() % 1001) / 1000.0;
    std::bernoulli_distribution bit(density);
    Configuration x;
    const Coord origin = static_cast<Coord>(rng() % 200) - 100;
    for (int c = 0; c < support; ++c)
      for (int k = 0; k < 4; ++k)
        if (bit(rng)) x.add_particle(origin + c, speed_of_track(k));
    const Time t = static_cast<Time>(rng() % 101);
    const std::size_t count = x.particle_count();
    Configuration y = x;
    for (Time s = 0; s < t; ++s) {
      y = step(y);
      if (y.particle_count() != count)
        return {false, "particle count changed in configuration " + std::to_string(i) + " at step " + std::to_string(s + 1)};
    }
    if (run(y, -t) != x) return {false, "configuration " + std::to_string(i) + " not restored after t=" + std::to_string(t)};
  }
  return {true, "1000 configurations restored exactly, counts conserved"};
}

// 2. simulation commutes with valuation
Outcome commutation() {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 200; ++i) {
    const unsigned vars = 1 + static_cast<unsigned>(rng() % 12);
    const int support = 1 + static_cast<int>(rng() % 16);
    LogicalConfiguration x;
    for (int c = 0; c < support; ++c)
      for (int s : kSpeeds)
        if (rng() % 2) x.set_track(c, s, random_formula(rng, vars, 2));
    const Time t = static_cast<Time>(rng() % 81) - 40;
    const LogicalConfiguration y = logical_run(x, t);
    for (int j = 0; j < 20; ++j) {
      const Valuation v = Valuation::from_bits(rng(), 12);
      if (apply_valuation(y, v) != run(apply_valuation(x, v), t))
        return {false, "configuration " + std::to_string(i) + ", t=" + std::to_string(t)};
    }
  }
  return {true, "200 configurations x 20 valuations agree"};
}

// 3. diffusion of the fully general block
Outcome diffusion() {
  for (int n = 1; n <= 8; ++n) {
    const LogicalConfiguration x = fully_general(n);
    const Time settle = (n + 1) / 2;
    const Time horizon = 2 * n + 8;
    const Census c = census(x, 0, horizon);
    for (const auto& p : c.collisions)
      if (p.t >= settle) return {false, "n=" + std::to_string(n) + " collision at t=" + std::to_string(p.t)};
    std::map<Time, std::size_t> per_time;
    for (const auto& p : c.particles) {
      ++per_time[p.pos.t];
      if (p.pos.x < -2 * p.pos.t || p.pos.x > n + 2 * p.pos.t)
        return {false, "n=" + std::to_string(n) + " particle outside the cone at t=" + std::to_string(p.pos.t)};
    }
    for (const auto& [t, k] : per_time)
      if (t >= settle && k > static_cast<std::size_t>(6 * n))
        return {false, "n=" + std::to_string(n) + " has " + std::to_string(k) + " particles at t=" + std::to_string(t)};
    if (!forward_dispersed(logical_run(x, horizon)))
      return {false, "n=" + std::to_string(n) + " not dispersed by t=" + std::to_string(horizon)};
  }
  return {true, "n=1..8: no collisions after ceil(n/2), at most 6n particles, support in the cone"};
}

// 4. movement
Outcome movement() {
  std::mt19937_64 rng(404);
  std::size_t elementary = 0, composed = 0, retries = 0;
  for (int i = 0; i < 100; ++i) {
    const int s0 = kSpeeds[rng() % 4];
    const int s1 = kSpeeds[rng() % 4];
    const Formula label = random_formula(rng, 3, 2) | var(static_cast<std::uint32_t>(rng() % 3));
    const Time t1 = 10 + static_cast<Time>(rng() % 30);
    // target point in the cone of speed at most 1
    const Coord j1 = static_cast<Coord>(rng() % static_cast<std::uint64_t>(2 * t1 + 1)) - t1;
    LogicalConfiguration x;
    x.set_track(0, s0, label);
    const Line source = Line::through(0, 0, s0);
    Line target = Line::through(j1, t1, s1);
    if (target == source) target = Line::through(j1 + 1, t1, s1);
    Time deadline = t1;
    for (;;) {
      SpacetimeStore st = SpacetimeStore::from_initial(x, Interval{0, 0});
      ControlBudget b;
      b.a = 16;
      b.b = 1u << 20;
      try {
        const MovementSolution sol = move_particle(st, {source, label, 0}, target, deadline, b);
        if (!equivalent(st.value(target, deadline), label))
          return {false, "instance " + std::to_string(i) + ": wrong label on the target"};
        if (sol.added.size() != 4 * static_cast<std::size_t>(sol.elementary))
          return {false, "instance " + std::to_string(i) + ": " + std::to_string(sol.added.size()) + " auxiliaries for " +
                             std::to_string(sol.elementary) + " elementary moves"};
        LogicalConfiguration after = x;
        for (const auto& p : sol.added) after.set_track(p.x, p.speed, p.label);
        b.t = deadline;
        b.target_lines.insert(target);
        const ValidationReport r = validate_controlled(x, after, b);
        if (!r.valid) return {false, "instance " + std::to_string(i) + ": " + r.summary()};
        (sol.elementary == 1 ? elementary : composed) += 1;
        break;
      } catch (const NoFeasibleParameters& e) {
        ++retries;
        deadline *= 2;
        if (deadline > 100000) return {false, "instance " + std::to_string(i) + ": " + e.what()};
      }
    }
  }
  return {true, "100 moves (" + std::to_string(elementary) + " single, " + std::to_string(composed) + " composed, " +
                    std::to_string(retries) + " deadline retries)"};
}

// 5. NAND gadget
Outcome nand_cases() {
  auto run_case = [](const Formula& b1, const Formula& b2, const std::string& name) -> Outcome {
    LogicalConfiguration x;
    // constant zero inputs have no particle; a variable stands in on the line
    x.set_track(0, 1, b1.is_zero() ? var(8) : b1);
    x.set_track(1, 1, b2.is_zero() ? var(9) : b2);
    SpacetimeStore st = SpacetimeStore::from_initial(x, Interval{0, 1});
    ControlBudget b;
    b.a = 24;
    b.b = 1u << 20;
    const Line target = Line::through(-1, 0, 1);
    const NandSolution sol = nand_gadget(st, {Line::through(0, 0, 1), b1, 0}, {Line::through(1, 0, 1), b2, 0}, target, 0, b);
    const Time t = std::max<Time>(sol.ready(), 1);
    if (!equivalent(st.value(target, t), nand(b1, b2))) return {false, name + ": wrong output"};
    if (!equivalent(st.value(Line::through(0, 0, 1), t), x.track(0, 1)) ||
        !equivalent(st.value(Line::through(1, 0, 1), t), x.track(1, 1)))
      return {false, name + ": inputs disturbed"};
    return {};
  };
  for (int c = 0; c < 4; ++c) {
    const Formula b1 = c & 1 ? Formula::one() : Formula::zero(), b2 = c & 2 ? Formula::one() : Formula::zero();
    if (auto o = run_case(b1, b2, "constants " + std::to_string(c & 1) + std::to_string((c >> 1) & 1)); !o.ok) return o;
  }
  if (auto o = run_case(var(0), var(1), "symbolic"); !o.ok) return o;
  return {true, "4 constant cases and the symbolic case give the NAND, inputs preserved"};
}

struct SuiteRow {
  std::string name;
  int n = 1;
  std::size_t gates = 0;
  Time t_final = 0;
  std::size_t particles = 0;
  bool verified = false;
  std::string note;
};

std::vector<SuiteRow> g_suite;
std::vector<std::pair<std::string, GadgetPlan>> g_plans;

// 6. end-to-end universality
Outcome end_to_end() {
  const std::vector<std::pair<std::string, int>> suite = {{"identity", 1}, {"zero", 1}, {"reverse", 1},
                                                          {"mix", 1},      {"identity", 2}, {"swap", 2}};
  bool all = true;
  std::ostringstream detail;
  for (const auto& [name, n] : suite) {
    const BlockFunction h = BlockFunction::builtin(name, n);
    SuiteRow row{name, n, h.netlist.gate_count(), 0, 0, false, ""};
    try {
      const GadgetPlan plan = synthesize(h);
      const VerificationReport r = verify_plan(plan, h);
      row.t_final = plan.t_final;
      row.particles = plan.particles.size();
      row.verified = r.ok() && r.symbolic_checked && r.concrete_checked && !r.sampled &&
                     r.patterns.size() == (std::size_t{1} << (4 * n));
      if (!row.verified && r.counterexample)
        row.note = r.counterexample->check + " mismatch, cell " + std::to_string(r.counterexample->cell);
      g_plans.emplace_back(name + std::to_string(n), plan);
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    all = all && row.verified;
    detail << (detail.tellp() > 0 ? ", " : "") << name << '/' << n << (row.verified ? " ok" : " FAILED " + row.note);
    g_suite.push_back(row);
  }
  return {all, detail.str() + " (exhaustive concrete and symbolic)"};
}

// 7. polynomial t_final, constants and the golden table live in tests/data
Outcome polynomial() {
  std::ifstream in(std::string(PUCA_TEST_DATA) + "/suite_golden.txt");
  if (!in) return {false, "missing suite_golden.txt"};
  double c = -1, c2 = -1;
  std::map<std::string, std::pair<Time, std::size_t>> golden;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "c") {
      ls >> c;
    } else if (key == "c_prime") {
      ls >> c2;
    } else if (key == "row") {
      std::string name;
      int n;
      std::size_t gates, particles;
      Time t;
      ls >> name >> n >> gates >> t >> particles;
      golden[name + "/" + std::to_string(n)] = {t, particles};
    }
  }
  if (c < 0 || c2 < 0) return {false, "constants missing from suite_golden.txt"};
  if (g_suite.empty()) return {false, "end-to-end suite did not run"};
  std::ostringstream detail;
  bool ok = true;
  double worst = 0;
  for (const auto& r : g_suite) {
    const double m = static_cast<double>(r.gates) + r.n;
    const double bound = c * m * m * m + c2;
    worst = std::max(worst, static_cast<double>(r.t_final) / bound);
    std::cout << "    n=" << r.n << " " << r.name << " C_H=" << r.gates << " t_final=" << r.t_final
              << " particles=" << r.particles << " bound=" << static_cast<long long>(bound) << '\n';
    if (r.t_final == 0 && r.name != "zero") ok = false;
    if (static_cast<double>(r.t_final) > bound) ok = false;
    auto g = golden.find(r.name + "/" + std::to_string(r.n));
    if (g == golden.end() || g->second != std::pair(r.t_final, r.particles)) {
      ok = false;
      detail << "row " << r.name << '/' << r.n << " differs from the golden table; ";
    }
  }
  detail << "t_final <= " << c << "(C_H+n)^3 + " << c2 << " on all rows, worst ratio " << worst;
  return {ok, detail.str()};
}

// 8. every single particle matters
Outcome mutation() {
  const GadgetPlan* plan = nullptr;
  for (const auto& [k, p] : g_plans)
    if (k == "identity1") plan = &p;
  GadgetPlan fresh;
  if (!plan) {
    fresh = synthesize(BlockFunction::builtin("identity", 1));
    plan = &fresh;
  }
  const BlockFunction h = BlockFunction::builtin("identity", 1);
  VerifyOptions o;
  o.symbolic = false;
  if (!verify_plan(*plan, h, o).ok()) return {false, "unmutated plan does not verify"};
  for (std::size_t i = 0; i < plan->particles.size(); ++i) {
    GadgetPlan m = *plan;
    m.particles.erase(m.particles.begin() + static_cast<std::ptrdiff_t>(i));
    if (verify_plan(m, h, o).ok())
      return {false, "deleting particle " + std::to_string(i) + " at " + std::to_string(plan->particles[i].x) +
                         " goes unnoticed"};
  }
  return {true, "all " + std::to_string(plan->particles.size()) + " single deletions fail verification"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "reversibility", 10, reversibility},   {2, "valuation commutes", 60, commutation},
      {3, "diffusion", 30, diffusion},           {4, "movement", 300, movement},
      {5, "nand gadget", 120, nand_cases},       {6, "end-to-end universality", 1800, end_to_end},
      {7, "polynomial t_final", 1e9, polynomial}, {8, "mutation sensitivity", 600, mutation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = secs < c.limit;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1fs", secs);
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << c.name << ", " << buf
              << (in_time ? "" : " over the time limit") << "] " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}
