#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "puca/logical_ca.hpp"

using namespace puca;

namespace {

Formula x(std::uint32_t i) { return Formula::var(VarId{i}); }

Formula random_label(std::mt19937_64& rng, unsigned vars) {
  std::uniform_int_distribution<int> pick(0, 7);
  switch (pick(rng)) {
    case 0: return Formula::one();
    case 1: return x(static_cast<std::uint32_t>(rng() % vars));
    case 2: return ~x(static_cast<std::uint32_t>(rng() % vars));
    case 3: return x(static_cast<std::uint32_t>(rng() % vars)) & x(static_cast<std::uint32_t>(rng() % vars));
    case 4: return x(static_cast<std::uint32_t>(rng() % vars)) ^ x(static_cast<std::uint32_t>(rng() % vars));
    default: return Formula::zero();
  }
}

LogicalConfiguration random_logical(std::mt19937_64& rng, unsigned vars, int width) {
  LogicalConfiguration out;
  for (int i = 0; i < width; ++i)
    for (int s : kSpeeds) out.set_track(static_cast<Coord>(rng() % 32) - 16, s, random_label(rng, vars));
  return out;
}

std::string positions(const std::vector<BooleanParticle>& ps) {
  std::ostringstream os;
  for (const auto& p : ps) os << (os.tellp() > 0 ? " " : "") << p.pos.x << ':' << (p.pos.speed > 0 ? "+" : "") << p.pos.speed;
  return os.str();
}

std::string sorted_positions(std::vector<BooleanParticle> ps) {
  std::sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) {
    return std::pair(a.pos.x, a.pos.speed) < std::pair(b.pos.x, b.pos.speed);
  });
  return positions(ps);
}

}  // namespace

TEST_CASE("logical gamma on constants matches the concrete rule") {
  for (unsigned v = 0; v < 16; ++v) {
    LogicalCell c;
    for (int k = 0; k < 4; ++k) c[static_cast<std::size_t>(k)] = Formula::constant((v >> k) & 1u);
    const LogicalCell out = logical_gamma(c);
    const Cell expect = gamma(Cell(static_cast<std::uint8_t>(v)));
    for (int k = 0; k < 4; ++k) CHECK(out[static_cast<std::size_t>(k)] == Formula::constant(expect.has(k)));
  }
}

TEST_CASE("logical gamma is an involution on canonical labels") {
  const LogicalCell c{x(0), x(1), x(2), x(3)};
  const LogicalCell once = logical_gamma(c);
  CHECK(logical_gamma(once) == c);
}

TEST_CASE("simulation commutes with valuation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const LogicalConfiguration x0 = random_logical(rng, 6, 5);
    const Time t = static_cast<Time>(rng() % 25) - 12;
    const LogicalConfiguration xt = logical_run(x0, t);
    for (int k = 0; k < 8; ++k) {
      const Valuation v = Valuation::from_bits(rng(), 6);
      CHECK(apply_valuation(xt, v) == run(apply_valuation(x0, v), t));
    }
  }
}

TEST_CASE("logical step inverse undoes the step") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const LogicalConfiguration x0 = canonicalize(random_logical(rng, 6, 5));
    CHECK(logical_step_inverse(logical_step(x0)) == x0);
    CHECK(logical_run(logical_run(x0, 9), -9) == x0);
  }
}

TEST_CASE("census counts the three particle collision") {
  LogicalConfiguration x0;
  x0.set_track(0, 2, x(0));
  x0.set_track(1, 1, x(1));
  x0.set_track(4, -2, x(2));
  const Census c = census(x0, 0, 1);
  CHECK(c.collisions.size() == 1);
  CHECK(c.collisions[0].x == 2);
  CHECK(c.collisions[0].t == 1);
  CHECK(c.crossings.size() == 1);
  CHECK(c.particles.size() == 7);  // the collision output has four tracks
}

TEST_CASE("census ignores semantically zero tracks") {
  LogicalConfiguration x0;
  x0.set_track(0, 2, x(0));
  x0.set_track(0, 1, x(1) & ~x(1) & x(2));
  const Census c = census(x0, 0, 0);
  CHECK(c.crossings.empty());
  CHECK(c.particles.size() == 1);
}

TEST_CASE("embedding and valuation are inverse on constants") {
  Configuration c;
  c.set(-1, cell_from_string("1010"));
  c.set(3, cell_from_string("0111"));
  CHECK(apply_valuation(embed(c), Valuation{}) == c);
}

// Frozen from tests/oracles/diffusion_oracle.py.
TEST_CASE("diffusion of small blocks matches the brute force reference") {
  const DiffusionResult d1 = diffuse(1);
  CHECK(d1.t_dis == 1);
  CHECK(sorted_positions(d1.particles) == "-2:-2 -1:-1 1:+1 2:+2");
  for (const auto& p : d1.particles) CHECK(p.label.kind() == Formula::Kind::Var);

  const DiffusionResult d2 = diffuse(2);
  CHECK(d2.t_dis == 1);
  CHECK(sorted_positions(d2.particles) == "-2:-2 -1:-2 -1:-1 0:-1 1:+1 2:+1 2:+2 3:+2");

  const DiffusionResult d3 = diffuse(3);
  CHECK(d3.t_dis == 2);
  CHECK(sorted_positions(d3.particles) == "-4:-2 -3:-2 -2:-2 -2:-1 -1:-1 0:-1 2:+1 3:+1 4:+1 4:+2 5:+2 6:+2");
}

TEST_CASE("dispersed labels are exact for every pattern") {
  for (int n = 1; n <= 2; ++n) {
    const DiffusionResult d = diffuse(n);
    for (std::uint64_t p = 0; p < (1ull << (4 * n)); ++p) {
      const Valuation v = Valuation::from_bits(p, static_cast<unsigned>(4 * n));
      CHECK(apply_valuation(d.state, v) == run(apply_valuation(fully_general(n), v), d.t_dis));
    }
  }
}

TEST_CASE("no collisions after the diffusion time") {
  for (int n = 1; n <= 4; ++n) {
    const DiffusionResult d = diffuse(n);
    const Census c = census(d.state, 0, 3 * n + 10);
    CHECK(c.collisions.empty());
    for (const auto& cr : c.crossings) CHECK(cr.t == 0);
  }
}

TEST_CASE("reverse diffusion of the identity labels") {
  std::vector<Formula> labels;
  for (std::uint32_t i = 0; i < 4; ++i) labels.push_back(x(i));
  const ReverseDiffusionResult r = reverse_diffuse(1, labels);
  CHECK(r.t_back == 1);
  CHECK(r.particles.size() == 4);
  LogicalConfiguration fwd = logical_run(r.state, r.t_back);
  CHECK(fwd == fully_general(1));

  const ReverseDiffusionResult z = reverse_diffuse(1, std::vector<Formula>(4));
  CHECK(z.t_back == 0);
  CHECK(z.particles.empty());
}

TEST_CASE("dump lists one Boolean particle per line") {
  LogicalConfiguration x0;
  x0.set_track(3, -1, x(2));
  x0.set_track(5, 2, Formula::one());
  CHECK(dump(x0) == "3 -1 x2\n5 +2 1\n");
}
