#include "puca/logical_ca.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace puca {

int nonzero_tracks(const LogicalCell& c) {
  int n = 0;
  for (const auto& f : c) n += f.is_zero() ? 0 : 1;
  return n;
}

bool is_zero_cell(const LogicalCell& c) { return nonzero_tracks(c) == 0; }

LogicalCell logical_gamma(const LogicalCell& c, unsigned cap) {
  if (nonzero_tracks(c) < 3) return c;
  const Formula& a = c[0];
  const Formula& b = c[1];
  const Formula& cc = c[2];
  const Formula& d = c[3];
  const Formula bc = b & cc;
  const Formula ad = a & d;
  LogicalCell out{conditional(bc, d, a), conditional(ad, cc, b), conditional(ad, b, cc), conditional(bc, a, d)};
  for (auto& f : out) f = canonical(f, cap);
  return out;
}

namespace {
const LogicalCell kZeroCell{};
}

const LogicalCell& LogicalConfiguration::get(Coord x) const {
  auto it = cells_.find(x);
  return it == cells_.end() ? kZeroCell : it->second;
}

void LogicalConfiguration::set(Coord x, const LogicalCell& c) {
  if (is_zero_cell(c))
    cells_.erase(x);
  else
    cells_[x] = c;
}

void LogicalConfiguration::set_track(Coord x, int speed, Formula f) {
  const int k = track_of_speed(speed);
  if (k < 0) throw std::invalid_argument("bad speed");
  LogicalCell c = get(x);
  c[static_cast<std::size_t>(k)] = f;
  set(x, c);
}

Formula LogicalConfiguration::track(Coord x, int speed) const {
  const int k = track_of_speed(speed);
  if (k < 0) throw std::invalid_argument("bad speed");
  return get(x)[static_cast<std::size_t>(k)];
}

std::size_t LogicalConfiguration::boolean_particle_count() const {
  std::size_t n = 0;
  for (const auto& [x, c] : cells_) n += static_cast<std::size_t>(nonzero_tracks(c));
  return n;
}

std::vector<std::uint32_t> LogicalConfiguration::variables() const {
  std::set<std::uint32_t> vars;
  for (const auto& [x, c] : cells_)
    for (const auto& f : c) vars.insert(f.support().begin(), f.support().end());
  return {vars.begin(), vars.end()};
}

LogicalConfiguration embed(const Configuration& x) {
  LogicalConfiguration out;
  for (const auto& [pos, c] : x.cells()) {
    LogicalCell lc;
    for (int k = 0; k < 4; ++k) lc[static_cast<std::size_t>(k)] = Formula::constant(c.has(k));
    out.set(pos, lc);
  }
  return out;
}

LogicalConfiguration fully_general(int n) {
  LogicalConfiguration out;
  for (int i = 0; i < n; ++i) {
    LogicalCell c;
    for (int k = 0; k < 4; ++k)
      c[static_cast<std::size_t>(k)] = Formula::var(VarId{static_cast<std::uint32_t>(4 * i + k)});
    out.set(i, c);
  }
  return out;
}

LogicalConfiguration canonicalize(const LogicalConfiguration& x, unsigned cap) {
  LogicalConfiguration out;
  for (const auto& [pos, c] : x.cells()) {
    LogicalCell lc;
    for (std::size_t k = 0; k < 4; ++k) lc[k] = canonical(c[k], cap);
    out.set(pos, lc);
  }
  return out;
}

namespace {

LogicalConfiguration::Map shift_all(const LogicalConfiguration::Map& cells, int sign) {
  LogicalConfiguration::Map out;
  for (const auto& [x, c] : cells)
    for (int k = 0; k < 4; ++k) {
      const Formula& f = c[static_cast<std::size_t>(k)];
      if (!f.is_zero()) out[x + sign * speed_of_track(k)][static_cast<std::size_t>(k)] = f;
    }
  return out;
}

}  // namespace

LogicalConfiguration logical_step(const LogicalConfiguration& x, unsigned cap) {
  LogicalConfiguration out;
  for (auto& [pos, c] : shift_all(x.cells(), +1)) out.set(pos, logical_gamma(c, cap));
  return out;
}

LogicalConfiguration logical_step_inverse(const LogicalConfiguration& x, unsigned cap) {
  LogicalConfiguration::Map pre;
  for (const auto& [pos, c] : x.cells()) pre.emplace_hint(pre.end(), pos, logical_gamma(c, cap));
  LogicalConfiguration out;
  for (auto& [pos, c] : shift_all(pre, -1)) out.set(pos, c);
  return out;
}

LogicalConfiguration logical_run(const LogicalConfiguration& x, Time t, unsigned cap) {
  LogicalConfiguration cur = x;
  for (Time i = 0; i < t; ++i) cur = logical_step(cur, cap);
  for (Time i = 0; i > t; --i) cur = logical_step_inverse(cur, cap);
  return cur;
}

Configuration apply_valuation(const LogicalConfiguration& x, const Valuation& v) {
  Configuration out;
  for (const auto& [pos, c] : x.cells()) {
    Cell cell;
    for (int k = 0; k < 4; ++k) cell.set(k, evaluate(c[static_cast<std::size_t>(k)], v));
    out.set(pos, cell);
  }
  return out;
}

namespace {

// Semantically zero tracks are not Boolean particles.
int boolean_tracks(const LogicalCell& c, unsigned cap) {
  int n = 0;
  for (const auto& f : c)
    if (!f.is_zero() && !is_semantically_zero(f, cap)) ++n;
  return n;
}

void record(Census& out, const LogicalConfiguration& x, Time t, unsigned cap) {
  for (const auto& [pos, c] : x.cells()) {
    const int n = boolean_tracks(c, cap);
    for (int k = 0; k < 4; ++k) {
      const Formula& f = c[static_cast<std::size_t>(k)];
      if (!f.is_zero() && !is_semantically_zero(f, cap))
        out.particles.push_back({{pos, t, speed_of_track(k)}, f});
    }
    if (n >= 2) out.crossings.push_back({pos, t, n});
    if (n >= 3) out.collisions.push_back({pos, t, n});
  }
}

}  // namespace

Census census(const LogicalConfiguration& x0, Time t_min, Time t_max, unsigned cap) {
  Census out;
  if (t_min > t_max) return out;
  LogicalConfiguration cur = x0;
  Time t = 0;
  if (t_min > 0) {
    cur = logical_run(x0, t_min, cap);
    t = t_min;
  }
  if (t_max < 0) {
    cur = logical_run(x0, t_max, cap);
    t = t_max;
  }
  // Backward part first so results are ordered by time.
  if (t_min < t && t <= 0) {
    std::vector<std::pair<Time, LogicalConfiguration>> back;
    LogicalConfiguration b = cur;
    for (Time s = t - 1; s >= t_min; --s) {
      b = logical_step_inverse(b, cap);
      back.emplace_back(s, b);
    }
    std::reverse(back.begin(), back.end());
    for (auto& [s, cfg] : back) record(out, cfg, s, cap);
  }
  record(out, cur, t, cap);
  for (Time s = t + 1; s <= t_max; ++s) {
    cur = logical_step(cur, cap);
    record(out, cur, s, cap);
  }
  return out;
}

namespace {

std::vector<std::pair<Coord, int>> particles_sorted(const LogicalConfiguration& x) {
  std::vector<std::pair<Coord, int>> ps;
  for (const auto& [pos, c] : x.cells())
    for (int k = 0; k < 4; ++k)
      if (!c[static_cast<std::size_t>(k)].is_zero()) ps.emplace_back(pos, speed_of_track(k));
  std::sort(ps.begin(), ps.end());
  return ps;
}

std::vector<BooleanParticle> particle_list(const LogicalConfiguration& x, Time t) {
  std::vector<BooleanParticle> out;
  for (const auto& [pos, c] : x.cells())
    for (int k = 0; k < 4; ++k) {
      const Formula& f = c[static_cast<std::size_t>(k)];
      if (!f.is_zero()) out.push_back({{pos, t, speed_of_track(k)}, f});
    }
  return out;
}

}  // namespace

bool forward_dispersed(const LogicalConfiguration& x) {
  auto ps = particles_sorted(x);
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (ps[i].second < ps[i - 1].second) return false;
  return true;
}

bool backward_dispersed(const LogicalConfiguration& x) {
  auto ps = particles_sorted(x);
  for (std::size_t i = 1; i < ps.size(); ++i) {
    if (ps[i].first == ps[i - 1].first) return false;
    if (ps[i].second > ps[i - 1].second) return false;
  }
  return true;
}

DiffusionResult diffuse(int n, unsigned cap) {
  if (n < 1) throw std::invalid_argument("block size must be positive");
  DiffusionResult r;
  r.n = n;
  LogicalConfiguration cur = fully_general(n);
  const Time t_min = (n + 1) / 2;
  Time t = 0;
  while (t < t_min || !forward_dispersed(cur)) {
    cur = logical_step(cur, cap);
    ++t;
  }
  r.t_dis = t;
  r.state = cur;
  r.particles = particle_list(cur, t);
  return r;
}

ReverseDiffusionResult reverse_diffuse(int n, const std::vector<Formula>& labels, unsigned cap) {
  if (labels.size() != static_cast<std::size_t>(4 * n)) throw std::invalid_argument("expected 4n labels");
  LogicalConfiguration cur;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k)
      cur.set_track(i, speed_of_track(k), canonical(labels[static_cast<std::size_t>(4 * i + k)], cap));
  ReverseDiffusionResult r;
  r.n = n;
  Time t = 0;
  while (!backward_dispersed(cur)) {
    cur = logical_step_inverse(cur, cap);
    ++t;
  }
  r.t_back = t;
  r.state = cur;
  r.particles = particle_list(cur, -t);
  return r;
}

std::string dump(const LogicalConfiguration& x) {
  std::ostringstream os;
  for (const auto& [pos, c] : x.cells())
    for (int k = 0; k < 4; ++k) {
      const Formula& f = c[static_cast<std::size_t>(k)];
      if (!f.is_zero()) os << pos << ' ' << (speed_of_track(k) > 0 ? "+" : "") << speed_of_track(k) << ' '
                           << to_prefix(f) << '\n';
    }
  return os.str();
}

}  // namespace puca
