#include "puca/spacetime.hpp"

#include <algorithm>
#include <limits>

namespace puca {

namespace {

Formula history_value(const SpacetimeStore::History& h, Time t) {
  auto it = std::upper_bound(h.begin(), h.end(), t, [](Time v, const SpacetimeStore::Change& c) { return v < c.t; });
  if (it == h.begin()) return Formula::zero();
  return std::prev(it)->label;
}

int nonzero(const LogicalCell& c) { return nonzero_tracks(c); }

std::string where(Coord x, Time t) { return "(" + std::to_string(x) + ", " + std::to_string(t) + ")"; }

Time floor_div(Time a, Time b) {
  Time q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Time ceil_div(Time a, Time b) { return -floor_div(-a, b); }

}  // namespace

SpacetimeStore SpacetimeStore::from_initial(const LogicalConfiguration& x0, Interval block, unsigned cap) {
  SpacetimeStore s;
  s.block_ = block;
  s.cap_ = cap;
  s.initial_ = canonicalize(x0, cap);
  LogicalConfiguration cur = s.initial_;
  std::map<Line, Formula> active;
  for (Time t = 0;; ++t) {
    if (t > 0) cur = logical_step(cur, cap);
    std::map<Line, Formula> now;
    for (const auto& [x, c] : cur.cells()) {
      const int n = nonzero(c);
      if (n >= 2) s.multi_[{x, t}] = n;
      for (int k = 0; k < 4; ++k)
        if (!c[static_cast<std::size_t>(k)].is_zero())
          now.emplace(Line::through(x, t, speed_of_track(k)), c[static_cast<std::size_t>(k)]);
    }
    for (const auto& [l, f] : now) {
      auto it = active.find(l);
      if (it == active.end() || it->second != f) s.history(l).push_back({t, f});
    }
    for (const auto& [l, f] : active)
      if (!now.count(l)) s.history(l).push_back({t, Formula::zero()});
    active = std::move(now);
    if (forward_dispersed(cur)) break;
  }
  return s;
}

const SpacetimeStore::History* SpacetimeStore::find(const Line& l) const {
  const int k = track_of_speed(l.speed);
  if (k < 0) return nullptr;
  const auto& m = lines_[static_cast<std::size_t>(k)];
  auto it = m.find(l.base);
  return it == m.end() ? nullptr : &it->second;
}

Formula SpacetimeStore::value(const Line& l, Time t) const {
  const History* h = find(l);
  return h ? history_value(*h, t) : Formula::zero();
}

bool SpacetimeStore::occupied(const Line& l, Time until) const {
  const History* h = find(l);
  if (!h) return false;
  for (const auto& c : *h)
    if (c.t <= until && !c.label.is_zero()) return true;
  return false;
}

int SpacetimeStore::count_at(Coord x, Time t) const {
  int n = 0;
  for (int s : kSpeeds) n += value(Line::through(x, t, s), t).is_zero() ? 0 : 1;
  return n;
}

std::size_t SpacetimeStore::occupied_line_count() const {
  std::size_t n = 0;
  for (const auto& m : lines_) n += m.size();
  return n;
}

std::size_t SpacetimeStore::collision_count() const {
  std::size_t n = 0;
  for (const auto& [p, c] : multi_) n += c >= 3 ? 1 : 0;
  return n;
}

ResourceCounts SpacetimeStore::counts(std::size_t protected_lines) const {
  ResourceCounts r;
  r.crossings = crossing_count();
  r.occupied_lines = occupied_line_count();
  r.protected_lines = protected_lines;
  r.particles = placements_.size();
  return r;
}

Formula Trial::value(const Line& l, Time t) const {
  auto it = overrides_.find(l);
  if (it != overrides_.end()) {
    const auto& h = it->second;
    auto e = std::upper_bound(h.begin(), h.end(), t, [](Time v, const Entry& x) { return v < x.t; });
    if (e != h.begin()) {
      const Entry& last = *std::prev(e);
      if (!last.revert) return last.label;
    }
  }
  return base_->value(l, t);
}

namespace {

// Event-driven difference simulation.  Only lines whose labels differ from
// the unmodified diagram are tracked; new events are the integral
// intersections of such lines with every line that may be nonzero there.
class Engine {
 public:
  Engine(const SpacetimeStore& base, const ControlBudget& budget,
         std::map<Line, std::vector<Trial::Entry>>& overrides, std::map<std::pair<Coord, Time>, int>& counts,
         ValidationReport& rep, std::size_t max_events)
      : base_(base), budget_(budget), ov_(overrides), counts_(counts), rep_(rep), max_events_(max_events) {}

  bool run(const std::vector<Placement>& ps) {
    if (ps.size() > budget_.a) return fail(1, "added " + std::to_string(ps.size()) + " particles, budget " +
                                                  std::to_string(budget_.a));
    std::map<Coord, int> per_cell;
    std::set<std::pair<Coord, int>> seen;
    for (const auto& p : ps) {
      if (!is_speed(p.speed)) return fail(1, "bad speed");
      if (base_.block().contains(p.x)) return fail(1, "placement inside the input block at " + std::to_string(p.x));
      if (!seen.insert({p.x, p.speed}).second) return fail(1, "duplicate placement");
      if (!base_.value(Line::through(p.x, 0, p.speed), 0).is_zero())
        return fail(1, "placement on an occupied track at " + std::to_string(p.x));
      ++per_cell[p.x];
    }
    for (const auto& [x, k] : per_cell) {
      const int cb = base_.count_at(x, 0);
      if (!point_checks(x, 0, cb, cb + k)) return false;
    }
    for (const auto& p : ps)
      if (!mark(Line::through(p.x, 0, p.speed), 0, p.label, Formula::zero())) return false;

    bool checked_region = false;
    while (!queue_.empty()) {
      auto [t, x] = *queue_.begin();
      queue_.erase(queue_.begin());
      if (!checked_region && t > budget_.t) {
        if (!region_check()) return false;
        checked_region = true;
      }
      if (++rep_.events > max_events_) return fail(0, "event limit reached");
      if (!process(x, t)) return false;
    }
    if (!checked_region && !region_check()) return false;
    return true;
  }

 private:
  struct State {
    bool dirty = false;
    Formula value;
  };

  bool fail(int cond, std::string why) {
    const auto added = rep_.added, lines = rep_.new_lines, cr = rep_.new_crossings, ev = rep_.events;
    rep_ = ValidationReport::fail(cond, std::move(why));
    rep_.added = added;
    rep_.new_lines = lines;
    rep_.new_crossings = cr;
    rep_.events = ev;
    return false;
  }

  bool in_window(Time t) const { return !budget_.weak || t <= budget_.t; }

  bool on_protected(Coord x, Time t) const {
    for (int s : kSpeeds)
      if (budget_.protected_lines.count(Line::through(x, t, s))) return true;
    return false;
  }

  bool on_target(Coord x, Time t) const {
    for (int s : kSpeeds)
      if (budget_.target_lines.count(Line::through(x, t, s))) return true;
    return false;
  }

  Formula after(const Line& l, Time t) const {
    auto it = ov_.find(l);
    if (it != ov_.end()) {
      const auto& h = it->second;
      auto e = std::upper_bound(h.begin(), h.end(), t, [](Time v, const Trial::Entry& x) { return v < x.t; });
      if (e != h.begin() && !std::prev(e)->revert) return std::prev(e)->label;
    }
    return base_.value(l, t);
  }

  bool point_checks(Coord x, Time t, int cb, int ca) {
    if (ca != cb) counts_[{x, t}] = ca;
    if (in_window(t)) {
      if (ca >= 2 && cb < 2) {
        ++rep_.new_crossings;
        if (rep_.new_crossings > budget_.b) return fail(2, "too many new crossings");
        if (on_protected(x, t)) return fail(4, "new crossing on a protected line at " + where(x, t));
      }
      if (cb == 2 && ca >= 3) return fail(3, "crossing at " + where(x, t) + " became a collision");
    }
    if (!budget_.weak && t > budget_.t && ca >= 3 && cb < 3 && on_target(x, t))
      return fail(6, "new collision on a target line at " + where(x, t));
    return true;
  }

  bool mark(const Line& l, Time t, Formula post_after, Formula post_base) {
    State& st = state_[l];
    const bool differs = post_after != post_base;
    if (!differs) {
      if (st.dirty) {
        st.dirty = false;
        ov_[l].push_back({t, true, Formula::zero()});
      }
      return true;
    }
    if (st.dirty && st.value == post_after) return true;
    st.dirty = true;
    st.value = post_after;
    ov_[l].push_back({t, false, post_after});
    if (in_window(t)) {
      if (budget_.protected_lines.count(l)) return fail(4, "protected " + to_string(l) + " changed at time " + std::to_string(t));
      if (base_.occupied(l, budget_.weak ? budget_.t : kForever)) return fail(4, "occupied " + to_string(l) + " changed at time " + std::to_string(t));
      if (!post_after.is_zero() && counted_.insert(l).second) {
        ++rep_.new_lines;
        if (rep_.new_lines > budget_.a) return fail(2, "too many new lines");
      }
    }
    enumerate(l, t);
    return true;
  }

  void consider(const Line& d, const Line& e, Time after_t) {
    const Coord num = e.base - d.base;
    const int den = d.speed - e.speed;
    if (num % den != 0) return;
    const Time t = num / den;
    if (t <= after_t) return;
    if (!state_.count(e) && base_.value(e, t - 1).is_zero()) return;
    queue_.insert({t, d.at(t)});
  }

  void enumerate(const Line& d, Time from) {
    for (int s : kSpeeds) {
      if (s == d.speed) continue;
      for (const auto& [b, h] : base_.lines(s)) consider(d, Line{b, s}, from);
      for (const auto& [l, st] : state_)
        if (l.speed == s && !base_.lines(s).count(l.base)) consider(d, l, from);
    }
  }

  bool process(Coord x, Time t) {
    LogicalCell pre_a, pre_b, post_b;
    std::array<Line, 4> ls;
    bool same = true;
    for (int k = 0; k < 4; ++k) {
      const auto K = static_cast<std::size_t>(k);
      ls[K] = Line::through(x, t, speed_of_track(k));
      pre_a[K] = after(ls[K], t - 1);
      pre_b[K] = base_.value(ls[K], t - 1);
      post_b[K] = base_.value(ls[K], t);
      same = same && pre_a[K] == pre_b[K];
    }
    const LogicalCell post_a = same ? post_b : logical_gamma(pre_a, base_.cap());
    if (!point_checks(x, t, nonzero(post_b), nonzero(post_a))) return false;
    for (std::size_t k = 0; k < 4; ++k)
      if (!mark(ls[k], t, post_a[k], post_b[k])) return false;
    return true;
  }

  bool region_check() {
    if (budget_.region.empty()) return true;
    const Time t = budget_.t;
    for (const auto& [l, st] : state_) {
      if (!st.dirty || st.value.is_zero()) continue;
      const Coord x = l.at(t);
      if (!budget_.region.contains(x) || budget_.target_lines.count(l)) continue;
      if (base_.value(l, t).is_zero()) return fail(5, "new particle at forbidden position " + where(x, t));
    }
    return true;
  }

  const SpacetimeStore& base_;
  const ControlBudget& budget_;
  std::map<Line, std::vector<Trial::Entry>>& ov_;
  std::map<std::pair<Coord, Time>, int>& counts_;
  ValidationReport& rep_;
  std::size_t max_events_;
  std::map<Line, State> state_;
  std::set<Line> counted_;
  std::set<std::pair<Time, Coord>> queue_;
};

}  // namespace

Trial SpacetimeStore::trial(const std::vector<Placement>& ps, const ControlBudget& budget, std::size_t max_events) const {
  Trial tr;
  tr.base_ = this;
  tr.placements_ = ps;
  std::sort(tr.placements_.begin(), tr.placements_.end());
  tr.report_.added = ps.size();
  Engine eng(*this, budget, tr.overrides_, tr.counts_, tr.report_, max_events);
  if (eng.run(tr.placements_)) tr.report_.valid = true;
  return tr;
}

void SpacetimeStore::commit(const Trial& tr) {
  if (!tr.valid()) throw std::logic_error("cannot commit an invalid modification");
  if (tr.base_ != this) throw std::logic_error("modification belongs to another diagram");
  std::vector<std::pair<Line, History>> rebuilt;
  for (const auto& [l, entries] : tr.overrides_) {
    std::vector<Time> times;
    if (const History* h = find(l))
      for (const auto& c : *h) times.push_back(c.t);
    for (const auto& e : entries) times.push_back(e.t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    History nh;
    Formula prev = Formula::zero();
    for (Time t : times) {
      const Formula v = tr.value(l, t);
      if (v != prev) nh.push_back({t, v});
      prev = v;
    }
    rebuilt.emplace_back(l, std::move(nh));
  }
  for (auto& [l, h] : rebuilt) {
    auto& m = lines_[static_cast<std::size_t>(track_of_speed(l.speed))];
    if (h.empty())
      m.erase(l.base);
    else
      m[l.base] = std::move(h);
  }
  for (const auto& [p, c] : tr.counts_) {
    if (c >= 2)
      multi_[p] = c;
    else
      multi_.erase(p);
  }
  for (const auto& p : tr.placements_) {
    placements_.push_back(p);
    initial_.set_track(p.x, p.speed, p.label);
  }
}

LogicalConfiguration SpacetimeStore::state_at(Time t) const { return logical_run(initial_, t, cap_); }

Time SpacetimeStore::last_time_inside(const Interval& I) const {
  Time last = -1;
  for (int k = 0; k < 4; ++k) {
    const int s = speed_of_track(k);
    for (const auto& [b, h] : lines_[static_cast<std::size_t>(k)]) {
      // times when b + s t lies in [lo, hi]
      Time lo_t, hi_t;
      if (s > 0) {
        lo_t = ceil_div(I.lo - b, s);
        hi_t = floor_div(I.hi - b, s);
      } else {
        lo_t = ceil_div(I.hi - b, s);
        hi_t = floor_div(I.lo - b, s);
      }
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i].label.is_zero()) continue;
        const Time from = std::max(h[i].t, lo_t);
        const Time to = std::min(i + 1 < h.size() ? h[i + 1].t - 1 : std::numeric_limits<Time>::max(), hi_t);
        if (from <= to) last = std::max(last, to);
      }
    }
  }
  return last;
}

}  // namespace puca
