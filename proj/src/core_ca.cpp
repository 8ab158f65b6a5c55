#include "puca/core_ca.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace puca {

namespace {

constexpr Coord kCoordLimit = std::numeric_limits<Coord>::max() / 4;

Coord checked_shift(Coord x, int s) {
  if (x > kCoordLimit || x < -kCoordLimit) throw std::overflow_error("coordinate overflow");
  return x + s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string cell_to_string(Cell c) {
  std::string s(4, '0');
  for (int k = 0; k < 4; ++k)
    if (c.has(k)) s[static_cast<std::size_t>(k)] = '1';
  return s;
}

Cell cell_from_string(std::string_view s) {
  if (s.size() != 4) throw std::invalid_argument("cell must have four bits");
  Cell c;
  for (int k = 0; k < 4; ++k) {
    const char ch = s[static_cast<std::size_t>(k)];
    if (ch != '0' && ch != '1') throw std::invalid_argument("cell bits must be 0 or 1");
    c.set(k, ch == '1');
  }
  return c;
}

bool gamma_self_check() {
  for (unsigned v = 0; v < 16; ++v) {
    const Cell in(static_cast<std::uint8_t>(v));
    Cell expect = in;
    if (in.has(0) && in.has(3)) {
      expect.set(1, in.has(2));
      expect.set(2, in.has(1));
    } else if (in.has(1) && in.has(2)) {
      expect.set(0, in.has(3));
      expect.set(3, in.has(0));
    }
    if (gamma(in) != expect) return false;
    if (gamma(gamma(in)) != in) return false;
    if (gamma(in).count() != in.count()) return false;
  }
  return true;
}

Cell Configuration::get(Coord x) const {
  auto it = cells_.find(x);
  return it == cells_.end() ? Cell{} : it->second;
}

void Configuration::set(Coord x, Cell c) {
  if (c.empty())
    cells_.erase(x);
  else
    cells_[x] = c;
}

void Configuration::add_particle(Coord x, int speed) {
  const int k = track_of_speed(speed);
  if (k < 0) throw std::invalid_argument("bad speed");
  Cell c = get(x);
  c.set(k, true);
  set(x, c);
}

bool Configuration::has_particle(Coord x, int speed) const {
  const int k = track_of_speed(speed);
  return k >= 0 && get(x).has(k);
}

std::size_t Configuration::particle_count() const {
  std::size_t n = 0;
  for (const auto& [x, c] : cells_) n += static_cast<std::size_t>(c.count());
  return n;
}

Coord Configuration::min_coord() const {
  if (cells_.empty()) throw std::logic_error("empty configuration");
  return cells_.begin()->first;
}

Coord Configuration::max_coord() const {
  if (cells_.empty()) throw std::logic_error("empty configuration");
  return cells_.rbegin()->first;
}

Configuration Configuration::restricted(Coord lo, Coord hi) const {
  Configuration out;
  for (auto it = cells_.lower_bound(lo); it != cells_.end() && it->first <= hi; ++it)
    out.cells_.emplace_hint(out.cells_.end(), it->first, it->second);
  return out;
}

namespace {

// Moves every particle by its speed (sign = +1) or against it (sign = -1).
Configuration::Map shift_all(const Configuration::Map& cells, int sign) {
  std::vector<std::pair<Coord, std::uint8_t>> moved;
  moved.reserve(cells.size() * 2);
  for (const auto& [x, c] : cells)
    for (int k = 0; k < 4; ++k)
      if (c.has(k)) moved.emplace_back(checked_shift(x, sign * speed_of_track(k)), static_cast<std::uint8_t>(1u << k));
  std::sort(moved.begin(), moved.end());
  Configuration::Map out;
  for (std::size_t i = 0; i < moved.size();) {
    std::uint8_t bits = 0;
    std::size_t j = i;
    for (; j < moved.size() && moved[j].first == moved[i].first; ++j) bits = static_cast<std::uint8_t>(bits | moved[j].second);
    out.emplace_hint(out.end(), moved[i].first, Cell(bits));
    i = j;
  }
  return out;
}

}  // namespace

Configuration step(const Configuration& x) {
  Configuration out;
  for (auto& [pos, c] : shift_all(x.cells(), +1)) out.set(pos, gamma(c));
  return out;
}

Configuration step_inverse(const Configuration& x) {
  Configuration::Map pre;
  for (const auto& [pos, c] : x.cells()) pre.emplace_hint(pre.end(), pos, gamma(c));
  Configuration out;
  for (auto& [pos, c] : shift_all(pre, -1)) out.set(pos, c);
  return out;
}

Configuration run(const Configuration& x, Time t) {
  Configuration cur = x;
  for (Time i = 0; i < t; ++i) cur = step(cur);
  for (Time i = 0; i > t; --i) cur = step_inverse(cur);
  return cur;
}

std::string serialize(const Configuration& x) {
  std::ostringstream os;
  for (const auto& [pos, c] : x.cells()) os << pos << ' ' << cell_to_string(c) << '\n';
  return os.str();
}

Configuration parse_configuration(std::string_view text) {
  Configuration out;
  int line_no = 0;
  bool have_prev = false;
  Coord prev = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto sp = line.find_first_of(" \t");
    if (sp == std::string_view::npos) throw ParseError(line_no, "expected '<coordinate> <cell>'");
    const std::string_view coord_text = line.substr(0, sp);
    const std::string_view cell_text = trim(line.substr(sp));
    Coord x = 0;
    auto [p, ec] = std::from_chars(coord_text.data(), coord_text.data() + coord_text.size(), x);
    if (ec != std::errc{} || p != coord_text.data() + coord_text.size())
      throw ParseError(line_no, "bad coordinate '" + std::string(coord_text) + "'");
    Cell c;
    try {
      c = cell_from_string(cell_text);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    if (have_prev && x <= prev) throw ParseError(line_no, "coordinates must be strictly increasing");
    have_prev = true;
    prev = x;
    out.set(x, c);
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace puca
