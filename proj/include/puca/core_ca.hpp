#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace puca {

using Coord = std::int64_t;
using Time = std::int64_t;
inline constexpr Time kForever = std::numeric_limits<Time>::max();

// Track order inside a cell: +2, +1, -1, -2.  Bit k of a cell is track k.
inline constexpr std::array<int, 4> kSpeeds = {2, 1, -1, -2};

constexpr int speed_of_track(int track) { return kSpeeds[static_cast<std::size_t>(track)]; }

constexpr int track_of_speed(int speed) {
  switch (speed) {
    case 2: return 0;
    case 1: return 1;
    case -1: return 2;
    case -2: return 3;
    default: return -1;
  }
}

constexpr bool is_speed(int s) { return track_of_speed(s) >= 0; }
constexpr bool is_fast(int s) { return s == 2 || s == -2; }

struct Cell {
  std::uint8_t bits = 0;

  constexpr Cell() = default;
  constexpr explicit Cell(std::uint8_t b) : bits(static_cast<std::uint8_t>(b & 0xF)) {}

  constexpr bool has(int track) const { return (bits >> track) & 1u; }
  constexpr void set(int track, bool on) {
    if (on)
      bits = static_cast<std::uint8_t>(bits | (1u << track));
    else
      bits = static_cast<std::uint8_t>(bits & ~(1u << track));
  }
  constexpr bool empty() const { return bits == 0; }
  constexpr int count() const {
    return ((bits >> 0) & 1) + ((bits >> 1) & 1) + ((bits >> 2) & 1) + ((bits >> 3) & 1);
  }
  constexpr bool operator==(const Cell&) const = default;
};

// Cell text is the four track bits in order +2 +1 -1 -2, e.g. "1011".
std::string cell_to_string(Cell c);
Cell cell_from_string(std::string_view s);

namespace detail {
constexpr std::array<std::uint8_t, 16> make_gamma_table() {
  std::array<std::uint8_t, 16> t{};
  for (unsigned v = 0; v < 16; ++v) {
    const unsigned a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1, d = (v >> 3) & 1;
    unsigned out = v;
    if (a && d)  // (1,b,c,1) -> (1,c,b,1)
      out = 1u | (c << 1) | (b << 2) | 8u;
    else if (b && c)  // (a,1,1,d) -> (d,1,1,a)
      out = d | 2u | 4u | (a << 3);
    t[v] = static_cast<std::uint8_t>(out);
  }
  return t;
}
}  // namespace detail

inline constexpr std::array<std::uint8_t, 16> kGammaTable = detail::make_gamma_table();

constexpr bool gamma_table_is_involution() {
  for (unsigned v = 0; v < 16; ++v)
    if (kGammaTable[kGammaTable[v]] != v) return false;
  return true;
}
static_assert(gamma_table_is_involution());
static_assert(kGammaTable[0b1011] == 0b1101);

constexpr Cell gamma(Cell c) { return Cell(kGammaTable[c.bits]); }

// Checks the table against the two rewrite rules by brute force; cheap, run once.
bool gamma_self_check();

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Finitely supported configuration; cells that are 0000 are never stored.
class Configuration {
 public:
  using Map = std::map<Coord, Cell>;

  Configuration() = default;

  Cell get(Coord x) const;
  void set(Coord x, Cell c);
  void add_particle(Coord x, int speed);
  bool has_particle(Coord x, int speed) const;

  const Map& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }
  std::size_t support_size() const { return cells_.size(); }
  std::size_t particle_count() const;
  Coord min_coord() const;
  Coord max_coord() const;

  Configuration restricted(Coord lo, Coord hi) const;

  bool operator==(const Configuration&) const = default;

 private:
  Map cells_;
};

Configuration step(const Configuration& x);
Configuration step_inverse(const Configuration& x);
// Negative t runs backward.
Configuration run(const Configuration& x, Time t);

std::string serialize(const Configuration& x);
Configuration parse_configuration(std::string_view text);

}  // namespace puca
