#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "puca/core_ca.hpp"
#include "puca/logical_ca.hpp"

namespace puca {

struct RenderSpec {
  enum class Mode { Concrete, Logical };
  enum class Style { Ascii, Svg };

  Time t_min = 0, t_max = 10;
  Coord x_min = -10, x_max = 10;
  Mode mode = Mode::Concrete;
  Style style = Style::Ascii;
  bool show_formulas = false;
  bool show_crossings = true;

  // Throws std::invalid_argument on an empty range.
  void validate() const;
};

// One particle at (x, t) moving with `speed`.  Symbolic marks carry a label
// that is not constant.
struct Mark {
  Coord x = 0;
  Time t = 0;
  int speed = 0;
  bool symbolic = false;
  std::string label;
  auto operator<=>(const Mark& o) const { return std::tuple(t, x, speed) <=> std::tuple(o.t, o.x, o.speed); }
  bool operator==(const Mark& o) const { return t == o.t && x == o.x && speed == o.speed; }
};

struct Diagram {
  RenderSpec spec;
  std::vector<Mark> marks;  // sorted by (t, x, speed), only inside the window
};

Diagram make_diagram(const Configuration& x0, const RenderSpec& spec);
Diagram make_diagram(const LogicalConfiguration& x0, const RenderSpec& spec);

// ASCII puts time downward, one row per step and one column per cell:
//   .  empty   R +2   r +1   l -1   L -2   X two particles   * three or more
// With crossings hidden, shared cells print as 'o'.
std::string render_ascii(const Diagram& d);
// SVG puts time upward with a fixed 8px pitch; every particle is a short
// segment with data-x, data-t and data-s attributes.
std::string render_svg(const Diagram& d);
std::string render(const Diagram& d);

char ascii_mark(int speed);

}  // namespace puca
