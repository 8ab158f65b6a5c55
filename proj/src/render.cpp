#include "puca/render.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace puca {

namespace {

constexpr int kPitch = 8;
constexpr int kMargin = 40;

const char* speed_colour(int s) {
  switch (s) {
    case 2: return "#1f5fbf";
    case 1: return "#3fa03f";
    case -1: return "#d08a1a";
    default: return "#b02a2a";
  }
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Marks grouped by cell, in order.
std::map<std::pair<Time, Coord>, std::vector<const Mark*>> by_cell(const Diagram& d) {
  std::map<std::pair<Time, Coord>, std::vector<const Mark*>> out;
  for (const auto& m : d.marks) out[{m.t, m.x}].push_back(&m);
  return out;
}

}  // namespace

void RenderSpec::validate() const {
  if (t_max < t_min) throw std::invalid_argument("empty time range");
  if (x_max < x_min) throw std::invalid_argument("empty coordinate range");
}

char ascii_mark(int speed) {
  switch (speed) {
    case 2: return 'R';
    case 1: return 'r';
    case -1: return 'l';
    case -2: return 'L';
    default: return '?';
  }
}

Diagram make_diagram(const Configuration& x0, const RenderSpec& spec) {
  spec.validate();
  Diagram d;
  d.spec = spec;
  d.spec.mode = RenderSpec::Mode::Concrete;
  Configuration cur = run(x0, spec.t_min);
  for (Time t = spec.t_min;; ++t) {
    for (auto it = cur.cells().lower_bound(spec.x_min); it != cur.cells().end() && it->first <= spec.x_max; ++it)
      for (int k = 0; k < 4; ++k)
        if (it->second.has(k)) d.marks.push_back({it->first, t, speed_of_track(k), false, "1"});
    if (t == spec.t_max) break;
    cur = step(cur);
  }
  std::sort(d.marks.begin(), d.marks.end());
  return d;
}

Diagram make_diagram(const LogicalConfiguration& x0, const RenderSpec& spec) {
  spec.validate();
  Diagram d;
  d.spec = spec;
  d.spec.mode = RenderSpec::Mode::Logical;
  LogicalConfiguration cur = logical_run(x0, spec.t_min);
  for (Time t = spec.t_min;; ++t) {
    for (auto it = cur.cells().lower_bound(spec.x_min); it != cur.cells().end() && it->first <= spec.x_max; ++it)
      for (int k = 0; k < 4; ++k) {
        const Formula f = it->second[static_cast<std::size_t>(k)];
        if (f.is_zero()) continue;
        d.marks.push_back({it->first, t, speed_of_track(k), !is_constant(f), to_infix(f, 60)});
      }
    if (t == spec.t_max) break;
    cur = logical_step(cur);
  }
  std::sort(d.marks.begin(), d.marks.end());
  return d;
}

std::string render_ascii(const Diagram& d) {
  const RenderSpec& s = d.spec;
  const auto cells = by_cell(d);
  const int width = static_cast<int>(std::max(std::to_string(s.t_min).size(), std::to_string(s.t_max).size()));
  std::ostringstream os;
  os << "# time increases downward; columns are x = " << s.x_min << " .. " << s.x_max << '\n';
  os << "# R +2  r +1  l -1  L -2";
  if (s.show_crossings) os << "  X crossing  * collision";
  os << '\n';
  for (Time t = s.t_min; t <= s.t_max; ++t) {
    std::string row(static_cast<std::size_t>(s.x_max - s.x_min + 1), '.');
    for (auto it = cells.lower_bound({t, s.x_min}); it != cells.end() && it->first.first == t; ++it) {
      const auto& ms = it->second;
      char c = ascii_mark(ms.front()->speed);
      if (ms.size() >= 2) c = !s.show_crossings ? 'o' : ms.size() == 2 ? 'X' : '*';
      row[static_cast<std::size_t>(it->first.second - s.x_min)] = c;
    }
    std::string tl = std::to_string(t);
    os << std::string(static_cast<std::size_t>(width) - tl.size(), ' ') << tl << " |" << row << '\n';
  }
  if (s.show_formulas) {
    os << "# labels\n";
    for (const auto& m : d.marks)
      if (m.symbolic) os << "# " << m.x << ' ' << m.t << ' ' << m.speed << ' ' << m.label << '\n';
  }
  return os.str();
}

std::string render_svg(const Diagram& d) {
  const RenderSpec& s = d.spec;
  const auto cols = s.x_max - s.x_min + 1;
  const auto rows = s.t_max - s.t_min + 1;
  const auto w = std::max<Coord>(cols * kPitch + 2 * kMargin, 480);
  const auto h = rows * kPitch + 2 * kMargin + 40;
  auto cx = [&](Coord x) { return kMargin + (x - s.x_min) * kPitch + kPitch / 2; };
  auto cy = [&](Time t) { return kMargin + (s.t_max - t) * kPitch + kPitch / 2; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << cols * kPitch << "\" height=\""
     << rows * kPitch << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 6 << "\" font-size=\"10\" font-family=\"monospace\">t = "
     << s.t_max << "</text>\n";
  os << "<text x=\"" << kMargin << "\" y=\"" << kMargin + rows * kPitch + 14
     << "\" font-size=\"10\" font-family=\"monospace\">t = " << s.t_min << ", x = " << s.x_min << " .. " << s.x_max
     << "</text>\n";

  os << "<g stroke-width=\"1.5\" stroke-linecap=\"round\">\n";
  for (const auto& m : d.marks) {
    const auto x = cx(m.x), y = cy(m.t);
    const int dx = m.speed * kPitch / 2;
    os << "<line class=\"p\" data-x=\"" << m.x << "\" data-t=\"" << m.t << "\" data-s=\"" << m.speed << "\" x1=\""
       << x - dx << "\" y1=\"" << y + kPitch / 2 << "\" x2=\"" << x + dx << "\" y2=\"" << y - kPitch / 2
       << "\" stroke=\"" << speed_colour(m.speed) << '"';
    if (m.symbolic) os << " stroke-dasharray=\"2,2\"";
    if (s.show_formulas && m.symbolic)
      os << "><title>" << escape(m.label) << "</title></line>\n";
    else
      os << "/>\n";
  }
  os << "</g>\n";

  if (s.show_crossings) {
    os << "<g>\n";
    for (const auto& [pos, ms] : by_cell(d)) {
      if (ms.size() < 2) continue;
      const bool collision = ms.size() >= 3;
      os << "<circle class=\"" << (collision ? "collision" : "crossing") << "\" data-x=\"" << pos.second
         << "\" data-t=\"" << pos.first << "\" cx=\"" << cx(pos.second) << "\" cy=\"" << cy(pos.first) << "\" r=\""
         << (collision ? 3 : 2) << "\" fill=\"" << (collision ? "#000000" : "none") << "\" stroke=\"#000000\"/>\n";
    }
    os << "</g>\n";
  }

  // legend
  const auto ly = kMargin + rows * kPitch + 30;
  int lx = kMargin;
  for (int sp : kSpeeds) {
    os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 12 << "\" y2=\"" << ly - 6 << "\" stroke=\""
       << speed_colour(sp) << "\" stroke-width=\"1.5\"/>";
    os << "<text x=\"" << lx + 15 << "\" y=\"" << ly << "\" font-size=\"10\" font-family=\"monospace\">"
       << (sp > 0 ? "+" : "") << sp << "</text>\n";
    lx += 40;
  }
  os << "<text x=\"" << lx << "\" y=\"" << ly << "\" font-size=\"10\" font-family=\"monospace\">"
     << "solid: concrete, dashed: symbolic, time increases upward</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string render(const Diagram& d) {
  return d.spec.style == RenderSpec::Style::Svg ? render_svg(d) : render_ascii(d);
}

}  // namespace puca
