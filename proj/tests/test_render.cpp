#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "puca/render.hpp"

using namespace puca;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Configuration collision_example() {
  Configuration x;
  x.set(0, cell_from_string("1000"));
  x.set(1, cell_from_string("0100"));
  x.set(4, cell_from_string("0001"));
  return x;
}

std::vector<std::string> rows_of(const std::string& ascii) {
  std::vector<std::string> rows;
  std::istringstream in(ascii);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line.substr(line.find('|') + 1));
  return rows;
}

// (x, t) -> speeds, read back from the SVG particle segments.
std::map<std::pair<Coord, Time>, std::set<int>> svg_marks(const std::string& svg) {
  std::map<std::pair<Coord, Time>, std::set<int>> out;
  const std::regex re("class=\"p\" data-x=\"(-?\\d+)\" data-t=\"(-?\\d+)\" data-s=\"(-?\\d+)\"");
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it)
    out[{std::stoll((*it)[1]), std::stoll((*it)[2])}].insert(std::stoi((*it)[3]));
  return out;
}

void check_agreement(const Diagram& d) {
  const auto rows = rows_of(render_ascii(d));
  const auto marks = svg_marks(render_svg(d));
  const RenderSpec& s = d.spec;
  REQUIRE(rows.size() == static_cast<std::size_t>(s.t_max - s.t_min + 1));
  for (Time t = s.t_min; t <= s.t_max; ++t)
    for (Coord x = s.x_min; x <= s.x_max; ++x) {
      const char c = rows[static_cast<std::size_t>(t - s.t_min)][static_cast<std::size_t>(x - s.x_min)];
      auto it = marks.find({x, t});
      char want = '.';
      if (it != marks.end()) {
        const auto& sp = it->second;
        want = sp.size() == 1 ? ascii_mark(*sp.begin()) : sp.size() == 2 ? 'X' : '*';
      }
      CHECK_MESSAGE(c == want, "x=" << x << " t=" << t);
    }
}

}  // namespace

TEST_CASE("a lone +2 particle draws a diagonal two cells per row") {
  Configuration x;
  x.add_particle(0, 2);
  RenderSpec s;
  s.t_min = 0;
  s.t_max = 5;
  s.x_min = 0;
  s.x_max = 11;
  const auto rows = rows_of(render_ascii(make_diagram(x, s)));
  REQUIRE(rows.size() == 6);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    CHECK(rows[t].find('R') == 2 * t);
    CHECK(std::count(rows[t].begin(), rows[t].end(), 'R') == 1);
  }
}

TEST_CASE("the three particle collision gets exactly one collision marker") {
  RenderSpec s;
  s.t_min = 0;
  s.t_max = 6;
  s.x_min = -6;
  s.x_max = 10;
  const Diagram d = make_diagram(collision_example(), s);
  const std::string a = render_ascii(d);
  CHECK(std::count(a.begin(), a.end(), '*') == 2);  // one in the legend
  CHECK(rows_of(a)[1][static_cast<std::size_t>(2 - s.x_min)] == '*');
  const std::string svg = render_svg(d);
  std::size_t n = 0;
  for (auto p = svg.find("class=\"collision\""); p != std::string::npos; p = svg.find("class=\"collision\"", p + 1)) ++n;
  CHECK(n == 1);
}

TEST_CASE("svg of the collision example matches the golden file") {
  RenderSpec s;
  s.t_min = 0;
  s.t_max = 6;
  s.x_min = -6;
  s.x_max = 10;
  s.style = RenderSpec::Style::Svg;
  const std::string golden = read_file(std::string(PUCA_TEST_DATA) + "/collision.svg");
  REQUIRE(!golden.empty());
  CHECK(render(make_diagram(collision_example(), s)) == golden);
}

TEST_CASE("rendering is deterministic") {
  std::mt19937_64 rng(7);
  Configuration x;
  for (int i = 0; i < 20; ++i) x.set(static_cast<Coord>(rng() % 30), Cell(static_cast<std::uint8_t>(rng() % 16)));
  RenderSpec s;
  s.t_max = 15;
  s.x_min = -10;
  s.x_max = 40;
  const Diagram a = make_diagram(x, s), b = make_diagram(x, s);
  CHECK(render_svg(a) == render_svg(b));
  CHECK(render_ascii(a) == render_ascii(b));
}

TEST_CASE("ascii and svg agree on every mark") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    Configuration x;
    for (int i = 0; i < 12; ++i) x.set(static_cast<Coord>(rng() % 24), Cell(static_cast<std::uint8_t>(rng() % 16)));
    RenderSpec s;
    s.t_min = -3;
    s.t_max = 12;
    s.x_min = -8;
    s.x_max = 32;
    check_agreement(make_diagram(x, s));
  }
  RenderSpec s;
  s.t_max = 6;
  s.x_min = -14;
  s.x_max = 16;
  check_agreement(make_diagram(fully_general(2), s));
}

TEST_CASE("symbolic particles are dashed and carry labels on request") {
  RenderSpec s;
  s.t_max = 3;
  s.x_min = -8;
  s.x_max = 8;
  s.show_formulas = true;
  LogicalConfiguration x = fully_general(1);
  x.set_track(-3, 2, Formula::one());
  const Diagram d = make_diagram(x, s);
  const std::string svg = render_svg(d);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("<title>") != std::string::npos);
  std::size_t solid = 0;
  for (const auto& m : d.marks)
    if (!m.symbolic) ++solid;
  CHECK(solid >= 4);  // the constant particle, once per row
  CHECK(render_ascii(d).find("# labels") != std::string::npos);
}

TEST_CASE("hidden crossings print as o and draw no markers") {
  RenderSpec s;
  s.t_max = 3;
  s.x_min = -4;
  s.x_max = 8;
  s.show_crossings = false;
  const Diagram d = make_diagram(collision_example(), s);
  CHECK(rows_of(render_ascii(d))[1][6] == 'o');
  CHECK(render_svg(d).find("<circle") == std::string::npos);
}

TEST_CASE("empty ranges are rejected") {
  RenderSpec s;
  s.t_min = 3;
  s.t_max = 2;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.t_max = 3;
  s.x_min = 1;
  s.x_max = 0;
  CHECK_THROWS_AS(make_diagram(Configuration{}, s), std::invalid_argument);
}
