#include "puca/plan_io.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <sstream>
#include <vector>

namespace puca {

namespace {

constexpr std::string_view kMagic = "# puca gadget plan";
constexpr int kVersion = 1;

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T number(std::string_view w, int line) {
  T v{};
  auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || p != w.data() + w.size())
    throw ParseError(line, "expected a number, got '" + std::string(w) + "'");
  return v;
}

}  // namespace

std::string write_plan(const GadgetPlan& plan) {
  std::ostringstream os;
  os << kMagic << '\n';
  os << "version " << kVersion << '\n';
  os << "n " << plan.n << '\n';
  os << "function " << (plan.function.empty() ? "-" : plan.function) << '\n';
  os << "stage_times " << plan.t_dis << ' ' << plan.t_coll << ' ' << plan.t_comp << ' ' << plan.t_ass << ' '
     << plan.t_final << '\n';
  os << "t_back " << plan.t_back << '\n';
  os << "gates " << plan.gates << '\n';
  os << "collected " << plan.collected << '\n';
  os << "assembled " << plan.assembled << '\n';
  os << "function_gates " << plan.function_gates << '\n';
  os << "ledger " << plan.crossings << ' ' << plan.collisions << ' ' << plan.occupied_lines << '\n';
  for (const auto& s : plan.stages)
    os << "stage " << s.name << ' ' << s.start << ' ' << s.end << ' ' << s.modifications << ' ' << s.particles << ' '
       << s.retries << ' ' << s.counts.crossings << ' ' << s.counts.occupied_lines << ' ' << s.counts.protected_lines
       << ' ' << s.counts.particles << '\n';
  os << "particles " << plan.particles.size() << '\n';
  os << serialize(plan.gadget());
  return os.str();
}

GadgetPlan read_plan(std::string_view text) {
  GadgetPlan plan;
  int line_no = 0;
  std::size_t pos = 0;
  bool have_version = false, have_n = false, have_times = false;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return l;
  };

  auto first = next_line();
  if (!first || words(*first) != words(kMagic)) throw ParseError(1, "missing plan header");
  std::size_t expected = 0;
  for (;;) {
    auto l = next_line();
    if (!l) throw ParseError(line_no, "missing particles section");
    const auto w = words(*l);
    if (w.empty() || w[0].front() == '#') continue;
    const std::string_view key = w[0];
    auto need = [&](std::size_t k) {
      if (w.size() != k + 1)
        throw ParseError(line_no, "'" + std::string(key) + "' takes " + std::to_string(k) + " value(s)");
    };
    if (key == "version") {
      need(1);
      if (number<int>(w[1], line_no) != kVersion) throw ParseError(line_no, "unsupported plan version");
      have_version = true;
    } else if (key == "n") {
      need(1);
      plan.n = number<int>(w[1], line_no);
      if (plan.n < 1) throw ParseError(line_no, "n must be positive");
      have_n = true;
    } else if (key == "function") {
      need(1);
      plan.function = w[1] == "-" ? std::string() : std::string(w[1]);
    } else if (key == "stage_times") {
      need(5);
      plan.t_dis = number<Time>(w[1], line_no);
      plan.t_coll = number<Time>(w[2], line_no);
      plan.t_comp = number<Time>(w[3], line_no);
      plan.t_ass = number<Time>(w[4], line_no);
      plan.t_final = number<Time>(w[5], line_no);
      if (plan.t_final < 0) throw ParseError(line_no, "t_final must not be negative");
      have_times = true;
    } else if (key == "t_back") {
      need(1);
      plan.t_back = number<Time>(w[1], line_no);
    } else if (key == "gates") {
      need(1);
      plan.gates = number<std::size_t>(w[1], line_no);
    } else if (key == "collected") {
      need(1);
      plan.collected = number<std::size_t>(w[1], line_no);
    } else if (key == "assembled") {
      need(1);
      plan.assembled = number<std::size_t>(w[1], line_no);
    } else if (key == "function_gates") {
      need(1);
      plan.function_gates = number<std::size_t>(w[1], line_no);
    } else if (key == "ledger") {
      need(3);
      plan.crossings = number<std::size_t>(w[1], line_no);
      plan.collisions = number<std::size_t>(w[2], line_no);
      plan.occupied_lines = number<std::size_t>(w[3], line_no);
    } else if (key == "stage") {
      need(10);
      StageReport s;
      s.name = std::string(w[1]);
      s.start = number<Time>(w[2], line_no);
      s.end = number<Time>(w[3], line_no);
      s.modifications = number<std::size_t>(w[4], line_no);
      s.particles = number<std::size_t>(w[5], line_no);
      s.retries = number<std::size_t>(w[6], line_no);
      s.counts.crossings = number<std::size_t>(w[7], line_no);
      s.counts.occupied_lines = number<std::size_t>(w[8], line_no);
      s.counts.protected_lines = number<std::size_t>(w[9], line_no);
      s.counts.particles = number<std::size_t>(w[10], line_no);
      plan.stages.push_back(std::move(s));
    } else if (key == "particles") {
      need(1);
      expected = number<std::size_t>(w[1], line_no);
      break;
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_version) throw ParseError(line_no, "missing version");
  if (!have_n) throw ParseError(line_no, "missing n");
  if (!have_times) throw ParseError(line_no, "missing stage_times");

  const int body_start = line_no;
  Configuration g;
  try {
    g = parse_configuration(pos < text.size() ? text.substr(pos) : std::string_view{});
  } catch (const ParseError& e) {
    throw ParseError(body_start + e.line(), std::string(e.what()).substr(std::string(e.what()).find(':') + 2));
  }
  for (const auto& [x, c] : g.cells()) {
    if (x >= 0 && x < plan.n) throw ParseError(body_start, "gadget particle inside the block at " + std::to_string(x));
    for (int k = 0; k < 4; ++k)
      if (c.has(k)) plan.particles.push_back({x, speed_of_track(k), Formula::one()});
  }
  if (plan.particles.size() != expected)
    throw ParseError(body_start, "expected " + std::to_string(expected) + " particles, found " +
                                     std::to_string(plan.particles.size()));
  std::sort(plan.particles.begin(), plan.particles.end());
  return plan;
}

}  // namespace puca
