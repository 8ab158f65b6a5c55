#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "puca/circuit.hpp"
#include "puca/gadget_synth.hpp"
#include "puca/plan_io.hpp"
#include "puca/render.hpp"
#include "puca/verify.hpp"

using namespace puca;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kParse = 2, kSynthesis = 3, kUsage = 64 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to stdout when path is empty or "-".  Returns false on I/O failure.
bool emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

std::string block_string(std::uint64_t p, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += cell_to_string(Cell(static_cast<std::uint8_t>((p >> (4 * i)) & 0xF)));
  }
  return s;
}

BlockFunction load_function(const std::string& builtin, const std::string& circuit, int n) {
  if (!circuit.empty()) {
    Netlist net = parse_netlist(slurp(circuit));
    try {
      return BlockFunction::from_netlist(n, std::move(net), circuit);
    } catch (const std::invalid_argument& e) {
      throw InputError(circuit + ": " + e.what());
    }
  }
  return BlockFunction::builtin(builtin, n);
}

struct Common {
  std::string format = "text";
  bool json() const { return format == "json"; }
};

struct WindowArgs {
  Time t_min = 0, t_max = 20;
  Coord x_min = -20, x_max = 20;
  bool svg = false, formulas = false, no_crossings = false;
  std::string out;

  void add(CLI::App* c) {
    c->add_option("--t-min", t_min, "first time step");
    c->add_option("--t-max", t_max, "last time step");
    c->add_option("--x-min", x_min, "leftmost cell");
    c->add_option("--x-max", x_max, "rightmost cell");
    c->add_flag("--svg", svg, "SVG instead of ASCII");
    c->add_flag("--formulas", formulas, "list labels of symbolic particles");
    c->add_flag("--no-crossings", no_crossings, "do not mark crossings and collisions");
    c->add_option("-o,--output", out, "output file (default stdout)");
  }
  RenderSpec spec(RenderSpec::Mode mode) const {
    RenderSpec s;
    s.t_min = t_min;
    s.t_max = t_max;
    s.x_min = x_min;
    s.x_max = x_max;
    s.mode = mode;
    s.style = svg ? RenderSpec::Style::Svg : RenderSpec::Style::Ascii;
    s.show_formulas = formulas;
    s.show_crossings = !no_crossings;
    return s;
  }
};

json marks_json(const Diagram& d) {
  json a = json::array();
  for (const auto& m : d.marks) {
    json j = {{"x", m.x}, {"t", m.t}, {"s", m.speed}};
    if (m.symbolic) j["label"] = m.label;
    a.push_back(j);
  }
  return a;
}

int output_diagram(const Common& g, const WindowArgs& w, const Diagram& d) {
  const std::string text = g.json() ? json{{"marks", marks_json(d)}}.dump(1) + "\n" : render(d);
  if (!emit(w.out, text)) {
    std::cerr << "error: cannot write " << w.out << '\n';
    return kVerifyFailed;
  }
  return kOk;
}

LogicalConfiguration with_block(const LogicalConfiguration& x, int general) {
  if (general <= 0) return x;
  LogicalConfiguration out = fully_general(general);
  for (const auto& [pos, c] : x.cells()) {
    if (pos >= 0 && pos < general) throw InputError("configuration overlaps the general block");
    out.set(pos, c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"puca: particle universality cellular automaton tools"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Common g;
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"text", "json"}));

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a configuration and draw its spacetime diagram");
  std::string sim_file;
  Time steps = -1;
  bool logical = false;
  int general = 0;
  WindowArgs sim_w;
  sim->add_option("config", sim_file, "configuration file")->required();
  sim->add_option("--steps", steps, "number of steps (sets t-max)")->check(CLI::NonNegativeNumber);
  sim->add_flag("--logical", logical, "simulate with Boolean formulas");
  sim->add_option("--general", general, "prepend a fully general block of this many cells (implies --logical)")
      ->check(CLI::Range(0, 16));
  sim_w.add(sim);

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "build a gadget for a block function");
  std::string syn_h, syn_circuit, syn_out;
  int syn_n = 1;
  SynthesisOptions syn_opt;
  bool verbose = false;
  auto* h_opt = syn->add_option("--h", syn_h, "builtin function name");
  auto* c_opt = syn->add_option("--circuit", syn_circuit, "NAND netlist file on 4n inputs");
  h_opt->excludes(c_opt);
  syn->add_option("--n", syn_n, "block size in cells")->check(CLI::Range(1, 8));
  syn->add_option("-o,--output", syn_out, "plan file to write");
  syn->add_option("--move-budget", syn_opt.move_budget, "particle budget per move");
  syn->add_option("--nand-budget", syn_opt.nand_budget, "particle budget per gate");
  syn->add_option("--retries", syn_opt.max_retries, "retries per stage");
  syn->add_flag("-v,--verbose", verbose, "log progress to stderr");

  // verify
  auto* ver = app.add_subcommand("verify", "check a plan against a block function");
  std::string ver_plan, ver_h, ver_circuit, ver_mode = "exhaustive";
  VerifyOptions ver_opt;
  ver->add_option("plan", ver_plan, "plan file")->required();
  auto* vh = ver->add_option("--h", ver_h, "builtin function name");
  auto* vc = ver->add_option("--circuit", ver_circuit, "NAND netlist file");
  vh->excludes(vc);
  ver->add_option("--mode", ver_mode, "exhaustive, sample or symbolic")
      ->check(CLI::IsMember({"exhaustive", "sample", "symbolic"}));
  ver->add_option("--samples", ver_opt.samples, "patterns in sample mode")->check(CLI::PositiveNumber);
  ver->add_option("--seed", ver_opt.seed, "sampling seed");

  // render-plan
  auto* rp = app.add_subcommand("render-plan", "draw the diagram of a plan on the fully general block");
  std::string rp_plan;
  std::string rp_pattern;
  WindowArgs rp_w;
  rp->add_option("plan", rp_plan, "plan file")->required();
  rp->add_option("--pattern", rp_pattern, "concrete block pattern as cell bits, e.g. 1011 or \"1011 0001\"");
  rp_w.add(rp);

  // census
  auto* cen = app.add_subcommand("census", "count Boolean particles, crossings and collisions");
  std::string cen_file;
  int cen_general = 0;
  Time cen_tmin = 0, cen_tmax = 20;
  bool cen_list = false;
  cen->add_option("config", cen_file, "configuration file (use - for none)")->required();
  cen->add_option("--general", cen_general, "prepend a fully general block of this many cells")
      ->check(CLI::Range(0, 16));
  cen->add_option("--t-min", cen_tmin, "first time");
  cen->add_option("--t-max", cen_tmax, "last time");
  cen->add_flag("--list", cen_list, "list crossings and collisions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) {
      if (steps >= 0) sim_w.t_max = sim_w.t_min + steps;
      const Configuration x = parse_configuration(slurp(sim_file));
      const bool lg = logical || general > 0;
      const RenderSpec spec = sim_w.spec(lg ? RenderSpec::Mode::Logical : RenderSpec::Mode::Concrete);
      spec.validate();
      const Diagram d = lg ? make_diagram(with_block(embed(x), general), spec) : make_diagram(x, spec);
      return output_diagram(g, sim_w, d);
    }

    if (*syn) {
      if (syn_h.empty() && syn_circuit.empty()) {
        std::cerr << "error: one of --h or --circuit is required\n";
        return kUsage;
      }
      const BlockFunction h = load_function(syn_h, syn_circuit, syn_n);
      if (verbose) syn_opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
      const auto t0 = std::chrono::steady_clock::now();
      GadgetPlan plan;
      try {
        plan = synthesize(h, syn_opt);
      } catch (const StageFailure& e) {
        if (g.json())
          std::cout << json{{"ok", false}, {"stage", e.stage()}, {"retries", e.retries()}, {"error", e.what()},
                            {"condition", e.last().condition}, {"detail", e.last().detail}}
                           .dump(1)
                    << '\n';
        else
          std::cerr << "synthesis failed: " << e.what() << "\n  last rejection: condition " << e.last().condition
                    << ": " << e.last().detail << '\n';
        return kSynthesis;
      } catch (const SynthesisError& e) {
        std::cerr << "synthesis failed: " << e.what() << '\n';
        return kSynthesis;
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!syn_out.empty() && !emit(syn_out, write_plan(plan))) {
        std::cerr << "error: cannot write " << syn_out << '\n';
        return kVerifyFailed;
      }
      if (g.json()) {
        json stages = json::array();
        for (const auto& s : plan.stages)
          stages.push_back({{"name", s.name}, {"start", s.start}, {"end", s.end}, {"particles", s.particles},
                            {"modifications", s.modifications}, {"retries", s.retries}});
        std::cout << json{{"ok", true},
                          {"function", plan.function},
                          {"n", plan.n},
                          {"t_final", plan.t_final},
                          {"particles", plan.particles.size()},
                          {"gates", plan.gates},
                          {"function_gates", plan.function_gates},
                          {"seconds", secs},
                          {"stages", stages}}
                         .dump(1)
                  << '\n';
      } else {
        std::cout << "function " << plan.function << " n=" << plan.n << '\n';
        std::cout << "t_final " << plan.t_final << '\n';
        std::cout << "particles " << plan.particles.size() << '\n';
        std::cout << "gates " << plan.gates << " (function " << plan.function_gates << ")\n";
        for (const auto& s : plan.stages)
          std::cout << "stage " << s.name << " [" << s.start << ", " << s.end << "] particles " << s.particles
                    << " modifications " << s.modifications << " retries " << s.retries << '\n';
        if (!syn_out.empty()) std::cout << "plan written to " << syn_out << '\n';
      }
      return kOk;
    }

    if (*ver) {
      const GadgetPlan plan = read_plan(slurp(ver_plan));
      std::string name = ver_h.empty() ? plan.function : ver_h;
      if (name.empty() && ver_circuit.empty()) {
        std::cerr << "error: the plan names no function; pass --h or --circuit\n";
        return kUsage;
      }
      std::string circuit = ver_circuit;
      if (circuit.empty() && ver_h.empty()) {
        const auto names = BlockFunction::builtin_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          // plans synthesized from --circuit record the netlist path
          if (!std::filesystem::exists(name)) {
            std::cerr << "error: plan function '" << name << "' is not a builtin; pass --h or --circuit\n";
            return kUsage;
          }
          circuit = name;
        }
      }
      const BlockFunction h = load_function(name, circuit, plan.n);
      if (ver_mode == "symbolic") {
        ver_opt.concrete = VerifyOptions::Concrete::Off;
      } else {
        ver_opt.symbolic = false;
        ver_opt.concrete = ver_mode == "sample" ? VerifyOptions::Concrete::Sample : VerifyOptions::Concrete::Exhaustive;
      }
      const VerificationReport r = verify_plan(plan, h, ver_opt);
      const std::size_t passed = r.patterns.size() - r.failed_patterns();
      if (g.json()) {
        json j = {{"ok", r.ok()}, {"mode", ver_mode}, {"n", r.n}, {"t_final", r.t_final}, {"particles", r.particles}};
        if (r.symbolic_checked) j["symbolic"] = r.symbolic_ok;
        if (r.concrete_checked) {
          j["sampled"] = r.sampled;
          j["patterns_checked"] = r.patterns.size();
          j["patterns_passed"] = passed;
          json ps = json::array();
          for (const auto& p : r.patterns)
            ps.push_back({{"pattern", block_string(p.pattern, r.n)},
                          {"expected", block_string(p.expected, r.n)},
                          {"got", block_string(p.got, r.n)},
                          {"ok", p.ok()}});
          j["results"] = ps;
        }
        if (r.counterexample) {
          const auto& c = *r.counterexample;
          j["counterexample"] = {{"check", c.check}, {"pattern", block_string(c.pattern, r.n)}, {"cell", c.cell},
                                 {"expected", c.expected}, {"got", c.got}};
        }
        std::cout << j.dump(1) << '\n';
      } else {
        for (const auto& p : r.patterns)
          std::cout << "pattern " << block_string(p.pattern, r.n) << " expected " << block_string(p.expected, r.n)
                    << " got " << block_string(p.got, r.n) << (p.ok() ? " ok" : " FAIL") << '\n';
        if (r.symbolic_checked) std::cout << "symbolic " << (r.symbolic_ok ? "ok" : "FAIL") << '\n';
        if (r.concrete_checked)
          std::cout << passed << '/' << r.patterns.size() << " patterns pass" << (r.sampled ? " (sampled)" : "")
                    << '\n';
        if (r.counterexample) {
          const auto& c = *r.counterexample;
          std::cout << "counterexample (" << c.check << "): pattern " << block_string(c.pattern, r.n) << " cell "
                    << c.cell << " expected " << c.expected << " got " << c.got << '\n';
        }
      }
      return r.ok() ? kOk : kVerifyFailed;
    }

    if (*rp) {
      const GadgetPlan plan = read_plan(slurp(rp_plan));
      const Configuration gadget = plan.gadget();
      if (!rp->count("--x-min")) rp_w.x_min = std::min<Coord>(gadget.empty() ? 0 : gadget.min_coord(), 0) - 2;
      if (!rp->count("--x-max"))
        rp_w.x_max = std::max<Coord>(gadget.empty() ? 0 : gadget.max_coord(), plan.n - 1) + 2;
      if (!rp->count("--t-max")) rp_w.t_max = std::min<Time>(plan.t_final, rp_w.t_min + 200);
      if (rp_pattern.empty()) {
        LogicalConfiguration x = fully_general(plan.n);
        for (const auto& p : plan.particles) x.set_track(p.x, p.speed, Formula::one());
        return output_diagram(g, rp_w, make_diagram(x, rp_w.spec(RenderSpec::Mode::Logical)));
      }
      std::istringstream ps(rp_pattern);
      std::string cellw;
      Configuration x = gadget;
      int i = 0;
      while (ps >> cellw) {
        if (i >= plan.n) throw InputError("pattern has more than " + std::to_string(plan.n) + " cells");
        try {
          x.set(i++, cell_from_string(cellw));
        } catch (const std::invalid_argument& e) {
          throw InputError("bad pattern cell '" + cellw + "'");
        }
      }
      if (i != plan.n) throw InputError("pattern needs " + std::to_string(plan.n) + " cells");
      return output_diagram(g, rp_w, make_diagram(x, rp_w.spec(RenderSpec::Mode::Concrete)));
    }

    if (*cen) {
      LogicalConfiguration x;
      if (cen_file != "-") x = embed(parse_configuration(slurp(cen_file)));
      x = with_block(x, cen_general);
      if (cen_tmax < cen_tmin) {
        std::cerr << "error: empty time range\n";
        return kUsage;
      }
      const Census c = census(x, cen_tmin, cen_tmax);
      if (g.json()) {
        auto pts = [](const std::vector<CensusPoint>& v) {
          json a = json::array();
          for (const auto& p : v) a.push_back({{"x", p.x}, {"t", p.t}, {"count", p.count}});
          return a;
        };
        json j = {{"t_min", cen_tmin},
                  {"t_max", cen_tmax},
                  {"particles", c.particles.size()},
                  {"crossings", c.crossings.size()},
                  {"collisions", c.collisions.size()}};
        if (cen_list) {
          j["crossing_points"] = pts(c.crossings);
          j["collision_points"] = pts(c.collisions);
        }
        std::cout << j.dump(1) << '\n';
      } else {
        std::cout << "window [" << cen_tmin << ", " << cen_tmax << "]\n";
        std::cout << "particle records " << c.particles.size() << '\n';
        std::cout << "crossings " << c.crossings.size() << '\n';
        std::cout << "collisions " << c.collisions.size() << '\n';
        if (cen_list) {
          for (const auto& p : c.crossings) std::cout << "crossing " << p.x << ' ' << p.t << ' ' << p.count << '\n';
          for (const auto& p : c.collisions) std::cout << "collision " << p.x << ' ' << p.t << ' ' << p.count << '\n';
        }
      }
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kUsage;
}
