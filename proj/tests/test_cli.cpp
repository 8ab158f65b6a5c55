#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result puca(const std::string& args) {
  const std::string cmd = std::string(PUCA_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("puca_cli_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string data(const std::string& name) { return std::string(PUCA_TEST_DATA) + "/" + name; }

std::string write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// identity plan shared by the verify and render cases
const std::string& identity_plan() {
  static const std::string path = [] {
    const std::string p = (scratch() / "id1.plan").string();
    const Result r = puca("synthesize --h identity --n 1 -o " + p);
    REQUIRE(r.code == 0);
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("simulate draws the collision example") {
  const Result r = puca("simulate " + data("collision.cfg") + " --steps 4 --x-min -4 --x-max 8");
  CHECK(r.code == 0);
  // one marker in the legend, one in the diagram
  CHECK(std::count(r.out.begin(), r.out.end(), '*') == 2);
}

TEST_CASE("simulate reproduces the golden svg") {
  const Result r = puca("simulate " + data("collision.cfg") + " --t-max 6 --x-min -6 --x-max 10 --svg");
  CHECK(r.code == 0);
  CHECK(r.out == slurp(data("collision.svg")));
}

TEST_CASE("simulate reports parse errors with exit 2") {
  CHECK(puca("simulate " + write("bad.cfg", "0 10x1\n")).code == 2);
  CHECK(puca("simulate " + (scratch() / "missing.cfg").string()).code == 2);
}

TEST_CASE("simulate fails with 1 when the output cannot be written") {
  CHECK(puca("simulate " + data("collision.cfg") + " -o /nonexistent/dir/out.txt").code == 1);
}

TEST_CASE("usage errors exit 64") {
  CHECK(puca("synthesize --h identity --n 0").code == 64);
  CHECK(puca("frobnicate").code == 64);
  CHECK(puca("").code == 64);
  CHECK(puca("--format yaml census -").code == 64);
}

TEST_CASE("synthesize prints t_final") {
  const Result r = puca("synthesize --h identity --n 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("t_final ") != std::string::npos);
}

TEST_CASE("malformed circuit exits 2") {
  CHECK(puca("synthesize --circuit " + write("bad.net", "inputs 4\ngate g = nand i0 q\n") + " --n 1").code == 2);
  CHECK(puca("synthesize --circuit " + write("short.net", "inputs 4\ngate g = nand in0 in1\noutputs g\n") + " --n 1")
            .code == 2);
}

TEST_CASE("an impossible budget is a synthesis failure") {
  const Result r = puca("synthesize --h identity --n 1 --move-budget 1 --retries 0");
  CHECK(r.code == 3);
}

TEST_CASE("verify a fresh identity plan") {
  const Result r = puca("verify " + identity_plan());
  CHECK(r.code == 0);
  CHECK(r.out.find("16/16 patterns pass") != std::string::npos);
  std::size_t lines = 0;
  for (std::size_t p = r.out.find("pattern "); p != std::string::npos; p = r.out.find("\npattern ", p + 1)) ++lines;
  CHECK(lines == 16);
  CHECK(puca("verify " + identity_plan() + " --mode symbolic").code == 0);
  CHECK(puca("verify " + identity_plan() + " --mode sample --samples 20").code == 0);
}

TEST_CASE("verify reports json") {
  const Result r = puca("--format json verify " + identity_plan());
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["ok"] == true);
  CHECK(j["patterns_passed"] == 16);
  CHECK(j["results"].size() == 16);
}

TEST_CASE("verify a mutated plan") {
  std::string text = slurp(identity_plan());
  // clear one particle bit in the last cell line and fix the count
  const auto nl = text.rfind('\n', text.size() - 2);
  std::string last = text.substr(nl + 1);
  const auto bit = last.rfind('1');
  REQUIRE(bit != std::string::npos);
  last[bit] = '0';
  if (last.find('1', last.find(' ')) == std::string::npos) last.clear();
  text = text.substr(0, nl + 1) + last;
  const auto cp = text.find("particles ");
  const auto ce = text.find('\n', cp);
  const int count = std::stoi(text.substr(cp + 10, ce - cp - 10));
  text.replace(cp, ce - cp, "particles " + std::to_string(count - 1));
  const Result r = puca("verify " + write("mutated.plan", text));
  CHECK(r.code == 1);
  CHECK(r.out.find("counterexample") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("verify rejects a broken plan file with exit 2") {
  CHECK(puca("verify " + write("broken.plan", "# puca gadget plan\nversion 1\nn x\n")).code == 2);
}

TEST_CASE("render-plan draws the gadget") {
  const Result r = puca("render-plan " + identity_plan() + " --svg --t-max 30");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("<svg", 0) == 0);
  CHECK(r.out.find("stroke-dasharray") != std::string::npos);
  const Result c = puca("render-plan " + identity_plan() + " --pattern 1011 --t-max 10");
  CHECK(c.code == 0);
  CHECK(c.out.find("time increases downward") != std::string::npos);
  CHECK(puca("render-plan " + identity_plan() + " --pattern 10x1").code == 2);
}

TEST_CASE("census of the general block") {
  const Result r = puca("--format json census - --general 4 --t-min 2 --t-max 30");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["collisions"] == 0);
  const Result t = puca("census " + data("collision.cfg") + " --t-max 3 --list");
  CHECK(t.code == 0);
  CHECK(t.out.find("collision 2 1") != std::string::npos);
}

TEST_CASE("a plan built from a circuit file verifies without repeating it") {
  const std::string net = write("gates.net", "inputs 4\ngate a = nand in0 in1\noutputs a in1 in2 in3\n");
  const std::string plan = (scratch() / "gates.plan").string();
  REQUIRE(puca("synthesize --circuit " + net + " --n 1 -o " + plan).code == 0);
  CHECK(puca("verify " + plan).code == 0);
  std::string text = slurp(plan);
  const auto f = text.find("function ");
  text.replace(f, text.find('\n', f) - f, "function " + (scratch() / "gone.net").string());
  CHECK(puca("verify " + write("orphan.plan", text)).code == 64);
}
