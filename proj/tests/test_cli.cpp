#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cosym/cosym.hpp"

using namespace cosym;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

// Runs the CLI with stderr folded into stdout.
Outcome cli(const std::string& args) {
  const std::string cmd = std::string("\"") + COSYM_CLI_PATH + "\" " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) o.output.append(buf, got);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path temp_file(const std::string& stem) {
  return fs::temp_directory_path() / ("cosym_cli_test_" + std::to_string(::getpid()) + "_" + stem);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> manifest_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(COSYM_MANIFEST_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("every shipped manifest meets its expectations", "[cli]") {
  const auto files = manifest_files();
  REQUIRE(files.size() >= 7);
  for (const auto& f : files) {
    const Outcome o = cli("check \"" + f.string() + "\" --samples 64 --quiet");
    INFO(f.filename().string() << "\n" << o.output);
    CHECK(o.code == 0);
  }
  const Outcome o = cli("check \"" + (fs::path(COSYM_MANIFEST_DIR) / "cotangent_s1.json").string() +
                        "\" --samples 256 --seed 7 --tol 1e-9");
  INFO(o.output);
  CHECK(o.code == 0);
  CHECK(o.output.find("checks matched their expectation") != std::string::npos);
}

TEST_CASE("shipped manifests are the gallery built-ins", "[cli]") {
  for (const auto& f : manifest_files()) {
    const std::string name = f.stem().string();
    INFO(name);
    CHECK(read_manifest_json(f.string()) == gallery_manifest(name));
  }
}

TEST_CASE("built-ins run from the gallery", "[cli]") {
  const Outcome list = cli("examples list");
  CHECK(list.code == 0);
  std::size_t listed = 0;
  for (const auto& e : gallery()) {
    if (list.output.find(e.name) != std::string::npos) ++listed;
  }
  CHECK(listed == gallery().size());
  CHECK(listed >= 7);

  CHECK(cli("examples run cotangent_s1 --n 2 --k 1 --samples 32 --quiet").code == 0);
  CHECK(cli("examples run cotangent_s1 --n 3 --k 2 --samples 32 --quiet").code == 0);

  // The counterexample exits 0 because its declared verdict is a failure.
  const Outcome pq = cli("examples run poisson_quotient_counterexample --n 2 --k 1 --samples 32");
  INFO(pq.output);
  CHECK(pq.code == 0);
  CHECK(pq.output.find("FAIL quotient is cosymplectic") != std::string::npos);
  CHECK(pq.output.find("dim(G/G) = 2 dim(M/G) + 1") != std::string::npos);
}

TEST_CASE("usage and manifest errors exit 2", "[cli][errors]") {
  const fs::path bad = temp_file("bad.json");
  write(bad, "{\n  \"charts\": {\n    \"Q\": [1, 2,\n}\n");
  const Outcome o = cli("check \"" + bad.string() + "\"");
  CHECK(o.code == 2);
  CHECK(o.output.find("line 4, column 1") != std::string::npos);

  auto j = gallery_manifest("symplectization");
  j["checks"][0]["structure"] = "nowhere";
  const fs::path dangling = temp_file("dangling.json");
  write(dangling, j.dump());
  const Outcome d = cli("check \"" + dangling.string() + "\"");
  CHECK(d.code == 2);
  CHECK(d.output.find("unresolved reference \"nowhere\"") != std::string::npos);

  auto k = gallery_manifest("averaging");
  k["forms"]["eta"]["terms"]["dtheta"] = "1 + cos(";
  write(dangling, k.dump());
  CHECK(cli("check \"" + dangling.string() + "\"").code == 2);

  CHECK(cli("check \"" + temp_file("missing.json").string() + "\"").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("examples run nosuch").code == 2);
  CHECK(cli("examples run cotangent_s1 --n 1").code == 2);
  CHECK(cli("examples run cotangent_s1 --mutate tangent_field").code == 2);
  CHECK(cli("check x.json --samples 0").code == 2);
  fs::remove(bad);
  fs::remove(dangling);
}

TEST_CASE("each mutation exits 1 with the named stage failing", "[cli][mutation]") {
  const fs::path report = temp_file("mutation.json");
  for (const auto& m : mutations()) {
    const Outcome o = cli("examples run " + m.entry + " --mutate " + m.name + " --samples 32 --quiet --report \"" +
                          report.string() + "\"");
    INFO(m.name << "\n" << o.output);
    CHECK(o.code == 1);
    const RunReport r = nlohmann::json::parse(slurp(report)).get<RunReport>();
    bool named = false;
    for (const auto& c : r.checks)
      for (const auto& f : c.report.failing())
        if ((c.name + "/" + f).find(m.stage) != std::string::npos) named = true;
    CHECK(named);
  }
  fs::remove(report);
}

TEST_CASE("reports round-trip and are reproducible", "[cli][report]") {
  for (const std::string name : {"cotangent_s1", "hypersurface", "averaging"}) {
    const Manifest m = load_manifest(gallery_manifest(name));
    const RunReport r = run_manifest(m, RunOptions{Sampling{32, 9}, Tolerances{}});
    const nlohmann::json j = r;
    const RunReport back = j.get<RunReport>();
    INFO(name);
    CHECK(back.checks == r.checks);
    CHECK(back.schema_version == kReportSchemaVersion);
    CHECK(back.sampling.seed == 9);
    CHECK(nlohmann::json(back).dump() == j.dump());
  }
  // Error entries survive the trip too.
  const Manifest tangent = load_manifest(gallery_manifest("hypersurface", 2, 1, "tangent_field"));
  const RunReport r = run_manifest(tangent, RunOptions{Sampling{16, 1}, Tolerances{}});
  CHECK(nlohmann::json(r).get<RunReport>().checks == r.checks);

  const fs::path a = temp_file("a.json"), b = temp_file("b.json");
  const std::string args = "examples run cotangent_s1 --samples 32 --seed 5 --quiet --report ";
  REQUIRE(cli(args + "\"" + a.string() + "\"").code == 0);
  REQUIRE(cli(args + "\"" + b.string() + "\"").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(nlohmann::json::parse(slurp(a)).at("schema_version") == kReportSchemaVersion);
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("every listed check kind is dispatched", "[cli]") {
  for (const auto& kind : check_kinds()) {
    Manifest m;
    m.name = "probe";
    m.checks.push_back(CheckDirective{kind, kind, true, nlohmann::json::object()});
    INFO(kind);
    // Reaches the handler, which then complains about its missing arguments.
    try {
      run_manifest(m, RunOptions{});
      FAIL("expected a manifest error");
    } catch (const ManifestError& e) {
      CHECK(std::string(e.what()).find("unknown check kind") == std::string::npos);
    }
  }
  Manifest m;
  m.checks.push_back(CheckDirective{"bogus", "bogus", true, nlohmann::json::object()});
  CHECK_THROWS_WITH(run_manifest(m, RunOptions{}), Catch::Matchers::ContainsSubstring("unknown check kind"));
}
