// cosym_cli: run manifest checks and the built-in gallery.
//
//   cosym_cli check PATH [--samples N] [--seed S] [--tol T] [--report PATH] [--quiet]
//   cosym_cli examples list
//   cosym_cli examples run NAME [--n N] [--k K] [--mutate M] [flags as for check]
//   cosym_cli examples dump NAME [--n N] [--k K] [--mutate M]
//
// Exit status: 0 every check met its expectation, 1 some did not, 2 usage or
// manifest error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cosym/cosym.hpp"

namespace {

struct RunFlags {
  std::size_t samples = 128;
  std::uint64_t seed = 42;
  double tol = 1e-9;
  std::string report;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--samples", f.samples, "samples per check")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "sampling seed");
  cmd->add_option("--tol", f.tol, "tolerance for comparison checks")->check(CLI::PositiveNumber);
  cmd->add_option("--report", f.report, "write the JSON report here");
  cmd->add_flag("--quiet", f.quiet, "suppress the text summary");
}

int execute(const cosym::Manifest& m, const RunFlags& f) {
  cosym::RunOptions opt;
  opt.sampling.samples = f.samples;
  opt.sampling.seed = f.seed;
  opt.tol.tol = f.tol;
  const cosym::RunReport report = cosym::run_manifest(m, opt);
  if (!f.quiet) std::cout << cosym::summarize(report);
  if (!f.report.empty()) {
    std::ofstream out(f.report);
    if (!out) throw cosym::ManifestError("cannot write report " + f.report);
    out << nlohmann::json(report).dump(2) << "\n";
  }
  return report.exit_code();
}

void list_examples() {
  std::printf("%-34s %s\n", "NAME", "DESCRIPTION");
  for (const auto& e : cosym::gallery())
    std::printf("%-34s %s%s\n", e.name.c_str(), e.description.c_str(), e.parametrized ? " [--n --k]" : "");
  std::printf("\nmutations (--mutate):\n");
  for (const auto& m : cosym::mutations())
    std::printf("  %-30s on %-14s %s\n", m.name.c_str(), m.entry.c_str(), m.description.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify cosymplectic structures, groupoids and their reductions"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string path;
  auto* check = app.add_subcommand("check", "run the checks declared in a manifest");
  check->add_option("path", path, "manifest JSON")->required();
  add_run_flags(check, flags);

  auto* examples = app.add_subcommand("examples", "built-in geometries");
  examples->require_subcommand(1);
  examples->add_subcommand("list", "list built-ins and mutations");
  std::string name, mutation;
  int n = 2, k = 1;
  auto* run = examples->add_subcommand("run", "run a built-in");
  auto* dump = examples->add_subcommand("dump", "print a built-in as manifest JSON");
  for (auto* cmd : {run, dump}) {
    cmd->add_option("name", name, "built-in name")->required();
    cmd->add_option("--n", n, "base dimension");
    cmd->add_option("--k", k, "dimension kept by the reduction");
    cmd->add_option("--mutate", mutation, "corrupt the built-in");
  }
  add_run_flags(run, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return execute(cosym::load_manifest_file(path), flags);
    if (examples->got_subcommand("list")) {
      list_examples();
      return 0;
    }
    const nlohmann::json manifest = cosym::gallery_manifest(name, n, k, mutation);
    if (dump->parsed()) {
      std::cout << manifest.dump(2) << "\n";
      return 0;
    }
    return execute(cosym::load_manifest(manifest), flags);
  } catch (const cosym::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
