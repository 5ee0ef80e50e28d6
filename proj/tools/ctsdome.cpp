// Command-line front end: parses flags, loads the JSON config, and hands off
// to the command runner.  All heavy lifting lives in the core library so the
// same entry points stay testable without a process boundary.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cts/errors.hpp"
#include "cts/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Clustered tensegrity cable-dome analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool seedless = false;
  app.add_option("--config", config_path,
                 "JSON run configuration (defaults used when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--threads", threads, "worker threads for sweep points")
      ->check(CLI::PositiveNumber);
  app.add_flag("--seedless", seedless,
               "assert (and record) that the run draws no random numbers");

  app.add_subcommand("generate", "design the dome and write the interchange document");
  app.add_subcommand("cluster-study",
                     "tabulate prestress modes, stability, and base frequency per arc count");
  app.add_subcommand("sweep", "trace the quasi-static deployment trajectory");
  app.add_subcommand("modes", "report natural frequencies and mode shapes");
  app.add_subcommand("deploy", "integrate the dynamic deployment runs");
  app.add_subcommand("compare", "score dynamic runs against the quasi-static reference");

  CLI11_PARSE(app, argc, argv);

  try {
    cts::cli::RunContext ctx;
    if (!config_path.empty()) ctx.config = cts::cli::load_config(config_path);
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.seedless = seedless;

    const std::string command = app.get_subcommands().front()->get_name();
    const int files = cts::cli::run_command(command, ctx);
    std::printf("%s: wrote %d table file(s) under %s\n", command.c_str(), files,
                out_dir.c_str());
    return 0;
  } catch (const cts::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
