#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Continuation, stability and amplitude analysis for Turing patterns"};
  app.require_subcommand(1);
  turing::cli::Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON run configuration");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--threads", opt.threads, "worker threads for independent branches")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", opt.verbose, "per-point progress");
  };
  const char* names[][2] = {{"disp", "dispersion relation sweep and critical values"},
                            {"landau", "Landau coefficient sweeps in lambda or sigma"},
                            {"maxwell", "Maxwell points for a list of sigma values"},
                            {"glfront", "stationary Ginzburg-Landau front"},
                            {"cont", "scripted continuation of branches"},
                            {"tint", "semi-implicit time integration"},
                            {"render", "PPM heatmap of a snapshot"}};
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    add_common(sub);
    if (std::string(n[0]) == "render") sub->add_option("snapshot", opt.snapshot, "snapshot file")->required();
    sub->callback([&opt, name = std::string(n[0])] { opt.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  return turing::cli::run(opt, std::cerr);
}
