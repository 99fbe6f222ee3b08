// command-line driver around cli::run: parses the flags, loads the optional
// JSON config, and prints the report.  Exit codes: 0 all checks pass, 1 some
// check fails (or the data blows up mid-run), 2 malformed invocation or config.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

const std::map<std::string, std::string> kSubcommands = {
    {"verify-gh", "monopole equations and quaternionic forms of the radial Higgs field"},
    {"verify-cone", "cone constraints, potential duality and the lifted generators"},
    {"reduce-qk", "reduction to the canonical chart and the quaternionic verifiers"},
    {"cp4d", "four-dimensional family built from an axial potential"},
    {"cmap", "prepotential pipeline: contour potential, monopole data, assembled metric"},
    {"legendre", "transform construction and its gauge kernel"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic verification reports over the toolkit's constructions"};
  app.set_help_flag("--help", "print this message");
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::string config_path, out_path;
  std::vector<std::string> tol_args;

  for (const auto& [name, desc] : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->set_help_flag("--help", "print this message");
    sub->add_option("--config", config_path, "JSON file describing the data to verify");
    sub->add_option("--samples", cfg.samples, "sample points per check")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed of the sampling streams");
    sub->add_option("--h", cfg.h, "central-difference step");
    sub->add_option("--out", out_path, "write the report here instead of stdout");
    sub->add_option("--tolerance", tol_args, "override NAME=VALUE, repeatable");
    sub->callback([&cfg, name = name] { cfg.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const std::string& t : tol_args) {
    auto eq = t.find('=');
    double v = 0;
    std::size_t used = 0;
    try {
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument(t);
      v = std::stod(t.substr(eq + 1), &used);
    } catch (const std::exception&) {
      std::cerr << "malformed tolerance override '" << t << "', expected NAME=VALUE\n";
      return 2;
    }
    if (used != t.size() - eq - 1) {
      std::cerr << "malformed tolerance value in '" << t << "'\n";
      return 2;
    }
    cfg.tolerances[t.substr(0, eq)] = v;
  }

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file '" << config_path << "'\n";
      return 2;
    }
    try {
      in >> cfg.input;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "malformed config: " << e.what() << "\n";
      return 2;
    }
  }

  auto start = std::chrono::steady_clock::now();
  cli::Report rep;
  try {
    rep = cli::run(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "verification aborted: " << e.what() << "\n";
    return 1;
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string body = cli::report_json(rep).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write '" << out_path << "'\n";
      return 2;
    }
    out << body;
  }
  // timing goes to stderr so the report bytes depend only on (config, seed)
  std::cerr << "wall time " << wall << " s\n";
  return rep.pass ? 0 : 1;
}
