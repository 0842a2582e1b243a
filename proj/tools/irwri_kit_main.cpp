#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "irwri/config.hpp"
#include "irwri/experiment.hpp"
#include "irwri/types.hpp"

namespace {

struct Args {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
};

int dispatch(const std::string& cmd, const Args& args, bool seed_given) {
  irwri::ConfigMap cfg = irwri::ConfigMap::parse_file(args.config_path);
  cfg.apply_env_overrides();
  if (seed_given) {
    cfg.set("signatures", "seed", std::to_string(args.seed));
    cfg.set("noise", "seed", std::to_string(args.seed + 1000003));
  }
  const std::filesystem::path out =
      args.out_dir.empty() ? std::filesystem::path(
                                 cfg.get_string("output", "dir", "out"))
                           : std::filesystem::path(args.out_dir);
  if (cmd == "forward") return irwri::cmd_forward(cfg, out);
  if (cmd == "estimate-sources") return irwri::cmd_estimate_sources(cfg, out);
  if (cmd == "invert") return irwri::cmd_invert(cfg, out);
  return irwri::cmd_sweep(cfg, out, args.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Frequency-domain waveform inversion toolkit with on-the-fly source "
      "signature estimation"};
  app.require_subcommand(1);

  Args args;
  for (const char* name :
       {"forward", "estimate-sources", "invert", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", args.config_path, "Experiment config (INI)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir,
                    "Output directory (overrides [output] dir)");
    sub->add_option("--seed", args.seed,
                    "Base seed (overrides [signatures]/[noise] seeds)");
    sub->add_option("--threads", args.threads, "Sweep worker threads")
        ->check(CLI::PositiveNumber);
  }
  app.get_subcommand("forward")->description("Synthesize per-frequency data");
  app.get_subcommand("estimate-sources")
      ->description("Estimate source signatures against a background model");
  app.get_subcommand("invert")->description("Run the full inversion");
  app.get_subcommand("sweep")
      ->description("Grid-sweep estimation quality over one or two axes");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    return dispatch(sub->get_name(), args, sub->count("--seed") > 0);
  } catch (const irwri::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const irwri::SingularMatrixError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
