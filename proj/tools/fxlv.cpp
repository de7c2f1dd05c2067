#include <CLI11.hpp>
#include <iostream>

#include "fxlv/cli.hpp"
#include "fxlv/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fxlv - local volatility calibration and FX exotic option pricing"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir;
  std::string surface_file;
  std::uint64_t seed = 0;
  bool have_seed = false;
  bool force = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "run configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
      have_seed = true;
    });
  };

  CLI::App* validate = app.add_subcommand("validate", "check market data conditions C1/C2");
  add_common(validate);

  CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate the local vol surface");
  add_common(calibrate);
  calibrate->add_flag("--force", force, "calibrate even if validation fails");

  CLI::App* price = app.add_subcommand("price", "price the configured deal set");
  add_common(price);
  price->add_option("--surface", surface_file, "surface JSON (overrides files.surface)");

  CLI::App* converge = app.add_subcommand("converge", "run the resolution stability study");
  add_common(converge);
  converge->add_option("--surface", surface_file, "surface JSON (overrides files.surface)");

  CLI11_PARSE(app, argc, argv);

  try {
    fxlv::RunConfig config = fxlv::load_run_config(config_file);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!surface_file.empty()) config.surface = surface_file;
    if (have_seed) config.seed = seed;

    if (app.got_subcommand(validate)) return fxlv::cmd_validate(config);
    if (app.got_subcommand(calibrate)) return fxlv::cmd_calibrate(config, force);
    if (app.got_subcommand(price)) return fxlv::cmd_price(config);
    if (app.got_subcommand(converge)) return fxlv::cmd_converge(config);
  } catch (const fxlv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fxlv::kExitParseFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fxlv::kExitDomainFailure;
  }
  return fxlv::kExitParseFailure;
}
