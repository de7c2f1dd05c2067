// Writes the bundled sample dataset (curves, vol matrix, deals, run config)
// into a directory, generated from the library's built-in sample market so
// the files and the in-code fixtures never drift apart.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fxlv/io.hpp"
#include "fxlv/sample_market.hpp"

using namespace fxlv;

namespace {

void write_config(const std::filesystem::path& dir) {
  std::ofstream out(dir / "fxlv.toml");
  out << "# sample run configuration\n"
         "[files]\n"
         "forward_curve = \"forward.csv\"\n"
         "discount_curve = \"discount.csv\"\n"
         "vols = \"vols.csv\"\n"
         "deals = \"deals.json\"\n"
         "surface = \"out/surface.json\"   # written by `fxlv calibrate`\n"
         "\n"
         "[market]\n"
         "# illiquid wings dropped: 59 instruments survive\n"
         "selection = \"1D:ATMF;1W:ATMF,25C,25P;*:ALL\"\n"
         "c0 = auto\n"
         "\n"
         "[surface]\n"
         "time_pillars = 18\n"
         "state_pillars = 11\n"
         "\n"
         "[backend]\n"
         "grid_half_states = 50\n"
         "mc_paths = 20000\n"
         "seed = 42\n"
         "max_gap_days = 3\n"
         "calibration_pricer = grid\n"
         "european_pricer = grid\n"
         "\n"
         "[solver]\n"
         "max_iterations = 100\n"
         "tol_f = 1e-6\n"
         "tol_x = 1e-8\n"
         "\n"
         "[converge]\n"
         "grid_sizes = 50,100,200\n"
         "path_counts = 5000,10000,15000,20000\n"
         "\n"
         "[output]\n"
         "dir = \"out\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: fxlv-make-sample <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  const SampleMarket market = make_sample_market();
  const SampleDeals sample = make_sample_deals(market.snapshot);
  save_forward_csv(dir / "forward.csv", market.snapshot.forward);
  save_discount_csv(dir / "discount.csv", market.snapshot.discount);
  save_vols_csv(dir / "vols.csv", market.snapshot.quotes);
  save_deals_json(dir / "deals.json",
                  {sample.americans, sample.asians, sample.europeans});
  write_config(dir);
  std::cout << "sample dataset written to " << dir.string() << "\n";
  return 0;
}
