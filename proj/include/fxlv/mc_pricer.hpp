#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fxlv/curves.hpp"
#include "fxlv/deals.hpp"
#include "fxlv/reference_pricing.hpp"
#include "fxlv/time_grid.hpp"
#include "fxlv/vol_surface.hpp"

namespace fxlv {

// Reproducibility contract: (seed, algorithm, path count, time series) fully
// determine every state. One independent substream per path, normals by
// inverse CDF, so results do not depend on evaluation order.
struct RngSpec {
  std::uint64_t seed = 42;
  static constexpr const char* algorithm = "mt19937_64/substream-per-path/inverse-cdf";
};

struct PathSet {
  TimeGrid time_grid;
  int path_count = 0;
  std::vector<double> states;   // step-major: states[n * path_count + i]
  std::vector<double> lambda;   // per-step drift factors, lambda[0] = 1
  std::vector<double> forwards; // F(t^n), the enforced per-step sample mean
  RngSpec rng;

  double state(int path, std::size_t step) const {
    return states[step * static_cast<std::size_t>(path_count) + static_cast<std::size_t>(path)];
  }
  std::size_t step_count() const { return time_grid.size(); }
};

// Expiries and every fixing date, gap-filled like the lattice time grid.
TimeGrid build_mc_time_steps(Date valuation, std::span<const Date> fixing_dates,
                             std::span<const Date> expiries, int max_gap_days = 3);

// LV paths with the per-step drift renormalization: propose
// X = S exp(-sigma^2 dt / 2 + sigma sqrt(dt) xi), then scale by
// lambda = F / mean(X) so the sample mean matches the forward exactly before
// the next step's volatilities are read.
PathSet generate_paths(const LocalVolSurface& surface, const ForwardCurve& forward,
                       const TimeGrid& time_grid, int path_count, RngSpec rng);

double fixing_average(std::span<const double> fixings, AveragingKind kind);

// Payoff in currency2 for one realized (average, terminal) pair, notional included.
double asian_payoff(const AsianOption& deal, double average, double terminal);

struct McPrice {
  double pv = 0.0;
  double std_error = 0.0;
};

// cv_reference_vol > 0 enables a Kemna-Vorst control variate for arithmetic
// spot deals: the geometric twin on the same paths against its closed form at
// that flat vol. Approximate under a non-flat surface; off for method fidelity.
McPrice price_asian(const PathSet& paths, const AsianOption& deal,
                    const DiscountCurve& discount, double cv_reference_vol = 0.0);

McPrice price_european_mc(const PathSet& paths, const EuropeanOption& deal,
                          const DiscountCurve& discount);

// Calibration backend: per-unit European prices for the instrument set.
std::vector<double> price_instruments_mc(const PathSet& paths,
                                         std::span<const InstrumentSpec> instruments);

}  // namespace fxlv
