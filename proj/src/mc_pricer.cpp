#include "fxlv/mc_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fxlv/normal.hpp"

namespace fxlv {

TimeGrid build_mc_time_steps(Date valuation, std::span<const Date> fixing_dates,
                             std::span<const Date> expiries, int max_gap_days) {
  std::vector<Date> specials(fixing_dates.begin(), fixing_dates.end());
  specials.insert(specials.end(), expiries.begin(), expiries.end());
  // Seasoned Asian deals carry past fixings; those are observed, not simulated.
  std::erase_if(specials, [&](Date d) { return d < valuation; });
  return build_time_grid(valuation, specials, max_gap_days);
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0,1) from the top 53 bits.
double to_unit(std::uint64_t v) {
  return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

PathSet generate_paths(const LocalVolSurface& surface, const ForwardCurve& forward,
                       const TimeGrid& time_grid, int path_count, RngSpec rng) {
  if (path_count < 1) throw std::invalid_argument("generate_paths: need at least one path");
  if (time_grid.size() < 2) throw std::invalid_argument("generate_paths: degenerate time grid");

  const std::size_t steps = time_grid.size();
  const std::size_t paths = static_cast<std::size_t>(path_count);

  // Draw the whole normal matrix up front, one substream per path, so the
  // per-step lambda barrier cannot perturb the stream layout.
  std::vector<double> normals((steps - 1) * paths);
  for (std::size_t i = 0; i < paths; ++i) {
    std::mt19937_64 engine(splitmix64(rng.seed ^ (0x5851f42d4c957f2dULL * (i + 1))));
    for (std::size_t n = 0; n + 1 < steps; ++n)
      normals[n * paths + i] = normal_inv(to_unit(engine()));
  }

  PathSet set;
  set.time_grid = time_grid;
  set.path_count = path_count;
  set.rng = rng;
  set.states.assign(steps * paths, 0.0);
  set.lambda.assign(steps, 1.0);
  set.forwards.resize(steps);

  const double spot = forward.forward_at(time_grid.dates[0]);
  set.forwards[0] = spot;
  for (std::size_t i = 0; i < paths; ++i) set.states[i] = spot;

  for (std::size_t n = 0; n + 1 < steps; ++n) {
    const double t = time_grid.years[n];
    const double dt = time_grid.years[n + 1] - time_grid.years[n];
    const double sqrt_dt = std::sqrt(dt);
    const double* cur = &set.states[n * paths];
    double* next = &set.states[(n + 1) * paths];

    double sum = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      const double sigma = surface.local_vol(t, cur[i]);
      const double x = cur[i] *
          std::exp(-0.5 * sigma * sigma * dt + sigma * sqrt_dt * normals[n * paths + i]);
      next[i] = x;
      sum += x;
    }
    const double mean = sum / static_cast<double>(paths);
    if (!(mean > 0.0) || !std::isfinite(mean))
      throw std::runtime_error("generate_paths: non-finite states at step " +
                               std::to_string(n + 1) + " (" +
                               time_grid.dates[n + 1].to_string() + ")");
    const double f = forward.forward_at(time_grid.dates[n + 1]);
    const double lambda = f / mean;
    set.lambda[n + 1] = lambda;
    set.forwards[n + 1] = f;
    for (std::size_t i = 0; i < paths; ++i) {
      next[i] *= lambda;
      if (!std::isfinite(next[i]))
        throw std::runtime_error("generate_paths: non-finite state, path " + std::to_string(i) +
                                 " step " + std::to_string(n + 1));
    }
  }
  return set;
}

double fixing_average(std::span<const double> fixings, AveragingKind kind) {
  if (fixings.empty()) throw std::invalid_argument("fixing_average: no fixings");
  if (kind == AveragingKind::arithmetic) {
    double sum = 0.0;
    for (double f : fixings) sum += f;
    return sum / static_cast<double>(fixings.size());
  }
  double log_sum = 0.0;
  for (double f : fixings) {
    if (!(f > 0.0))
      throw std::domain_error("fixing_average: geometric mean needs positive fixings");
    log_sum += std::log(f);
  }
  return std::exp(log_sum / static_cast<double>(fixings.size()));
}

double asian_payoff(const AsianOption& deal, double average, double terminal) {
  const double sign = cp_sign(deal.cp);
  if (deal.family == AsianFamily::spot)
    return deal.notional * std::max(sign * (average - deal.strike.value()), 0.0);
  return deal.notional * std::max(sign * (terminal - average), 0.0);
}

namespace {

struct FixingLookup {
  std::vector<std::size_t> simulated_steps;  // grid indices of future fixings
  std::vector<double> observed;              // values for past fixings
};

FixingLookup resolve_fixings(const PathSet& paths, const AsianOption& deal) {
  FixingLookup lookup;
  const Date valuation = paths.time_grid.valuation();
  for (Date d : deal.fixing_dates) {
    if (d < valuation) {
      const auto it = deal.observed_fixings.find(d);
      if (it == deal.observed_fixings.end())
        throw std::invalid_argument("price_asian: missing observed fixing for " + d.to_string());
      lookup.observed.push_back(it->second);
    } else {
      lookup.simulated_steps.push_back(paths.time_grid.index_of(d));
    }
  }
  return lookup;
}

McPrice discounted_mean(const std::vector<double>& payoffs, double df) {
  const double n = static_cast<double>(payoffs.size());
  double sum = 0.0;
  for (double p : payoffs) sum += p;
  const double mean = sum / n;
  double var = 0.0;
  for (double p : payoffs) var += (p - mean) * (p - mean);
  var = payoffs.size() > 1 ? var / (n - 1.0) : 0.0;
  return {df * mean, df * std::sqrt(var / n)};
}

}  // namespace

McPrice price_asian(const PathSet& paths, const AsianOption& deal, const DiscountCurve& discount,
                    double cv_reference_vol) {
  const FixingLookup lookup = resolve_fixings(paths, deal);
  const std::size_t terminal_step = paths.time_grid.index_of(deal.expiry);
  const Date pay_date = deal.payment_date.value_or(deal.expiry);
  const double df = discount.df_at(pay_date);

  const std::size_t count = static_cast<std::size_t>(paths.path_count);
  std::vector<double> payoffs(count);
  std::vector<double> fixes(lookup.observed.size() + lookup.simulated_steps.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t k = 0;
    for (double v : lookup.observed) fixes[k++] = v;
    for (std::size_t step : lookup.simulated_steps)
      fixes[k++] = paths.state(static_cast<int>(i), step);
    const double avg = fixing_average(fixes, deal.averaging);
    payoffs[i] = asian_payoff(deal, avg, paths.state(static_cast<int>(i), terminal_step));
  }

  const bool cv_applicable = cv_reference_vol > 0.0 &&
                             deal.averaging == AveragingKind::arithmetic &&
                             deal.family == AsianFamily::spot && lookup.observed.empty();
  if (cv_applicable) {
    AsianOption twin = deal;
    twin.averaging = AveragingKind::geometric;
    std::vector<double> fixing_forwards;
    std::vector<double> fixing_times;
    for (std::size_t step : lookup.simulated_steps) {
      fixing_forwards.push_back(paths.forwards[step]);
      fixing_times.push_back(paths.time_grid.years[step]);
    }
    const double cf =
        deal.notional * geometric_asian_closed_form(fixing_forwards, *deal.strike,
                                                    cv_reference_vol, fixing_times, df, deal.cp);
    std::vector<double> adjusted(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t k = 0;
      for (std::size_t step : lookup.simulated_steps)
        fixes[k++] = paths.state(static_cast<int>(i), step);
      const double geo = fixing_average({fixes.data(), lookup.simulated_steps.size()},
                                        AveragingKind::geometric);
      adjusted[i] = payoffs[i] -
                    asian_payoff(twin, geo, paths.state(static_cast<int>(i), terminal_step));
    }
    const McPrice diff = discounted_mean(adjusted, df);
    return {diff.pv + cf, diff.std_error};
  }

  return discounted_mean(payoffs, df);
}

McPrice price_european_mc(const PathSet& paths, const EuropeanOption& deal,
                          const DiscountCurve& discount) {
  const std::size_t step = paths.time_grid.index_of(deal.expiry);
  const double df = discount.df_at(deal.expiry);
  const double sign = cp_sign(deal.cp);
  std::vector<double> payoffs(static_cast<std::size_t>(paths.path_count));
  for (std::size_t i = 0; i < payoffs.size(); ++i)
    payoffs[i] = deal.notional *
                 std::max(sign * (paths.state(static_cast<int>(i), step) - deal.strike), 0.0);
  return discounted_mean(payoffs, df);
}

std::vector<double> price_instruments_mc(const PathSet& paths,
                                         std::span<const InstrumentSpec> instruments) {
  std::vector<double> prices;
  prices.reserve(instruments.size());
  for (const auto& inst : instruments) {
    const std::size_t step = paths.time_grid.index_of(inst.expiry);
    const double sign = cp_sign(inst.cp);
    double sum = 0.0;
    for (int i = 0; i < paths.path_count; ++i)
      sum += std::max(sign * (paths.state(i, step) - inst.strike), 0.0);
    prices.push_back(inst.df * sum / static_cast<double>(paths.path_count));
  }
  return prices;
}

}  // namespace fxlv
