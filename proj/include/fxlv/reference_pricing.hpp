#pragma once

#include <span>
#include <string>
#include <vector>

#include "fxlv/deals.hpp"
#include "fxlv/market_data.hpp"

namespace fxlv {

// Undiscounted Black formula on forward terms with total stdev = sigma*sqrt(T)
// passed as one quantity; degenerates to intrinsic when the stdev is zero.
double black_formula(double F, double K, double total_stdev, CallPut cp);

// Discounted Black-Scholes price per unit notional (currency2).
double black_scholes_price(double F, double K, double sigma, double T, double df, CallPut cp);

// Premium-excluded forward delta Phi(cp * d1) carrying the option's sign.
double forward_delta(double F, double K, double sigma, double T, CallPut cp);

enum class DeltaLevel { atmf, d25, d10 };

double delta_level_value(DeltaLevel level);  // 0.25 / 0.10; ATMF has no level

// Strike whose premium-excluded forward delta magnitude equals the level.
// ATMF means K = F.
double strike_from_delta(double F, double sigma, double T, DeltaLevel level, CallPut cp);

// A calibration instrument: one vol quote resolved into a priced European.
struct InstrumentSpec {
  std::string label;  // e.g. "1Y 25C"
  std::string tenor;
  QuoteKind kind = QuoteKind::atmf;
  Date expiry;
  double T = 0.0;       // ACT/365 year fraction
  double forward = 0.0; // F at expiry
  double df = 0.0;      // DF at expiry
  double strike = 0.0;
  double vol = 0.0;     // the quote's own Black-Scholes vol
  CallPut cp = CallPut::call;
};

// Per-tenor allow-list. Entries look like "1W:ATMF,25C,25P"; "*" matches any
// tenor not listed explicitly; an empty selection admits everything.
class InstrumentSelection {
 public:
  static InstrumentSelection all();
  static InstrumentSelection parse(const std::vector<std::string>& entries);
  bool contains(const std::string& tenor, QuoteKind kind) const;

 private:
  bool select_all_ = false;
  std::vector<std::pair<std::string, std::vector<QuoteKind>>> rules_;
};

// Quotes -> priced instruments, ordered by expiry then kind. Each instrument
// keeps its own quoted vol; ATMF resolves to K = F, wings via forward delta.
std::vector<InstrumentSpec> resolve_instruments(const MarketSnapshot& snapshot,
                                                const InstrumentSelection& selection);

// Market prices c_i per unit notional, in instrument order.
std::vector<double> market_price_vector(std::span<const InstrumentSpec> instruments);

// Closed form for a geometric-average Asian under flat volatility: the
// geometric mean of lognormals is lognormal, so the price is a Black formula
// with a convexity-corrected effective forward and effective variance
// (1/n^2) sum_{i,j} sigma^2 min(t_i, t_j). Spot-family payoff, paid at df_pay.
double geometric_asian_closed_form(std::span<const double> fixing_forwards, double strike,
                                   double sigma, std::span<const double> fixing_times,
                                   double df_pay, CallPut cp);

}  // namespace fxlv
