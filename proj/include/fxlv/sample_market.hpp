#pragma once

#include <memory>
#include <vector>

#include "fxlv/deals.hpp"
#include "fxlv/market_data.hpp"
#include "fxlv/reference_pricing.hpp"

namespace fxlv {

// Synthetic USDCNY market snapshot used by the demos and the test suites:
// valuation 2022-09-26, thirteen tenors 1D..1Y with a five-point smile per
// tenor, C1/C2 consistent by construction. The 1D/1W/2W/1Y ATM levels are
// 6.446 / 4.2 / 3.25 / 4.3 (percent) and the 1Y smile is
// 10C 4.3114, 25C 4.3238, ATM 4.3, 25P 4.7488, 10P 5.3114.
struct SampleMarket {
  std::shared_ptr<const ForwardCurve> forward;
  MarketSnapshot snapshot;
};

SampleMarket make_sample_market();

// Drops the illiquid wings: 1D keeps only ATMF, 1W keeps ATMF/25C/25P, every
// other tenor keeps all five quotes. 59 instruments in total.
std::vector<std::string> sample_selection_entries();

struct SampleDeals {
  std::vector<AmericanOption> americans;  // 1Y ATM/25C/10C and 1M ATM strikes
  std::vector<AsianOption> asians;        // 1M/3M/1Y ATM and 1Y 10C, Friday fixings
  std::vector<EuropeanOption> europeans;
};

// Deal strikes are read off the resolved calibration instruments so the deal
// set and the instrument set stay in lockstep.
SampleDeals make_sample_deals(const MarketSnapshot& snapshot);

}  // namespace fxlv
