#include "fxlv/sample_market.hpp"

#include <cmath>
#include <stdexcept>

namespace fxlv {

namespace {

struct TenorDef {
  const char* label;
  int yyyymmdd;
  double atm_pct;
};

// Expiries hand-picked on weekdays; 1W lands 4 calendar days out and 2W 14,
// so the ATM variance chain starts 6.446^2*1 <= 4.2^2*4 <= 3.25^2*14.
constexpr TenorDef kTenors[] = {
    {"1D", 20220927, 6.446}, {"1W", 20220930, 4.2},  {"2W", 20221010, 3.25},
    {"1M", 20221026, 3.0},   {"2M", 20221125, 3.2},  {"3M", 20221226, 3.4},
    {"4M", 20230126, 3.6},   {"5M", 20230227, 3.8},  {"6M", 20230327, 3.9},
    {"7M", 20230426, 4.0},   {"8M", 20230526, 4.1},  {"9M", 20230626, 4.2},
    {"1Y", 20230926, 4.3},
};

constexpr double kSpot = 7.12;

// Smile offsets of the 1Y row (percent over ATM), scaled by sqrt(T) towards
// the short end so BF25/BF10 shrink smoothly and stay C2-consistent.
constexpr double kOff25C = 4.3238 - 4.3;
constexpr double kOff25P = 4.7488 - 4.3;
constexpr double kOff10C = 4.3114 - 4.3;
constexpr double kOff10P = 5.3114 - 4.3;

double sample_forward(double t) { return kSpot * std::exp(-0.018 * t - 0.002 * t * t); }
double sample_df(double t) { return std::exp(-0.021 * t); }

}  // namespace

SampleMarket make_sample_market() {
  const Date valuation = Date::from_yyyymmdd(20220926);

  std::vector<CurvePillar> fwd_pillars{{valuation, kSpot}};
  std::vector<CurvePillar> df_pillars{{valuation, 1.0}};
  std::vector<VolQuote> quotes;
  for (const TenorDef& tenor : kTenors) {
    const Date expiry = Date::from_yyyymmdd(tenor.yyyymmdd);
    const double t = year_fraction(valuation, expiry);
    fwd_pillars.push_back({expiry, sample_forward(t)});
    df_pillars.push_back({expiry, sample_df(t)});

    const double scale = std::sqrt(t / 1.0);
    const double atm = tenor.atm_pct;
    quotes.push_back({tenor.label, expiry, QuoteKind::atmf, atm / 100.0});
    quotes.push_back({tenor.label, expiry, QuoteKind::call25, (atm + scale * kOff25C) / 100.0});
    quotes.push_back({tenor.label, expiry, QuoteKind::put25, (atm + scale * kOff25P) / 100.0});
    quotes.push_back({tenor.label, expiry, QuoteKind::call10, (atm + scale * kOff10C) / 100.0});
    quotes.push_back({tenor.label, expiry, QuoteKind::put10, (atm + scale * kOff10P) / 100.0});
  }

  ForwardCurve forward(fwd_pillars);
  auto forward_ptr = std::make_shared<const ForwardCurve>(forward);
  MarketSnapshot snapshot(std::move(forward), DiscountCurve(df_pillars), std::move(quotes));
  return {std::move(forward_ptr), std::move(snapshot)};
}

std::vector<std::string> sample_selection_entries() {
  return {"1D:ATMF", "1W:ATMF,25C,25P", "*:ALL"};
}

namespace {

const InstrumentSpec& find_instrument(const std::vector<InstrumentSpec>& instruments,
                                      const std::string& tenor, QuoteKind kind) {
  for (const auto& inst : instruments)
    if (inst.tenor == tenor && inst.kind == kind) return inst;
  throw std::logic_error("sample deals: instrument not found: " + tenor);
}

std::vector<Date> friday_fixings(Date valuation, Date expiry) {
  std::vector<Date> fixings;
  for (Date d = valuation; d <= expiry; d = d + 1)
    if (d.weekday() == 5) fixings.push_back(d);
  // The averaging window should end at the deal expiry even when the expiry
  // is not a Friday.
  if (fixings.empty() || fixings.back() != expiry) fixings.push_back(expiry);
  return fixings;
}

}  // namespace

SampleDeals make_sample_deals(const MarketSnapshot& snapshot) {
  const auto instruments =
      resolve_instruments(snapshot, InstrumentSelection::parse(sample_selection_entries()));
  const Date valuation = snapshot.valuation;
  constexpr double kNotional = 1000000.0;

  SampleDeals deals;
  const auto american = [&](const std::string& id, const std::string& tenor, QuoteKind kind) {
    const InstrumentSpec& inst = find_instrument(instruments, tenor, kind);
    deals.americans.push_back(
        {id, kNotional, inst.strike, valuation, inst.expiry, CallPut::call});
  };
  american("1Y_ATM_amer", "1Y", QuoteKind::atmf);
  american("1Y_25C_amer", "1Y", QuoteKind::call25);
  american("1Y_10C_amer", "1Y", QuoteKind::call10);
  american("1M_ATM_amer", "1M", QuoteKind::atmf);

  const auto asian = [&](const std::string& id, const std::string& tenor, QuoteKind kind) {
    const InstrumentSpec& inst = find_instrument(instruments, tenor, kind);
    AsianOption deal;
    deal.id = id;
    deal.notional = kNotional;
    deal.strike = inst.strike;
    deal.expiry = inst.expiry;
    deal.fixing_dates = friday_fixings(valuation, inst.expiry);
    deal.averaging = AveragingKind::arithmetic;
    deal.family = AsianFamily::spot;
    deal.cp = CallPut::call;
    deals.asians.push_back(std::move(deal));
  };
  asian("1M_ATM_asian", "1M", QuoteKind::atmf);
  asian("3M_ATM_asian", "3M", QuoteKind::atmf);
  asian("1Y_ATM_asian", "1Y", QuoteKind::atmf);
  asian("1Y_10C_asian", "1Y", QuoteKind::call10);

  const InstrumentSpec& euro_atm = find_instrument(instruments, "1Y", QuoteKind::atmf);
  deals.europeans.push_back(
      {"1Y_ATM_euro", kNotional, euro_atm.strike, euro_atm.expiry, CallPut::call});
  return deals;
}

}  // namespace fxlv
