#include "fxlv/deals.hpp"

#include <stdexcept>

namespace fxlv {

namespace {

void require(bool ok, const std::string& deal_id, const std::string& what) {
  if (!ok) throw std::invalid_argument("deal " + deal_id + ": " + what);
}

}  // namespace

void validate_deal(const EuropeanOption& deal, Date valuation) {
  require(deal.notional > 0.0, deal.id, "notional must be positive");
  require(deal.strike > 0.0, deal.id, "strike must be positive");
  require(deal.expiry >= valuation, deal.id, "expiry before valuation date");
}

void validate_deal(const AmericanOption& deal, Date valuation) {
  require(deal.notional > 0.0, deal.id, "notional must be positive");
  require(deal.strike > 0.0, deal.id, "strike must be positive");
  require(deal.exercise_start <= deal.exercise_end, deal.id,
          "exercise window start after end");
  require(deal.exercise_end >= valuation, deal.id, "exercise window already closed");
}

void validate_deal(const AsianOption& deal, Date valuation) {
  require(deal.notional > 0.0, deal.id, "notional must be positive");
  require(!deal.fixing_dates.empty(), deal.id, "needs at least one fixing date");
  for (std::size_t i = 0; i < deal.fixing_dates.size(); ++i) {
    if (i > 0)
      require(deal.fixing_dates[i] > deal.fixing_dates[i - 1], deal.id,
              "fixing dates must be strictly increasing");
    require(deal.fixing_dates[i] <= deal.expiry, deal.id,
            "fixing date after expiry: " + deal.fixing_dates[i].to_string());
  }
  if (deal.family == AsianFamily::spot) {
    require(deal.strike.has_value(), deal.id, "spot-family payoff requires a strike");
    require(*deal.strike > 0.0, deal.id, "strike must be positive");
  }
  // Past fixings must already be observed; the engine cannot simulate history.
  for (Date d : deal.fixing_dates) {
    if (d < valuation)
      require(deal.observed_fixings.count(d) > 0, deal.id,
              "missing observed fixing for past date " + d.to_string());
  }
  for (const auto& [d, v] : deal.observed_fixings)
    require(v > 0.0, deal.id, "observed fixing must be positive at " + d.to_string());
  if (deal.payment_date)
    require(*deal.payment_date >= deal.expiry, deal.id, "payment date before expiry");
}

}  // namespace fxlv
