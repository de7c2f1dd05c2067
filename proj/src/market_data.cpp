#include "fxlv/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fxlv {

std::string to_string(QuoteKind kind) {
  switch (kind) {
    case QuoteKind::atmf: return "ATMF";
    case QuoteKind::call25: return "25C";
    case QuoteKind::put25: return "25P";
    case QuoteKind::call10: return "10C";
    case QuoteKind::put10: return "10P";
  }
  throw std::logic_error("unknown QuoteKind");
}

QuoteKind quote_kind_from_string(const std::string& s) {
  if (s == "ATMF" || s == "ATM") return QuoteKind::atmf;
  if (s == "25C") return QuoteKind::call25;
  if (s == "25P") return QuoteKind::put25;
  if (s == "10C") return QuoteKind::call10;
  if (s == "10P") return QuoteKind::put10;
  throw std::invalid_argument("unknown quote kind: " + s);
}

MarketSnapshot::MarketSnapshot(ForwardCurve fwd, DiscountCurve disc, std::vector<VolQuote> q)
    : forward(std::move(fwd)), discount(std::move(disc)), quotes(std::move(q)) {
  valuation = forward.valuation_date();
  if (discount.valuation_date() != valuation)
    throw std::invalid_argument("MarketSnapshot: curve valuation dates differ (" +
                                valuation.to_string() + " vs " +
                                discount.valuation_date().to_string() + ")");
  for (const auto& quote : quotes) {
    if (!(quote.vol > 0.0))
      throw std::invalid_argument("MarketSnapshot: non-positive vol for " + quote.tenor + " " +
                                  to_string(quote.kind));
    if (quote.expiry < valuation)
      throw std::invalid_argument("MarketSnapshot: quote expiry before valuation for " +
                                  quote.tenor);
    if (!forward.covers(quote.expiry) || !discount.covers(quote.expiry))
      throw std::invalid_argument("MarketSnapshot: curves do not cover expiry " +
                                  quote.expiry.to_string() + " (" + quote.tenor + ")");
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_market(const MarketSnapshot& snapshot) {
  ValidationReport report;

  // Last quote wins per (expiry, kind); an appended duplicate is a no-op.
  std::map<Date, std::map<QuoteKind, double>> by_expiry;
  std::map<Date, std::string> tenor_of;
  for (const auto& q : snapshot.quotes) {
    by_expiry[q.expiry][q.kind] = q.vol;
    tenor_of[q.expiry] = q.tenor;
  }

  // C1 over ATM quotes in expiry order, weights in calendar days.
  for (const auto& [expiry, kinds] : by_expiry) {
    auto it = kinds.find(QuoteKind::atmf);
    if (it == kinds.end()) continue;
    const int days = expiry - snapshot.valuation;
    report.c1_terms.push_back(
        {tenor_of[expiry], expiry, days, it->second * it->second * days});
  }
  for (std::size_t i = 1; i < report.c1_terms.size(); ++i) {
    const auto& prev = report.c1_terms[i - 1];
    const auto& cur = report.c1_terms[i];
    if (cur.variance_weight < prev.variance_weight - 1e-15) {
      report.pass = false;
      report.violations.push_back(
          {"C1", cur.tenor,
           "ATM variance weight decreases: " + fmt(prev.variance_weight) + " (" + prev.tenor +
               ") -> " + fmt(cur.variance_weight)});
    }
  }

  // C2 for tenors quoting the full five-point smile.
  for (const auto& [expiry, kinds] : by_expiry) {
    const bool full = kinds.count(QuoteKind::atmf) && kinds.count(QuoteKind::call25) &&
                      kinds.count(QuoteKind::put25) && kinds.count(QuoteKind::call10) &&
                      kinds.count(QuoteKind::put10);
    if (!full) continue;
    const double atm = kinds.at(QuoteKind::atmf);
    const double bf25 = 0.5 * (kinds.at(QuoteKind::call25) + kinds.at(QuoteKind::put25)) - atm;
    const double bf10 = 0.5 * (kinds.at(QuoteKind::call10) + kinds.at(QuoteKind::put10)) - atm;
    report.butterflies.push_back({tenor_of[expiry], expiry, bf25, bf10});
    if (bf25 < -1e-15) {
      report.pass = false;
      report.violations.push_back({"C2", tenor_of[expiry], "BF25 negative: " + fmt(bf25)});
    }
    if (bf10 < bf25 - 1e-15) {
      report.pass = false;
      report.violations.push_back({"C2", tenor_of[expiry],
                                   "BF10 below BF25: " + fmt(bf10) + " < " + fmt(bf25)});
    }
  }

  return report;
}

}  // namespace fxlv
