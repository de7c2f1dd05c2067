#include "fxlv/reference_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fxlv/normal.hpp"

namespace fxlv {

double black_formula(double F, double K, double total_stdev, CallPut cp) {
  if (F < 0.0 || K < 0.0 || total_stdev < 0.0)
    throw std::domain_error("black_formula: negative input");
  const double sign = cp_sign(cp);
  if (total_stdev == 0.0 || K == 0.0 || F == 0.0)
    return std::max(sign * (F - K), 0.0);
  const double d1 = std::log(F / K) / total_stdev + 0.5 * total_stdev;
  const double d2 = d1 - total_stdev;
  return sign * (F * normal_cdf(sign * d1) - K * normal_cdf(sign * d2));
}

double black_scholes_price(double F, double K, double sigma, double T, double df, CallPut cp) {
  if (sigma < 0.0 || T < 0.0) throw std::domain_error("black_scholes_price: negative input");
  if (!(df > 0.0 && df <= 1.0 + 1e-12))
    throw std::domain_error("black_scholes_price: discount factor outside (0,1]");
  return df * black_formula(F, K, sigma * std::sqrt(T), cp);
}

double forward_delta(double F, double K, double sigma, double T, CallPut cp) {
  const double stdev = sigma * std::sqrt(T);
  const double sign = cp_sign(cp);
  if (stdev == 0.0) return sign * (sign * (F - K) > 0.0 ? 1.0 : 0.0);
  const double d1 = std::log(F / K) / stdev + 0.5 * stdev;
  return sign * normal_cdf(sign * d1);
}

double delta_level_value(DeltaLevel level) {
  switch (level) {
    case DeltaLevel::d25: return 0.25;
    case DeltaLevel::d10: return 0.10;
    case DeltaLevel::atmf: break;
  }
  throw std::logic_error("delta_level_value: ATMF has no delta level");
}

double strike_from_delta(double F, double sigma, double T, DeltaLevel level, CallPut cp) {
  if (level == DeltaLevel::atmf) return F;
  if (!(sigma > 0.0 && T > 0.0))
    throw std::domain_error("strike_from_delta: sigma and T must be positive for wings");
  const double stdev = sigma * std::sqrt(T);
  const double p = delta_level_value(level);
  return F * std::exp(-cp_sign(cp) * stdev * normal_inv(p) + 0.5 * stdev * stdev);
}

InstrumentSelection InstrumentSelection::all() {
  InstrumentSelection sel;
  sel.select_all_ = true;
  return sel;
}

InstrumentSelection InstrumentSelection::parse(const std::vector<std::string>& entries) {
  if (entries.empty()) return all();
  InstrumentSelection sel;
  for (const auto& entry : entries) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("selection entry needs TENOR:KINDS form: " + entry);
    const std::string tenor = entry.substr(0, colon);
    std::vector<QuoteKind> kinds;
    std::string rest = entry.substr(colon + 1);
    if (rest != "ALL") {
      std::size_t pos = 0;
      while (pos != std::string::npos) {
        const auto comma = rest.find(',', pos);
        const std::string token =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        kinds.push_back(quote_kind_from_string(token));
        pos = comma == std::string::npos ? comma : comma + 1;
      }
    }
    sel.rules_.emplace_back(tenor, std::move(kinds));
  }
  return sel;
}

bool InstrumentSelection::contains(const std::string& tenor, QuoteKind kind) const {
  if (select_all_) return true;
  for (const auto& [rule_tenor, kinds] : rules_) {
    if (rule_tenor != tenor && rule_tenor != "*") continue;
    return kinds.empty() || std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
  }
  return false;
}

namespace {

CallPut quote_cp(QuoteKind kind) {
  switch (kind) {
    case QuoteKind::put25:
    case QuoteKind::put10: return CallPut::put;
    default: return CallPut::call;  // ATMF quoted as the call
  }
}

DeltaLevel quote_level(QuoteKind kind) {
  switch (kind) {
    case QuoteKind::atmf: return DeltaLevel::atmf;
    case QuoteKind::call25:
    case QuoteKind::put25: return DeltaLevel::d25;
    case QuoteKind::call10:
    case QuoteKind::put10: return DeltaLevel::d10;
  }
  throw std::logic_error("unknown QuoteKind");
}

int kind_order(QuoteKind kind) {
  switch (kind) {
    case QuoteKind::atmf: return 0;
    case QuoteKind::call25: return 1;
    case QuoteKind::put25: return 2;
    case QuoteKind::call10: return 3;
    case QuoteKind::put10: return 4;
  }
  return 5;
}

}  // namespace

std::vector<InstrumentSpec> resolve_instruments(const MarketSnapshot& snapshot,
                                                const InstrumentSelection& selection) {
  std::vector<VolQuote> selected;
  for (const auto& q : snapshot.quotes)
    if (selection.contains(q.tenor, q.kind)) selected.push_back(q);
  std::stable_sort(selected.begin(), selected.end(), [](const VolQuote& a, const VolQuote& b) {
    if (a.expiry != b.expiry) return a.expiry < b.expiry;
    return kind_order(a.kind) < kind_order(b.kind);
  });
  // Duplicate (expiry, kind) entries collapse to the last occurrence.
  std::vector<VolQuote> unique;
  for (const auto& q : selected) {
    if (!unique.empty() && unique.back().expiry == q.expiry && unique.back().kind == q.kind)
      unique.back() = q;
    else
      unique.push_back(q);
  }

  std::vector<InstrumentSpec> out;
  out.reserve(unique.size());
  for (const auto& q : unique) {
    InstrumentSpec spec;
    spec.tenor = q.tenor;
    spec.kind = q.kind;
    spec.expiry = q.expiry;
    spec.label = q.tenor + " " + to_string(q.kind);
    spec.T = year_fraction(snapshot.valuation, q.expiry);
    if (!snapshot.forward.covers(q.expiry) || !snapshot.discount.covers(q.expiry))
      throw std::out_of_range("instrument " + spec.label + ": curves do not cover expiry");
    spec.forward = snapshot.forward.forward_at(q.expiry);
    spec.df = snapshot.discount.df_at(q.expiry);
    spec.vol = q.vol;
    spec.cp = quote_cp(q.kind);
    spec.strike = q.kind == QuoteKind::atmf
                      ? spec.forward
                      : strike_from_delta(spec.forward, q.vol, spec.T, quote_level(q.kind), spec.cp);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<double> market_price_vector(std::span<const InstrumentSpec> instruments) {
  std::vector<double> prices;
  prices.reserve(instruments.size());
  for (const auto& inst : instruments)
    prices.push_back(
        black_scholes_price(inst.forward, inst.strike, inst.vol, inst.T, inst.df, inst.cp));
  return prices;
}

double geometric_asian_closed_form(std::span<const double> fixing_forwards, double strike,
                                   double sigma, std::span<const double> fixing_times,
                                   double df_pay, CallPut cp) {
  const std::size_t n = fixing_forwards.size();
  if (n == 0 || fixing_times.size() != n)
    throw std::invalid_argument("geometric_asian_closed_form: fixings/times mismatch");
  if (sigma < 0.0) throw std::domain_error("geometric_asian_closed_form: negative sigma");
  for (double t : fixing_times)
    if (t < 0.0) throw std::domain_error("geometric_asian_closed_form: negative fixing time");

  double mean_log_f = 0.0;
  double sum_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_log_f += std::log(fixing_forwards[i]);
    sum_t += fixing_times[i];
  }
  mean_log_f /= static_cast<double>(n);

  // Var[ln G] with G the geometric mean of the fixings.
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      var += sigma * sigma * std::min(fixing_times[i], fixing_times[j]);
  var /= static_cast<double>(n) * static_cast<double>(n);

  // E[G] = geomean(F_i) * exp(-sigma^2/(2n) sum t_i + var/2).
  const double eff_forward =
      std::exp(mean_log_f - 0.5 * sigma * sigma * sum_t / static_cast<double>(n) + 0.5 * var);
  return df_pay * black_formula(eff_forward, strike, std::sqrt(var), cp);
}

}  // namespace fxlv
