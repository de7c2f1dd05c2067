#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fxlv/date.hpp"

namespace fxlv {

enum class CallPut { call, put };

inline double cp_sign(CallPut cp) { return cp == CallPut::call ? 1.0 : -1.0; }

struct EuropeanOption {
  std::string id;
  double notional = 1.0;  // currency1 units
  double strike = 0.0;    // currency2 per currency1
  Date expiry;
  CallPut cp = CallPut::call;
};

// Exercisable once anywhere in [exercise_start, exercise_end].
struct AmericanOption {
  std::string id;
  double notional = 1.0;
  double strike = 0.0;
  Date exercise_start;
  Date exercise_end;
  CallPut cp = CallPut::call;
};

enum class AveragingKind { arithmetic, geometric };

// spot family: average replaces the asset; strike family: average replaces K.
enum class AsianFamily { spot, strike };

struct AsianOption {
  std::string id;
  double notional = 1.0;
  std::optional<double> strike;   // required for the spot family
  std::vector<Date> fixing_dates; // strictly increasing, all <= expiry
  AveragingKind averaging = AveragingKind::arithmetic;
  AsianFamily family = AsianFamily::spot;
  Date expiry;
  CallPut cp = CallPut::call;
  std::map<Date, double> observed_fixings;  // supplied for fixings before valuation
  std::optional<Date> payment_date;         // defaults to expiry
};

void validate_deal(const EuropeanOption& deal, Date valuation);
void validate_deal(const AmericanOption& deal, Date valuation);
void validate_deal(const AsianOption& deal, Date valuation);

}  // namespace fxlv
