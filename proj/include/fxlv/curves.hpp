#pragma once

#include <string>
#include <vector>

#include "fxlv/date.hpp"

namespace fxlv {

struct CurvePillar {
  Date date;
  double value = 0.0;
};

namespace detail {

// Log-linear interpolation over a strictly increasing date axis. Exact at
// pillars, positivity preserving, no extrapolation.
class LogLinearCurve {
 public:
  LogLinearCurve() = default;
  LogLinearCurve(std::string name, std::vector<CurvePillar> pillars);

  double value_at(Date t) const { return value_at_days(t - valuation_date()); }

  // Continuous day axis measured from the valuation date; fractional days are
  // allowed (the local-vol transform queries F at arbitrary year fractions).
  double value_at_days(double days) const;

  Date valuation_date() const { return pillars_.front().date; }
  Date last_date() const { return pillars_.back().date; }
  const std::vector<CurvePillar>& pillars() const { return pillars_; }
  bool covers(Date t) const { return t >= valuation_date() && t <= last_date(); }

 private:
  std::string name_;
  std::vector<CurvePillar> pillars_;
  std::vector<double> days_;
  std::vector<double> log_values_;
};

}  // namespace detail

// Forward FX curve (currency2 per currency1). First pillar is the valuation
// date and carries the spot.
class ForwardCurve {
 public:
  explicit ForwardCurve(std::vector<CurvePillar> pillars);

  double forward_at(Date t) const { return curve_.value_at(t); }
  double forward_at_years(double t) const { return curve_.value_at_days(t * 365.0); }
  double spot() const { return curve_.pillars().front().value; }

  Date valuation_date() const { return curve_.valuation_date(); }
  Date last_date() const { return curve_.last_date(); }
  bool covers(Date t) const { return curve_.covers(t); }
  const std::vector<CurvePillar>& pillars() const { return curve_.pillars(); }

 private:
  detail::LogLinearCurve curve_;
};

// Domestic (currency2) discount factor curve; DF(valuation) = 1.
class DiscountCurve {
 public:
  explicit DiscountCurve(std::vector<CurvePillar> pillars);

  double df_at(Date t) const { return curve_.value_at(t); }
  double df_at_years(double t) const { return curve_.value_at_days(t * 365.0); }

  Date valuation_date() const { return curve_.valuation_date(); }
  Date last_date() const { return curve_.last_date(); }
  bool covers(Date t) const { return curve_.covers(t); }
  const std::vector<CurvePillar>& pillars() const { return curve_.pillars(); }

 private:
  detail::LogLinearCurve curve_;
};

}  // namespace fxlv
