#include "fxlv/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fxlv {
namespace detail {

LogLinearCurve::LogLinearCurve(std::string name, std::vector<CurvePillar> pillars)
    : name_(std::move(name)), pillars_(std::move(pillars)) {
  if (pillars_.size() < 1)
    throw std::invalid_argument(name_ + ": curve needs at least one pillar");
  days_.reserve(pillars_.size());
  log_values_.reserve(pillars_.size());
  const Date base = pillars_.front().date;
  for (std::size_t i = 0; i < pillars_.size(); ++i) {
    if (i > 0 && !(pillars_[i].date > pillars_[i - 1].date))
      throw std::invalid_argument(name_ + ": pillar dates must be strictly increasing at " +
                                  pillars_[i].date.to_string());
    if (!(pillars_[i].value > 0.0))
      throw std::invalid_argument(name_ + ": pillar value must be positive at " +
                                  pillars_[i].date.to_string());
    days_.push_back(static_cast<double>(pillars_[i].date - base));
    log_values_.push_back(std::log(pillars_[i].value));
  }
}

double LogLinearCurve::value_at_days(double days) const {
  if (days < days_.front() - 1e-9 || days > days_.back() + 1e-9)
    throw std::out_of_range(name_ + ": date offset " + std::to_string(days) +
                            " outside pillar range [" + std::to_string(days_.front()) + ", " +
                            std::to_string(days_.back()) + "]");
  days = std::clamp(days, days_.front(), days_.back());
  const auto it = std::lower_bound(days_.begin(), days_.end(), days);
  const std::size_t hi = static_cast<std::size_t>(it - days_.begin());
  if (hi == 0 || days == days_[hi]) return pillars_[hi].value;
  const std::size_t lo = hi - 1;
  const double u = (days - days_[lo]) / (days_[hi] - days_[lo]);
  return std::exp(log_values_[lo] + u * (log_values_[hi] - log_values_[lo]));
}

}  // namespace detail

ForwardCurve::ForwardCurve(std::vector<CurvePillar> pillars)
    : curve_("ForwardCurve", std::move(pillars)) {}

DiscountCurve::DiscountCurve(std::vector<CurvePillar> pillars)
    : curve_("DiscountCurve", std::move(pillars)) {
  const auto& p = curve_.pillars();
  if (std::abs(p.front().value - 1.0) > 1e-12)
    throw std::invalid_argument("DiscountCurve: DF at valuation date must be 1, got " +
                                std::to_string(p.front().value));
  for (const auto& pillar : p)
    if (pillar.value > 1.0 + 1e-12)
      throw std::invalid_argument("DiscountCurve: DF above 1 at " + pillar.date.to_string());
}

}  // namespace fxlv
