#pragma once

#include <span>
#include <vector>

#include "fxlv/date.hpp"

namespace fxlv {

// Shared discretization of [valuation, horizon]: contains every special date
// and no gap wider than max_gap_days (gaps are filled uniformly).
struct TimeGrid {
  std::vector<Date> dates;   // dates[0] = valuation
  std::vector<double> years; // ACT/365 from valuation

  std::size_t size() const { return dates.size(); }
  Date valuation() const { return dates.front(); }

  // Index of an exact grid date; throws if the date was never collected.
  std::size_t index_of(Date d) const;
  bool contains(Date d) const;
};

TimeGrid build_time_grid(Date valuation, std::span<const Date> special_dates,
                         int max_gap_days = 3);

}  // namespace fxlv
