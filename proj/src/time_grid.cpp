#include "fxlv/time_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace fxlv {

std::size_t TimeGrid::index_of(Date d) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || *it != d)
    throw std::out_of_range("TimeGrid: date " + d.to_string() + " not on the grid");
  return static_cast<std::size_t>(it - dates.begin());
}

bool TimeGrid::contains(Date d) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), d);
  return it != dates.end() && *it == d;
}

TimeGrid build_time_grid(Date valuation, std::span<const Date> special_dates, int max_gap_days) {
  if (max_gap_days < 1) throw std::invalid_argument("build_time_grid: max_gap_days < 1");

  std::vector<Date> anchors{valuation};
  for (Date d : special_dates) {
    if (d < valuation)
      throw std::invalid_argument("build_time_grid: special date " + d.to_string() +
                                  " before valuation");
    anchors.push_back(d);
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  if (anchors.size() < 2)
    throw std::invalid_argument("build_time_grid: empty horizon (no special date after valuation)");

  TimeGrid grid;
  for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
    grid.dates.push_back(anchors[a]);
    const int gap = anchors[a + 1] - anchors[a];
    if (gap > max_gap_days) {
      const int pieces = (gap + max_gap_days - 1) / max_gap_days;
      for (int j = 1; j < pieces; ++j)
        grid.dates.push_back(anchors[a] + (gap * j) / pieces);
    }
  }
  grid.dates.push_back(anchors.back());

  grid.years.reserve(grid.dates.size());
  for (Date d : grid.dates) grid.years.push_back(year_fraction(valuation, d));
  return grid;
}

}  // namespace fxlv
