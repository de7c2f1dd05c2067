#include "fxlv/vol_surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fxlv/normal.hpp"

namespace fxlv {

LocalVolSurface::LocalVolSurface(std::vector<double> time_pillars,
                                 std::vector<double> state_pillars, std::vector<double> vols,
                                 double c0, std::shared_ptr<const ForwardCurve> forward)
    : time_pillars_(std::move(time_pillars)),
      state_pillars_(std::move(state_pillars)),
      vols_(std::move(vols)),
      c0_(c0),
      forward_(std::move(forward)) {
  if (time_pillars_.empty() || state_pillars_.empty())
    throw std::invalid_argument("LocalVolSurface: empty pillar axis");
  for (std::size_t j = 1; j < time_pillars_.size(); ++j)
    if (!(time_pillars_[j] > time_pillars_[j - 1]))
      throw std::invalid_argument("LocalVolSurface: time pillars not strictly increasing");
  if (time_pillars_.front() < 0.0)
    throw std::invalid_argument("LocalVolSurface: negative time pillar");
  for (std::size_t k = 1; k < state_pillars_.size(); ++k)
    if (!(state_pillars_[k] > state_pillars_[k - 1]))
      throw std::invalid_argument("LocalVolSurface: state pillars not strictly increasing");
  if (state_pillars_.size() > 1 &&
      (std::abs(state_pillars_.front()) > 1e-15 || std::abs(state_pillars_.back() - 1.0) > 1e-15))
    throw std::invalid_argument("LocalVolSurface: state pillars must span [0, 1]");
  if (vols_.size() != time_pillars_.size() * state_pillars_.size())
    throw std::invalid_argument("LocalVolSurface: vol grid size mismatch");
  for (double v : vols_)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("LocalVolSurface: volatilities must be positive");
  if (!(c0_ > 0.0)) throw std::invalid_argument("LocalVolSurface: c0 must be positive");
  if (!forward_) throw std::invalid_argument("LocalVolSurface: missing forward curve");
}

double LocalVolSurface::state_coordinate(double t, double S) const {
  if (!(S > 0.0)) throw std::domain_error("state_coordinate: S must be positive");
  if (t < 0.0) throw std::domain_error("state_coordinate: t must be nonnegative");
  const double f = forward_->forward_at_years(t);
  const double denom = 1.3 * c0_ * std::sqrt(t + 1.0 / 365.25);
  return normal_cdf(std::log(S / f) / denom);
}

namespace {

// Index of the cell [p[i], p[i+1]] containing v, clamped to the pillar range.
std::size_t cell_index(const std::vector<double>& p, double v) {
  if (p.size() == 1) return 0;
  const auto it = std::upper_bound(p.begin(), p.end(), v);
  std::size_t hi = static_cast<std::size_t>(it - p.begin());
  hi = std::clamp<std::size_t>(hi, 1, p.size() - 1);
  return hi - 1;
}

double cell_fraction(const std::vector<double>& p, std::size_t lo, double v) {
  if (p.size() == 1) return 0.0;
  const double u = (v - p[lo]) / (p[lo + 1] - p[lo]);
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace

double LocalVolSurface::local_vol(double t, double S) const {
  // Clamp before the transform: beyond the pillar range the surface is frozen
  // at the edge row, and F_t is never read outside it.
  const double tc = std::clamp(t, time_pillars_.front(), time_pillars_.back());
  const double s = state_coordinate(tc, S);

  const std::size_t j = cell_index(time_pillars_, tc);
  const std::size_t k = cell_index(state_pillars_, s);
  const double u = cell_fraction(time_pillars_, j, tc);
  const double ws = cell_fraction(state_pillars_, k, s);

  const std::size_t K = state_pillars_.size();
  const std::size_t j1 = std::min(j + 1, time_pillars_.size() - 1);
  const std::size_t k1 = std::min(k + 1, K - 1);
  const double v00 = vols_[j * K + k];
  const double v01 = vols_[j * K + k1];
  const double v10 = vols_[j1 * K + k];
  const double v11 = vols_[j1 * K + k1];
  return (1.0 - u) * ((1.0 - ws) * v00 + ws * v01) + u * ((1.0 - ws) * v10 + ws * v11);
}

double LocalVolSurface::max_vol_at_time(double t) const {
  const double tc = std::clamp(t, time_pillars_.front(), time_pillars_.back());
  const std::size_t j = cell_index(time_pillars_, tc);
  const double u = cell_fraction(time_pillars_, j, tc);
  const std::size_t K = state_pillars_.size();
  const std::size_t j1 = std::min(j + 1, time_pillars_.size() - 1);
  double best = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    best = std::max(best, (1.0 - u) * vols_[j * K + k] + u * vols_[j1 * K + k]);
  return best;
}

LocalVolSurface LocalVolSurface::from_params(const LocalVolSurface& tmpl,
                                             std::span<const double> x, int* floored) {
  if (x.size() != tmpl.param_count())
    throw std::invalid_argument("from_params: expected " + std::to_string(tmpl.param_count()) +
                                " parameters, got " + std::to_string(x.size()));
  std::vector<double> vols(x.begin(), x.end());
  int count = 0;
  for (double& v : vols) {
    if (!std::isfinite(v))
      throw std::invalid_argument("from_params: non-finite volatility parameter");
    if (v <= kVolFloor) {
      v = kVolFloor;
      ++count;
    }
  }
  if (floored) *floored = count;
  return LocalVolSurface(tmpl.time_pillars_, tmpl.state_pillars_, std::move(vols), tmpl.c0_,
                         tmpl.forward_);
}

std::vector<double> LocalVolSurface::default_time_pillars(std::vector<double> expiry_years,
                                                          std::size_t count) {
  std::sort(expiry_years.begin(), expiry_years.end());
  expiry_years.erase(std::unique(expiry_years.begin(), expiry_years.end()), expiry_years.end());
  std::vector<double> pillars;
  pillars.push_back(0.0);
  for (double t : expiry_years)
    if (t > 0.0) pillars.push_back(t);
  if (pillars.size() > count)
    throw std::invalid_argument("default_time_pillars: more expiries than requested pillars");
  while (pillars.size() < count) {
    std::size_t widest = 0;
    for (std::size_t i = 1; i + 1 < pillars.size(); ++i)
      if (pillars[i + 1] - pillars[i] > pillars[widest + 1] - pillars[widest]) widest = i;
    const double a = pillars[widest];
    const double b = pillars[widest + 1];
    const double mid = a > 0.0 ? std::sqrt(a * b) : 0.5 * (a + b);
    pillars.insert(pillars.begin() + static_cast<std::ptrdiff_t>(widest) + 1, mid);
  }
  return pillars;
}

std::vector<double> LocalVolSurface::uniform_state_pillars(std::size_t count) {
  if (count < 2) throw std::invalid_argument("uniform_state_pillars: need at least 2");
  std::vector<double> s(count);
  for (std::size_t k = 0; k < count; ++k)
    s[k] = static_cast<double>(k) / static_cast<double>(count - 1);
  return s;
}

LocalVolSurface flat_surface(const LocalVolSurface& tmpl, double vol) {
  std::vector<double> vols(tmpl.param_count(), vol);
  return LocalVolSurface(tmpl.time_pillars(), tmpl.state_pillars(), std::move(vols), tmpl.c0(),
                         tmpl.forward());
}

}  // namespace fxlv
