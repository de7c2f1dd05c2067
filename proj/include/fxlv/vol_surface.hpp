#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fxlv/curves.hpp"

namespace fxlv {

// Vols below this are floored by from_params to keep the SDE well-posed.
inline constexpr double kVolFloor = 1e-6;

// Model volatility sigma(t, S) stored on a rectangular (time x state) grid.
// The state axis is s = Phi(ln(S/F_t) / (1.3 c0 sqrt(t + 1/365.25))) in [0,1];
// values are read off the grid with bilinear interpolation, t clamped to the
// pillar range. The flattened grid is the calibrator's parameter vector.
class LocalVolSurface {
 public:
  LocalVolSurface(std::vector<double> time_pillars, std::vector<double> state_pillars,
                  std::vector<double> vols,  // row-major, time-major
                  double c0, std::shared_ptr<const ForwardCurve> forward);

  double state_coordinate(double t, double S) const;
  double local_vol(double t, double S) const;

  // Largest sigma(t, s_k) over the state pillars; at fixed t the profile is
  // piecewise linear in s, so the pillar max is the global max in s.
  double max_vol_at_time(double t) const;

  std::vector<double> to_params() const { return vols_; }

  // Rebuilds a surface on the template's pillars from a parameter vector.
  // Values at or below kVolFloor are floored; *floored counts them.
  static LocalVolSurface from_params(const LocalVolSurface& tmpl, std::span<const double> x,
                                     int* floored = nullptr);

  std::size_t time_count() const { return time_pillars_.size(); }
  std::size_t state_count() const { return state_pillars_.size(); }
  std::size_t param_count() const { return vols_.size(); }
  const std::vector<double>& time_pillars() const { return time_pillars_; }
  const std::vector<double>& state_pillars() const { return state_pillars_; }
  const std::vector<double>& vols() const { return vols_; }
  double vol_at_node(std::size_t j, std::size_t k) const {
    return vols_[j * state_pillars_.size() + k];
  }
  double c0() const { return c0_; }
  const std::shared_ptr<const ForwardCurve>& forward() const { return forward_; }

  // Quote expiries plus t=0, padded to `count` pillars by geometric bisection
  // of the widest gaps.
  static std::vector<double> default_time_pillars(std::vector<double> expiry_years,
                                                  std::size_t count);
  static std::vector<double> uniform_state_pillars(std::size_t count);

 private:
  std::vector<double> time_pillars_;
  std::vector<double> state_pillars_;
  std::vector<double> vols_;
  double c0_;
  std::shared_ptr<const ForwardCurve> forward_;
};

// Flat surface on the template pillars; handy for Black-Scholes limits.
LocalVolSurface flat_surface(const LocalVolSurface& tmpl, double vol);

}  // namespace fxlv
