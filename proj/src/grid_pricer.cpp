#include "fxlv/grid_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fxlv {

QuaternaryBranches quaternary_branches(double dt, double sigma) {
  if (!(dt > 0.0) || !(sigma > 0.0))
    throw std::domain_error("quaternary_branches: dt and sigma must be positive");
  const double wide = sigma * std::sqrt(3.0 * dt);
  const double narrow = sigma * std::sqrt(dt / 3.0);
  return {{-wide, -narrow, narrow, wide}, {0.125, 0.375, 0.375, 0.125}};
}

std::array<double, 3> interp_weights(double xi) {
  return {0.5 * (xi * xi - xi), 1.0 - xi * xi, 0.5 * (xi * xi + xi)};
}

GridField build_state_grid(const TimeGrid& grid, const LocalVolSurface& surface,
                           int half_states) {
  if (half_states < 1) throw std::invalid_argument("build_state_grid: need I >= 1");
  if (grid.size() < 2) throw std::invalid_argument("build_state_grid: degenerate time grid");

  GridField field;
  field.time_grid = grid;
  field.half_states = half_states;
  field.slices.resize(grid.size());

  // Root slice: zero variance, one node at x = 0.
  field.slices[0].date = grid.dates[0];
  field.slices[0].t = grid.years[0];
  field.slices[0].x = {0.0};
  field.slices[0].state = {0.0};
  field.slices[0].q = {1.0};

  const int count = 2 * half_states + 1;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    GridSlice& s = field.slices[n];
    s.date = grid.dates[n];
    s.t = grid.years[n];
    const double dt = grid.years[n] - grid.years[n - 1];
    const double sigma_max = surface.max_vol_at_time(grid.years[n]);
    s.variance = field.slices[n - 1].variance + sigma_max * sigma_max * dt;
    s.half_width = half_states;
    const double half_span = 5.0 * std::sqrt(s.variance);
    s.dx = half_span / half_states;
    s.x.resize(count);
    for (int i = -half_states; i <= half_states; ++i)
      s.x[static_cast<std::size_t>(i + half_states)] =
          half_span * static_cast<double>(i) / static_cast<double>(half_states);
    s.state.assign(count, 0.0);
    s.q.assign(count, 0.0);
  }
  return field;
}

namespace {

// Transition rows from slice n (states known) into slice n+1 coordinates.
void build_branches(GridField& field, const LocalVolSurface& surface, std::size_t n,
                    long& clamp_count) {
  GridSlice& src = field.slices[n];
  const GridSlice& dst = field.slices[n + 1];
  const double dt = dst.t - src.t;
  const int count = 2 * dst.half_width + 1;

  src.branches.resize(src.x.size());
  for (std::size_t a = 0; a < src.x.size(); ++a) {
    const double sigma = surface.local_vol(src.t, src.state[a]);
    const auto br = quaternary_branches(dt, sigma);
    for (int b = 0; b < 4; ++b) {
      const double target = src.x[a] + br.offset[static_cast<std::size_t>(b)];
      // Nearest destination node, pulled inside so the 3-point stencil exists.
      long nearest = std::lround((target - dst.x[0]) / dst.dx);
      const long center = std::clamp<long>(nearest, 1, count - 2);
      if (center != nearest) ++clamp_count;
      const double xi = (target - dst.x[static_cast<std::size_t>(center)]) / dst.dx;
      BranchLanding& landing = src.branches[a][static_cast<std::size_t>(b)];
      landing.center = static_cast<std::int32_t>(center);
      landing.prob = br.weight[static_cast<std::size_t>(b)];
      landing.w = interp_weights(xi);
    }
  }
}

}  // namespace

void forward_propagate(GridField& field, const LocalVolSurface& surface,
                       const ForwardCurve& forward) {
  GridDiagnostics diag;
  diag.slice_mu.resize(field.slice_count());
  diag.slice_q_sum.resize(field.slice_count());
  diag.slice_martingale_err.resize(field.slice_count());
  diag.slice_clamp_count.assign(field.slice_count(), 0);

  GridSlice& root = field.slices[0];
  const double f0 = forward.forward_at(root.date);
  root.mu = std::log(f0);
  root.state[0] = f0;
  root.q[0] = 1.0;
  diag.slice_mu[0] = root.mu;
  diag.slice_q_sum[0] = 1.0;
  diag.slice_martingale_err[0] = 0.0;

  for (std::size_t n = 0; n + 1 < field.slice_count(); ++n) {
    long clamps = 0;
    build_branches(field, surface, n, clamps);
    diag.slice_clamp_count[n] = clamps;
    diag.clamp_count += clamps;

    const GridSlice& src = field.slices[n];
    GridSlice& dst = field.slices[n + 1];
    std::fill(dst.q.begin(), dst.q.end(), 0.0);
    for (std::size_t a = 0; a < src.x.size(); ++a) {
      const double qa = src.q[a];
      if (qa == 0.0) continue;
      for (const BranchLanding& landing : src.branches[a]) {
        const double pq = qa * landing.prob;
        const std::size_t c = static_cast<std::size_t>(landing.center);
        dst.q[c - 1] += pq * landing.w[0];
        dst.q[c] += pq * landing.w[1];
        dst.q[c + 1] += pq * landing.w[2];
      }
    }

    // Closed-form drift: exp(mu) factors out of sum q exp(x + mu) = F.
    double q_sum = 0.0;
    double qe_sum = 0.0;
    for (std::size_t k = 0; k < dst.q.size(); ++k) {
      q_sum += dst.q[k];
      qe_sum += dst.q[k] * std::exp(dst.x[k]);
      diag.min_q = std::min(diag.min_q, dst.q[k]);
    }
    const double f = forward.forward_at(dst.date);
    if (!(qe_sum > 0.0) || !std::isfinite(qe_sum))
      throw std::runtime_error("forward_propagate: degenerate grid at slice " +
                               std::to_string(n + 1) + " (" + dst.date.to_string() +
                               "), sum q exp(x) = " + std::to_string(qe_sum));
    dst.mu = std::log(f / qe_sum);

    double qs_sum = 0.0;
    const double e_mu = std::exp(dst.mu);
    for (std::size_t k = 0; k < dst.state.size(); ++k) {
      dst.state[k] = std::exp(dst.x[k]) * e_mu;
      qs_sum += dst.q[k] * dst.state[k];
    }

    diag.slice_mu[n + 1] = dst.mu;
    diag.slice_q_sum[n + 1] = q_sum;
    diag.slice_martingale_err[n + 1] = qs_sum / f - 1.0;
    diag.max_q_sum_err = std::max(diag.max_q_sum_err, std::abs(q_sum - 1.0));
    diag.max_martingale_err =
        std::max(diag.max_martingale_err, std::abs(diag.slice_martingale_err[n + 1]));
  }

  // Row sums are 1 analytically; track the realized round-off for audit.
  for (std::size_t n = 0; n + 1 < field.slice_count(); ++n) {
    for (const auto& row : field.slices[n].branches) {
      double sum = 0.0;
      for (const BranchLanding& landing : row)
        sum += landing.prob * (landing.w[0] + landing.w[1] + landing.w[2]);
      diag.max_row_sum_err = std::max(diag.max_row_sum_err, std::abs(sum - 1.0));
    }
  }

  field.diagnostics = std::move(diag);
  field.propagated = true;
}

std::map<int, double> transition_row(const GridField& field, std::size_t n, int node) {
  if (n + 1 >= field.slice_count())
    throw std::out_of_range("transition_row: no slice after " + std::to_string(n));
  const GridSlice& src = field.slices[n];
  if (src.branches.empty())
    throw std::logic_error("transition_row: forward propagation has not run");
  const int half = src.half_width;
  if (node < -half || node > half)
    throw std::out_of_range("transition_row: node outside slice");
  const auto& row = src.branches[static_cast<std::size_t>(node + half)];
  const int dst_half = field.slices[n + 1].half_width;
  std::map<int, double> combined;
  for (const BranchLanding& landing : row)
    for (int k = -1; k <= 1; ++k)
      combined[landing.center + k - dst_half] +=
          landing.prob * landing.w[static_cast<std::size_t>(k + 1)];
  return combined;
}

namespace {

void require_propagated(const GridField& field, const char* who) {
  if (!field.propagated)
    throw std::logic_error(std::string(who) + ": grid field not forward-propagated");
}

// Discounted expectation roll-back from slice n+1 values to slice n.
std::vector<double> roll_back(const GridField& field, std::size_t n,
                              const std::vector<double>& next, double df_ratio) {
  const GridSlice& src = field.slices[n];
  std::vector<double> value(src.x.size(), 0.0);
  for (std::size_t a = 0; a < src.x.size(); ++a) {
    double acc = 0.0;
    for (const BranchLanding& landing : src.branches[a]) {
      const std::size_t c = static_cast<std::size_t>(landing.center);
      acc += landing.prob *
             (landing.w[0] * next[c - 1] + landing.w[1] * next[c] + landing.w[2] * next[c + 1]);
    }
    value[a] = df_ratio * acc;
  }
  return value;
}

}  // namespace

double price_american(const GridField& field, const AmericanOption& deal,
                      const DiscountCurve& discount) {
  require_propagated(field, "price_american");
  const std::size_t expiry_slice = field.time_grid.index_of(deal.exercise_end);
  const double sign = cp_sign(deal.cp);

  const GridSlice& terminal = field.slices[expiry_slice];
  std::vector<double> value(terminal.x.size());
  for (std::size_t k = 0; k < value.size(); ++k)
    value[k] = std::max(sign * (terminal.state[k] - deal.strike), 0.0);

  for (std::size_t n = expiry_slice; n-- > 0;) {
    const GridSlice& s = field.slices[n];
    const double df_ratio =
        discount.df_at(field.slices[n + 1].date) / discount.df_at(s.date);
    value = roll_back(field, n, value, df_ratio);
    if (s.date >= deal.exercise_start && s.date <= deal.exercise_end) {
      for (std::size_t k = 0; k < value.size(); ++k)
        value[k] = std::max(value[k], sign * (s.state[k] - deal.strike));
    }
  }
  return deal.notional * value[0];
}

double price_european_backward(const GridField& field, const EuropeanOption& deal,
                               const DiscountCurve& discount) {
  require_propagated(field, "price_european_backward");
  const std::size_t expiry_slice = field.time_grid.index_of(deal.expiry);
  const double sign = cp_sign(deal.cp);

  const GridSlice& terminal = field.slices[expiry_slice];
  std::vector<double> value(terminal.x.size());
  for (std::size_t k = 0; k < value.size(); ++k)
    value[k] = std::max(sign * (terminal.state[k] - deal.strike), 0.0);
  for (std::size_t n = expiry_slice; n-- > 0;) {
    const double df_ratio =
        discount.df_at(field.slices[n + 1].date) / discount.df_at(field.slices[n].date);
    value = roll_back(field, n, value, df_ratio);
  }
  return deal.notional * value[0];
}

double price_european_on_grid(const GridField& field, const EuropeanOption& deal,
                              const DiscountCurve& discount) {
  require_propagated(field, "price_european_on_grid");
  const std::size_t expiry_slice = field.time_grid.index_of(deal.expiry);
  const GridSlice& s = field.slices[expiry_slice];
  const double sign = cp_sign(deal.cp);
  double acc = 0.0;
  for (std::size_t k = 0; k < s.q.size(); ++k)
    acc += s.q[k] * std::max(sign * (s.state[k] - deal.strike), 0.0);
  return deal.notional * discount.df_at(deal.expiry) * acc;
}

std::vector<double> price_instruments_on_grid(const GridField& field,
                                              std::span<const InstrumentSpec> instruments) {
  require_propagated(field, "price_instruments_on_grid");
  std::vector<double> prices;
  prices.reserve(instruments.size());
  for (const auto& inst : instruments) {
    const std::size_t n = field.time_grid.index_of(inst.expiry);
    const GridSlice& s = field.slices[n];
    const double sign = cp_sign(inst.cp);
    double acc = 0.0;
    for (std::size_t k = 0; k < s.q.size(); ++k)
      acc += s.q[k] * std::max(sign * (s.state[k] - inst.strike), 0.0);
    prices.push_back(inst.df * acc);
  }
  return prices;
}

}  // namespace fxlv
