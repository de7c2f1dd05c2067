#include "fxlv/calibrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fxlv/grid_pricer.hpp"

namespace fxlv {

std::string to_string(CalibrationStatus status) {
  switch (status) {
    case CalibrationStatus::converged_residual: return "converged_residual";
    case CalibrationStatus::converged_step: return "converged_step";
    case CalibrationStatus::max_iterations: return "max_iterations";
    case CalibrationStatus::stalled: return "stalled";
  }
  return "unknown";
}

ResidualFunction::ResidualFunction(const CalibrationProblem& problem) : problem_(&problem) {
  if (problem.instruments.empty())
    throw std::invalid_argument("ResidualFunction: no instruments selected");
  std::vector<Date> expiries;
  expiries.reserve(problem.instruments.size());
  for (const auto& inst : problem.instruments) expiries.push_back(inst.expiry);
  time_grid_ = build_time_grid(problem.market.valuation, expiries, problem.max_gap_days);
  if (!problem.target_prices_override.empty()) {
    if (problem.target_prices_override.size() != problem.instruments.size())
      throw std::invalid_argument("ResidualFunction: target price override length mismatch");
    market_prices_ = problem.target_prices_override;
  } else {
    market_prices_ = market_price_vector(problem.instruments);
  }
  for (std::size_t i = 0; i < market_prices_.size(); ++i)
    if (!(market_prices_[i] > 0.0))
      throw std::invalid_argument("ResidualFunction: non-positive market price for " +
                                  problem.instruments[i].label);
}

std::vector<double> ResidualFunction::model_prices(const LocalVolSurface& surface) const {
  const CalibrationProblem& p = *problem_;
  if (p.backend == PricerKind::grid) {
    GridField field = build_state_grid(time_grid_, surface, p.grid_half_states);
    forward_propagate(field, surface, p.market.forward);
    return price_instruments_on_grid(field, p.instruments);
  }
  const PathSet paths = generate_paths(surface, p.market.forward, time_grid_, p.mc_paths, p.rng);
  return price_instruments_mc(paths, p.instruments);
}

Eigen::VectorXd ResidualFunction::operator()(const Eigen::VectorXd& x) const {
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  const LocalVolSurface surface = LocalVolSurface::from_params(problem_->initial_surface, xs);
  const std::vector<double> y = model_prices(surface);
  Eigen::VectorXd f(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    f[static_cast<Eigen::Index>(i)] = y[i] / market_prices_[i] - 1.0;
    if (!std::isfinite(f[static_cast<Eigen::Index>(i)]))
      throw std::runtime_error("residuals: non-finite model price for " +
                               problem_->instruments[i].label);
  }
  return f;
}

Eigen::MatrixXd jacobian_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& f_at_x,
                            const SolverSettings& settings) {
  const Eigen::Index m = f_at_x.size();
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(m, n);

  unsigned threads = settings.threads > 0 ? static_cast<unsigned>(settings.threads)
                                          : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min(threads, static_cast<unsigned>(n)));

  std::atomic<Eigen::Index> cursor{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const Eigen::Index j = cursor.fetch_add(1);
      if (j >= n || failed.load()) return;
      const double h = std::max(settings.bump_floor, settings.bump_rel * std::abs(x[j]));
      Eigen::VectorXd xb = x;
      xb[j] += h;
      try {
        jac.col(j) = (fn(xb) - f_at_x) / h;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true))
          first_error = "jacobian_fd: column " + std::to_string(j) + ": " + e.what();
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(first_error);
  return jac;
}

std::optional<Eigen::VectorXd> lm_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& f,
                                       double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("lm_step: alpha must be positive");
  Eigen::MatrixXd lhs = A.transpose() * A;
  lhs.diagonal().array() += alpha;
  const Eigen::VectorXd rhs = -A.transpose() * f;
  const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd w = llt.solve(rhs);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0 && (lhs * w - rhs).norm() > 1e-10 * rhs_norm) {
    // One refinement pass; reject the factorization if it still cannot hit
    // the linear-solve tolerance.
    w += llt.solve(rhs - lhs * w);
    if ((lhs * w - rhs).norm() > 1e-10 * rhs_norm) return std::nullopt;
  }
  return w;
}

bool lm_checks(const Eigen::VectorXd& w, const Eigen::MatrixXd& A, const Eigen::VectorXd& f_at_x,
               const Eigen::VectorXd& f_at_x_plus_w, double alpha) {
  const double direction = w.dot(-A.transpose() * f_at_x + alpha * w);
  if (!(direction > 0.0)) return false;
  return f_at_x_plus_w.squaredNorm() <= f_at_x.squaredNorm();
}

LmResult lm_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                  Eigen::VectorXd x0, const SolverSettings& settings) {
  LmResult result;
  result.x = std::move(x0);
  result.f = fn(result.x);
  result.residual_evaluations = 1;
  if (!result.f.allFinite())
    throw std::runtime_error("lm_solve: non-finite residuals at the initial point");

  double alpha = 0.0;  // seeded from the first Jacobian
  for (int iteration = 0; iteration < settings.max_iterations; ++iteration) {
    if (result.f.norm() <= settings.tol_f) {
      result.status = CalibrationStatus::converged_residual;
      return result;
    }

    const Eigen::MatrixXd A = jacobian_fd(fn, result.x, result.f, settings);
    result.residual_evaluations += static_cast<int>(A.cols());
    if (iteration == 0) {
      alpha = 1e-3 * A.squaredNorm() / static_cast<double>(A.cols());
      alpha = std::clamp(alpha, settings.alpha_min, settings.alpha_max);
    }

    bool accepted = false;
    while (!accepted) {
      const auto w = lm_step(A, result.f, alpha);
      if (w) {
        const Eigen::VectorXd x_trial = result.x + *w;
        const Eigen::VectorXd f_trial = fn(x_trial);
        ++result.residual_evaluations;
        const double w_norm = w->lpNorm<Eigen::Infinity>();
        const bool ok = lm_checks(*w, A, result.f, f_trial, alpha);
        result.trace.push_back({iteration, alpha, f_trial.squaredNorm(), w_norm, ok});
        if (ok) {
          result.x += *w;
          result.f = f_trial;
          ++result.accepted_steps;
          accepted = true;
          alpha = std::max(0.5 * alpha, settings.alpha_min);
        } else {
          ++result.rejected_steps;
        }
        // The proposed move has shrunk to nothing: an optimizing point,
        // whether or not this last trial was taken.
        if (w_norm <= settings.tol_x) {
          result.status = CalibrationStatus::converged_step;
          return result;
        }
        if (accepted) break;
      } else {
        result.trace.push_back({iteration, alpha, result.f.squaredNorm(), 0.0, false});
        ++result.rejected_steps;
      }
      alpha *= 2.0;
      if (alpha > settings.alpha_max) {
        result.status = CalibrationStatus::stalled;
        return result;
      }
    }
  }
  result.status = result.f.norm() <= settings.tol_f ? CalibrationStatus::converged_residual
                                                    : CalibrationStatus::max_iterations;
  return result;
}

double avg_error(std::span<const double> residuals) {
  if (residuals.empty()) throw std::invalid_argument("avg_error: empty residual vector");
  double sum = 0.0;
  for (double f : residuals) sum += f * f;
  return std::sqrt(sum / static_cast<double>(residuals.size()));
}

CalibrationReport calibrate(const CalibrationProblem& problem) {
  const ResidualFunction residual_fn(problem);
  Eigen::VectorXd x0(static_cast<Eigen::Index>(problem.initial_surface.param_count()));
  const std::vector<double> init = problem.initial_surface.to_params();
  for (std::size_t j = 0; j < init.size(); ++j) x0[static_cast<Eigen::Index>(j)] = init[j];

  LmResult lm = lm_solve([&residual_fn](const Eigen::VectorXd& x) { return residual_fn(x); },
                         std::move(x0), problem.settings);

  CalibrationReport report;
  report.trace = std::move(lm.trace);
  report.accepted_steps = lm.accepted_steps;
  report.rejected_steps = lm.rejected_steps;
  report.residual_evaluations = lm.residual_evaluations;
  report.status = lm.status;
  report.params.assign(lm.x.data(), lm.x.data() + lm.x.size());
  report.residuals.assign(lm.f.data(), lm.f.data() + lm.f.size());
  report.avg_error = avg_error(report.residuals);
  for (const auto& inst : problem.instruments) report.instrument_labels.push_back(inst.label);

  // The reported parameters are the floored surface values, so that the
  // report round-trips exactly through from_params.
  const LocalVolSurface final_surface = LocalVolSurface::from_params(
      problem.initial_surface, std::span<const double>(report.params), &report.floored_params);
  report.params = final_surface.to_params();
  return report;
}

LocalVolSurface initial_surface_from_atm(const MarketSnapshot& market,
                                         const std::vector<double>& time_pillars,
                                         const std::vector<double>& state_pillars, double c0,
                                         std::shared_ptr<const ForwardCurve> forward) {
  // ATM term structure sorted by expiry.
  std::vector<std::pair<double, double>> atm;  // (T, vol)
  for (const auto& q : market.quotes)
    if (q.kind == QuoteKind::atmf)
      atm.emplace_back(year_fraction(market.valuation, q.expiry), q.vol);
  std::sort(atm.begin(), atm.end());
  if (atm.empty())
    throw std::invalid_argument("initial_surface_from_atm: market has no ATM quotes");

  auto atm_at = [&atm](double t) {
    if (t <= atm.front().first) return atm.front().second;
    if (t >= atm.back().first) return atm.back().second;
    const auto it = std::upper_bound(atm.begin(), atm.end(), std::make_pair(t, 0.0));
    const auto lo = it - 1;
    const double u = (t - lo->first) / (it->first - lo->first);
    return lo->second + u * (it->second - lo->second);
  };

  std::vector<double> vols;
  vols.reserve(time_pillars.size() * state_pillars.size());
  for (double t : time_pillars) {
    const double v = atm_at(t);
    for (std::size_t k = 0; k < state_pillars.size(); ++k) vols.push_back(v);
  }
  return LocalVolSurface(time_pillars, state_pillars, std::move(vols), c0, std::move(forward));
}

}  // namespace fxlv
