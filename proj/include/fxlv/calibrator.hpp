#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fxlv/market_data.hpp"
#include "fxlv/mc_pricer.hpp"
#include "fxlv/reference_pricing.hpp"
#include "fxlv/time_grid.hpp"
#include "fxlv/vol_surface.hpp"

namespace fxlv {

enum class PricerKind { grid, monte_carlo };

struct SolverSettings {
  int max_iterations = 100;
  double tol_f = 1e-6;        // stop when ||f|| drops below
  double tol_x = 1e-8;        // stop when ||w||_inf drops below
  double alpha_min = 1e-12;
  double alpha_max = 1e12;
  double bump_floor = 1e-4;   // h = max(bump_floor, bump_rel * |x_j|)
  double bump_rel = 1e-3;
  int threads = 0;            // 0 = hardware concurrency
};

struct CalibrationProblem {
  CalibrationProblem(MarketSnapshot market_, std::vector<InstrumentSpec> instruments_,
                     LocalVolSurface initial_surface_)
      : market(std::move(market_)),
        instruments(std::move(instruments_)),
        initial_surface(std::move(initial_surface_)) {}

  MarketSnapshot market;
  std::vector<InstrumentSpec> instruments;  // defines m and the residual order
  LocalVolSurface initial_surface;
  // Target prices c_i; empty means the Black-Scholes prices of the quotes.
  // Synthetic self-consistency studies pass model-generated prices here.
  std::vector<double> target_prices_override;
  PricerKind backend = PricerKind::grid;
  int grid_half_states = 50;
  int mc_paths = 20000;
  RngSpec rng;
  int max_gap_days = 3;
  SolverSettings settings;
};

// Deterministic pricing bridge: x -> f(x) with f_i = y_i(x)/c_i - 1. The time
// grid, market prices and resolution are frozen at construction, so residuals
// are a pure function of x (common random numbers for the MC backend).
class ResidualFunction {
 public:
  explicit ResidualFunction(const CalibrationProblem& problem);

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

  std::size_t residual_count() const { return market_prices_.size(); }
  std::size_t param_count() const { return problem_->initial_surface.param_count(); }
  const std::vector<double>& market_prices() const { return market_prices_; }
  std::vector<double> model_prices(const LocalVolSurface& surface) const;

 private:
  const CalibrationProblem* problem_;
  TimeGrid time_grid_;
  std::vector<double> market_prices_;
};

struct TraceEntry {
  int iteration = 0;
  double alpha = 0.0;
  double f2 = 0.0;      // ||f||^2 after the trial step
  double w_norm = 0.0;  // ||w||_inf
  bool accepted = false;
};

enum class CalibrationStatus { converged_residual, converged_step, max_iterations, stalled };

std::string to_string(CalibrationStatus status);

struct CalibrationReport {
  std::vector<double> params;
  std::vector<double> residuals;  // f_i at the final point
  double avg_error = 0.0;         // sqrt(mean f_i^2)
  std::vector<TraceEntry> trace;  // every trial step, accepted flag set
  int accepted_steps = 0;
  int rejected_steps = 0;
  int floored_params = 0;  // sigma values floored by from_params at the end
  CalibrationStatus status = CalibrationStatus::max_iterations;
  std::vector<std::string> instrument_labels;
  int residual_evaluations = 0;
};

// Forward differences, column j = (f(x + h e_j) - f(x)) / h. Columns are
// independent and evaluated concurrently.
Eigen::MatrixXd jacobian_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& f_at_x,
                            const SolverSettings& settings);

// Solves (A^T A + alpha I) w = -A^T f by LLT; empty when the factorization
// fails, signalling the caller to increase alpha.
std::optional<Eigen::VectorXd> lm_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& f,
                                       double alpha);

// Accept iff w^T (-A^T f + alpha w) > 0 (still a descent direction) and the
// step does not increase ||f||^2.
bool lm_checks(const Eigen::VectorXd& w, const Eigen::MatrixXd& A, const Eigen::VectorXd& f_at_x,
               const Eigen::VectorXd& f_at_x_plus_w, double alpha);

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd f;
  std::vector<TraceEntry> trace;
  CalibrationStatus status = CalibrationStatus::max_iterations;
  int accepted_steps = 0;
  int rejected_steps = 0;
  int residual_evaluations = 0;
};

// The damped iteration: halve alpha on acceptance, double on rejection, stop
// on small ||f||, small ||w||, damping blow-up or the iteration cap.
LmResult lm_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                  Eigen::VectorXd x0, const SolverSettings& settings);

double avg_error(std::span<const double> residuals);

CalibrationReport calibrate(const CalibrationProblem& problem);

// Flat-in-state initializer at the ATM term-structure vol per time pillar.
LocalVolSurface initial_surface_from_atm(const MarketSnapshot& market,
                                         const std::vector<double>& time_pillars,
                                         const std::vector<double>& state_pillars, double c0,
                                         std::shared_ptr<const ForwardCurve> forward);

}  // namespace fxlv
