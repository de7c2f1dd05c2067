#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fxlv/calibrator.hpp"
#include "fxlv/grid_pricer.hpp"
#include "fxlv/sample_market.hpp"

using namespace fxlv;

TEST_CASE("avg_error") {
  CHECK(avg_error(std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(avg_error(std::vector(59, 0.0003)) == doctest::Approx(0.0003).epsilon(1e-14));

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);
  std::vector<double> f(37);
  for (double& v : f) v = draw(gen);
  double direct = 0.0;
  for (double v : f) direct += v * v;  // independent summation
  CHECK(avg_error(f) == doctest::Approx(std::sqrt(direct / 37.0)).epsilon(1e-14));
  CHECK_THROWS_AS(avg_error(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("lm_step hand-checked 2x2 case") {
  // A = I, f = (1,1), alpha = 1: (I + I) w = -(1,1) so w = (-1/2, -1/2).
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd f(2);
  f << 1.0, 1.0;
  const auto w = lm_step(A, f, 1.0);
  REQUIRE(w.has_value());
  CHECK((*w)[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK((*w)[1] == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("lm_step asymptotics") {
  std::mt19937 gen(8);
  std::normal_distribution<double> draw(0.0, 1.0);
  Eigen::MatrixXd A(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = draw(gen);
  Eigen::VectorXd f(4);
  for (int i = 0; i < 4; ++i) f[i] = draw(gen);

  SUBCASE("large alpha bends the step into the scaled gradient") {
    const double alpha = 1e10;
    const auto w = lm_step(A, f, alpha);
    REQUIRE(w.has_value());
    const Eigen::VectorXd gradient_step = -(A.transpose() * f) / alpha;
    CHECK((*w - gradient_step).norm() <= 1e-8 * gradient_step.norm());
  }

  SUBCASE("tiny alpha approaches the Newton step for square full-rank A") {
    const Eigen::MatrixXd As = A.topRows(3);
    const Eigen::VectorXd fs = f.head(3);
    const auto w = lm_step(As, fs, 1e-13);
    REQUIRE(w.has_value());
    const Eigen::VectorXd newton = -As.colPivHouseholderQr().solve(fs);
    CHECK((*w - newton).norm() <= 1e-6 * newton.norm());
  }
}

TEST_CASE("lm_checks") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd f(2);
  f << 1.0, 1.0;

  // w = 0: strict inequality fails.
  CHECK_FALSE(lm_checks(Eigen::VectorXd::Zero(2), A, f, f, 1.0));

  // A proper damped step on this quadratic: accepted.
  const auto w = lm_step(A, f, 1.0);
  Eigen::VectorXd f_after = f + A * (*w);  // affine model is exact here
  CHECK(lm_checks(*w, A, f, f_after, 1.0));

  // A step that increases the error: rejected regardless of direction.
  Eigen::VectorXd f_worse(2);
  f_worse << 2.0, 2.0;
  CHECK_FALSE(lm_checks(*w, A, f, f_worse, 1.0));
}

TEST_CASE("jacobian_fd recovers an affine map exactly") {
  std::mt19937 gen(5);
  std::normal_distribution<double> draw(0.0, 1.0);
  Eigen::MatrixXd B(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = draw(gen);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) b[i] = draw(gen);

  const auto fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return B * x + b; };
  Eigen::VectorXd x(3);
  x << 0.2, -0.4, 1.1;
  SolverSettings settings;
  const Eigen::MatrixXd A = jacobian_fd(fn, x, fn(x), settings);
  CHECK((A - B).norm() < 1e-8);
}

TEST_CASE("lm_solve drives an affine consistent system to zero in few iterations") {
  // Well-conditioned columns; the damped steps are then Gauss-Newton up to
  // the 1e-3-scale seed damping, which two halvings polish away.
  Eigen::MatrixXd B(6, 4);
  B.setZero();
  B(0, 0) = 1.5;
  B(1, 1) = 1.3;
  B(2, 2) = 1.1;
  B(3, 3) = 1.0;
  B.row(4) << 0.2, -0.1, 0.1, 0.2;
  B.row(5) << -0.1, 0.2, 0.2, -0.1;
  Eigen::VectorXd x_true(4);
  x_true << 0.03, -0.05, 0.04, -0.02;
  const Eigen::VectorXd b = -B * x_true;  // consistent: f(x_true) = 0

  const auto fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return B * x + b; };
  SolverSettings settings;
  settings.tol_f = 1e-10;
  const LmResult result = lm_solve(fn, Eigen::VectorXd::Zero(4), settings);
  CHECK(result.f.norm() <= 1e-10);
  CHECK(result.accepted_steps <= 3);
  CHECK(result.status == CalibrationStatus::converged_residual);
}

TEST_CASE("accepted-step error is monotone along the trace") {
  // A mildly nonlinear consistent system: root at x0 = 1, x1 = asin(0.4).
  const double root1 = std::asin(0.4);
  const auto fn = [root1](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd f(3);
    f[0] = x[0] * x[0] - 1.0;
    f[1] = std::sin(x[1]) - 0.4;
    f[2] = x[0] * x[1] - root1;
    return f;
  };
  SolverSettings settings;
  const LmResult result = lm_solve(fn, Eigen::VectorXd::Constant(2, 2.0), settings);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& entry : result.trace) {
    if (!entry.accepted) continue;
    CHECK(entry.f2 <= prev + 1e-15);
    prev = entry.f2;
  }
  CHECK(result.f.norm() < 1e-6);
  CHECK(result.accepted_steps > 0);
}

namespace {

CalibrationProblem small_problem(int grid_half_states = 20) {
  const SampleMarket market = make_sample_market();
  // A compact instrument set: 2W/3M/1Y ATM plus the 1Y 25-delta wings.
  auto instruments = resolve_instruments(
      market.snapshot,
      InstrumentSelection::parse({"2W:ATMF", "3M:ATMF", "1Y:ATMF,25C,25P"}));
  REQUIRE(instruments.size() == 5);

  std::vector<double> expiries;
  for (const auto& inst : instruments) expiries.push_back(inst.T);
  const auto time_pillars = LocalVolSurface::default_time_pillars(expiries, 6);
  const auto state_pillars = LocalVolSurface::uniform_state_pillars(3);
  LocalVolSurface initial = initial_surface_from_atm(market.snapshot, time_pillars,
                                                     state_pillars, 0.043, market.forward);
  CalibrationProblem problem(market.snapshot, std::move(instruments), std::move(initial));
  problem.grid_half_states = grid_half_states;
  return problem;
}

}  // namespace

TEST_CASE("residuals: exact prices give zero, scaled prices give the ratio") {
  CalibrationProblem problem = small_problem();
  const ResidualFunction fn(problem);
  Eigen::VectorXd x0(static_cast<Eigen::Index>(problem.initial_surface.param_count()));
  const auto init = problem.initial_surface.to_params();
  for (std::size_t j = 0; j < init.size(); ++j) x0[static_cast<Eigen::Index>(j)] = init[j];

  // Override the targets with the model's own prices: residuals vanish.
  CalibrationProblem fixed = problem;
  fixed.target_prices_override = fn.model_prices(problem.initial_surface);
  const ResidualFunction fn_fixed(fixed);
  CHECK(fn_fixed(x0).lpNorm<Eigen::Infinity>() < 1e-14);

  // Model prices at 1.5x the targets: residual is exactly 0.5 everywhere.
  for (double& c : fixed.target_prices_override) c /= 1.5;
  const ResidualFunction fn_scaled(fixed);
  const Eigen::VectorXd f = fn_scaled(x0);
  for (Eigen::Index i = 0; i < f.size(); ++i)
    CHECK(f[i] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("jacobian shape and a dead column beyond the horizon") {
  CalibrationProblem problem = small_problem();
  // Replace the surface with one whose last time pillars sit far beyond the
  // final expiry: those rows cannot influence any instrument.
  const auto state_pillars = LocalVolSurface::uniform_state_pillars(3);
  const std::vector<double> times{0.0, 0.5, 1.0, 5.0, 9.0};
  std::vector<double> vols(times.size() * 3, 0.043);
  problem.initial_surface =
      LocalVolSurface(times, state_pillars, vols, 0.043,
                      problem.initial_surface.forward());

  const ResidualFunction fn(problem);
  Eigen::VectorXd x(static_cast<Eigen::Index>(vols.size()));
  for (std::size_t j = 0; j < vols.size(); ++j) x[static_cast<Eigen::Index>(j)] = vols[j];
  SolverSettings settings;
  const Eigen::MatrixXd A =
      jacobian_fd([&fn](const Eigen::VectorXd& v) { return fn(v); }, x, fn(x), settings);
  CHECK(A.rows() == 5);
  CHECK(A.cols() == 15);
  // Rows at t = 5 and t = 9 start after the 1Y horizon: zero columns.
  for (Eigen::Index j = 9; j < 15; ++j) CHECK(A.col(j).norm() < 1e-10);
  // Near-the-money mid-surface parameters do move prices.
  CHECK(A.col(4).norm() > 1e-4);
}

TEST_CASE("calibrate at a fixed point stops immediately") {
  CalibrationProblem problem = small_problem();
  const ResidualFunction fn(problem);
  problem.target_prices_override = fn.model_prices(problem.initial_surface);
  const CalibrationReport report = calibrate(problem);
  CHECK(report.avg_error <= 1e-10);
  CHECK(report.status == CalibrationStatus::converged_residual);
  CHECK(report.accepted_steps <= 1);
}

TEST_CASE("self-consistency: recover grid prices from a bumped surface") {
  CalibrationProblem problem = small_problem();

  // Synthetic truth: bump the initial surface deterministically.
  auto true_params = problem.initial_surface.to_params();
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> bump(-0.004, 0.006);
  for (double& v : true_params) v += bump(gen);
  const LocalVolSurface true_surface =
      LocalVolSurface::from_params(problem.initial_surface, true_params);

  const ResidualFunction fn(problem);
  problem.target_prices_override = fn.model_prices(true_surface);

  const CalibrationReport report = calibrate(problem);
  CHECK(report.avg_error <= 1e-7);

  // Accepted-step monotonicity straight from the trace.
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& entry : report.trace) {
    if (!entry.accepted) continue;
    CHECK(entry.f2 <= prev + 1e-18);
    prev = entry.f2;
  }
}

TEST_CASE("calibration report is deterministic (grid backend)") {
  CalibrationProblem problem = small_problem(15);
  problem.settings.max_iterations = 4;
  const CalibrationReport a = calibrate(problem);
  const CalibrationReport b = calibrate(problem);
  CHECK(a.params == b.params);  // bitwise
  CHECK(a.residuals == b.residuals);
  CHECK(a.avg_error == b.avg_error);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].alpha == b.trace[i].alpha);
    CHECK(a.trace[i].f2 == b.trace[i].f2);
  }
}

TEST_CASE("report invariants: avg_error recomputes, params respect the floor") {
  CalibrationProblem problem = small_problem(15);
  problem.settings.max_iterations = 3;
  const CalibrationReport report = calibrate(problem);
  CHECK(avg_error(report.residuals) == doctest::Approx(report.avg_error).epsilon(1e-14));
  for (double v : report.params) CHECK(v >= kVolFloor);
}

TEST_CASE("MC backend residuals are deterministic and calibrate loosely") {
  CalibrationProblem problem = small_problem();
  problem.backend = PricerKind::monte_carlo;
  problem.mc_paths = 2000;
  problem.rng.seed = 42;
  problem.settings.max_iterations = 5;

  const ResidualFunction fn(problem);
  Eigen::VectorXd x0(static_cast<Eigen::Index>(problem.initial_surface.param_count()));
  const auto init = problem.initial_surface.to_params();
  for (std::size_t j = 0; j < init.size(); ++j) x0[static_cast<Eigen::Index>(j)] = init[j];
  CHECK(fn(x0) == fn(x0));  // common random numbers

  const CalibrationReport report = calibrate(problem);
  const Eigen::VectorXd f0 = fn(x0);
  CHECK(report.avg_error <= avg_error(std::vector<double>(
                                f0.data(), f0.data() + f0.size())) + 1e-15);
}
