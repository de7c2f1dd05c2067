#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fxlv/curves.hpp"
#include "fxlv/deals.hpp"
#include "fxlv/reference_pricing.hpp"
#include "fxlv/time_grid.hpp"
#include "fxlv/vol_surface.hpp"

namespace fxlv {

// One quaternary step of the Brownian increment: exact mean and variance,
// first-order accurate in dt.
struct QuaternaryBranches {
  std::array<double, 4> offset;
  std::array<double, 4> weight;
};

QuaternaryBranches quaternary_branches(double dt, double sigma);

// Second-order 3-point weights for ξ = (x* - x_j)/Δx: (½(ξ²-ξ), 1-ξ², ½(ξ²+ξ)).
// They sum to 1 and reproduce linear and quadratic node functions exactly;
// values may be negative (stencil coefficients, not literal probabilities).
std::array<double, 3> interp_weights(double xi);

// One branch landing: stencil centered at node index `center` of the next
// slice, carrying this branch's quaternary weight.
struct BranchLanding {
  std::int32_t center = 0;
  double prob = 0.0;
  std::array<double, 3> w{};
};

struct GridSlice {
  Date date;
  double t = 0.0;         // years from valuation
  double variance = 0.0;  // V[x(t^n)] from the recursion
  double dx = 0.0;        // node spacing (0 on the root slice)
  double mu = 0.0;        // drift, filled by forward propagation
  int half_width = 0;     // I; the root slice stores a single node
  std::vector<double> x;      // coordinates, symmetric about 0
  std::vector<double> state;  // S = exp(x + mu)
  std::vector<double> q;      // arrival probabilities
  std::vector<std::array<BranchLanding, 4>> branches;  // to the next slice
};

struct GridDiagnostics {
  long clamp_count = 0;            // branch points pushed back onto the grid
  double max_row_sum_err = 0.0;    // max |sum of a transition row - 1|
  double max_q_sum_err = 0.0;      // max per-slice |sum q - 1|
  double max_martingale_err = 0.0; // max per-slice |sum q S / F - 1|
  double min_q = 0.0;              // most negative arrival weight (monitored, never clipped)
  std::vector<double> slice_mu;
  std::vector<double> slice_q_sum;
  std::vector<double> slice_martingale_err;
  std::vector<long> slice_clamp_count;
};

struct GridField {
  TimeGrid time_grid;
  int half_states = 0;
  std::vector<GridSlice> slices;
  GridDiagnostics diagnostics;
  bool propagated = false;

  const GridSlice& slice(std::size_t n) const { return slices[n]; }
  std::size_t slice_count() const { return slices.size(); }
};

// Stage 1: coordinates and the variance recursion
// V[x(t^n)] = V[x(t^{n-1})] + sigma_max^2 Δt, half width 5·sqrt(V), 2I+1 nodes.
GridField build_state_grid(const TimeGrid& grid, const LocalVolSurface& surface,
                           int half_states);

// Stage 2: transition rows, arrival probabilities and drifts so that
// sum_k q^n_k S^n_k = F(t^n) at every slice.
void forward_propagate(GridField& field, const LocalVolSurface& surface,
                       const ForwardCurve& forward);

// Materialized combined row p^{n}_{i j} from node i of slice n to slice n+1.
// Keys are node indices in -I..I of the target slice.
std::map<int, double> transition_row(const GridField& field, std::size_t n, int node);

// Backward propagation with the early-exercise comparison inside the window.
double price_american(const GridField& field, const AmericanOption& deal,
                      const DiscountCurve& discount);

// Same roll-back without exercise; mostly a test cross-check.
double price_european_backward(const GridField& field, const EuropeanOption& deal,
                               const DiscountCurve& discount);

// Forward-sweep European prices off the arrival probabilities; one grid build
// amortizes an entire calibration instrument set. Per unit notional.
double price_european_on_grid(const GridField& field, const EuropeanOption& deal,
                              const DiscountCurve& discount);
std::vector<double> price_instruments_on_grid(const GridField& field,
                                              std::span<const InstrumentSpec> instruments);

}  // namespace fxlv
