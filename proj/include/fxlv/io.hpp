#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fxlv/calibrator.hpp"
#include "fxlv/curves.hpp"
#include "fxlv/deals.hpp"
#include "fxlv/market_data.hpp"
#include "fxlv/vol_surface.hpp"

namespace fxlv {

// Thrown on malformed input files; the CLI maps it to exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// curves CSV: header `date,forward` / `date,df`, dates as YYYYMMDD.
ForwardCurve load_forward_csv(const std::filesystem::path& file);
DiscountCurve load_discount_csv(const std::filesystem::path& file);
void save_forward_csv(const std::filesystem::path& file, const ForwardCurve& curve);
void save_discount_csv(const std::filesystem::path& file, const DiscountCurve& curve);

// vols CSV: header `tenor,expiry,kind,vol_pct`; percent converted to decimal.
std::vector<VolQuote> load_vols_csv(const std::filesystem::path& file);
void save_vols_csv(const std::filesystem::path& file, const std::vector<VolQuote>& quotes);

struct DealSet {
  std::vector<AmericanOption> americans;
  std::vector<AsianOption> asians;
  std::vector<EuropeanOption> europeans;
};

// deals JSON: array of objects with a `type` discriminator.
DealSet load_deals_json(const std::filesystem::path& file);
void save_deals_json(const std::filesystem::path& file, const DealSet& deals);

// Surface JSON round-trips every vol exactly (shortest-round-trip doubles).
void save_surface_json(const std::filesystem::path& file, const LocalVolSurface& surface);
LocalVolSurface load_surface_json(const std::filesystem::path& file,
                                  std::shared_ptr<const ForwardCurve> forward);

void save_validation_report_json(const std::filesystem::path& file,
                                 const ValidationReport& report);
void save_calibration_report_json(const std::filesystem::path& file,
                                  const CalibrationReport& report);
void save_trace_csv(const std::filesystem::path& file, const std::vector<TraceEntry>& trace);

}  // namespace fxlv
