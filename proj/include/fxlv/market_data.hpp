#pragma once

#include <string>
#include <vector>

#include "fxlv/curves.hpp"
#include "fxlv/date.hpp"

namespace fxlv {

enum class QuoteKind { atmf, call25, put25, call10, put10 };

std::string to_string(QuoteKind kind);
QuoteKind quote_kind_from_string(const std::string& s);

struct VolQuote {
  std::string tenor;  // label such as 1D, 1W, 1M, 1Y
  Date expiry;
  QuoteKind kind = QuoteKind::atmf;
  double vol = 0.0;  // decimal per annum
};

struct MarketSnapshot {
  MarketSnapshot(ForwardCurve forward, DiscountCurve discount, std::vector<VolQuote> quotes);

  ForwardCurve forward;
  DiscountCurve discount;
  std::vector<VolQuote> quotes;
  Date valuation;
};

struct ValidationIssue {
  std::string condition;  // "C1" or "C2"
  std::string tenor;
  std::string detail;
};

// Echoed smile descriptors, decimal units (dealers quote them in percent).
struct TenorButterflies {
  std::string tenor;
  Date expiry;
  double bf25 = 0.0;
  double bf10 = 0.0;
};

struct C1Term {
  std::string tenor;
  Date expiry;
  int days = 0;
  double variance_weight = 0.0;  // sigma_atm^2 * days
};

struct ValidationReport {
  bool pass = true;
  std::vector<ValidationIssue> violations;
  std::vector<C1Term> c1_terms;               // ATM tenors in expiry order
  std::vector<TenorButterflies> butterflies;  // tenors with full wings
};

// C1: ATM variance weights sigma^2 * (calendar days to expiry) nondecreasing
// across tenors. C2: per tenor with full wings, 0 <= BF25 <= BF10.
// Violations are report content, not faults.
ValidationReport validate_market(const MarketSnapshot& snapshot);

}  // namespace fxlv
