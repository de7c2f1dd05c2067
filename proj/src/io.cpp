#include "fxlv/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fxlv {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // trim
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  return fields;
}

std::ifstream open_or_throw(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string() + ": cannot open");
  return in;
}

double parse_double(const std::string& s, const std::filesystem::path& file, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

Date parse_date(const std::string& s, const std::filesystem::path& file, int line_no) {
  try {
    return Date::from_yyyymmdd(std::stol(s));
  } catch (const std::exception&) {
    throw ParseError(file.string() + ":" + std::to_string(line_no) + ": bad date '" + s + "'");
  }
}

std::vector<CurvePillar> load_curve_csv(const std::filesystem::path& file,
                                        const std::string& value_column) {
  auto in = open_or_throw(file);
  std::string line;
  int line_no = 0;
  std::vector<CurvePillar> pillars;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != value_column)
        throw ParseError(file.string() + ":1: expected header 'date," + value_column + "'");
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    pillars.push_back({parse_date(fields[0], file, line_no),
                       parse_double(fields[1], file, line_no)});
  }
  if (pillars.empty()) throw ParseError(file.string() + ": no pillar rows");
  return pillars;
}

}  // namespace

ForwardCurve load_forward_csv(const std::filesystem::path& file) {
  try {
    return ForwardCurve(load_curve_csv(file, "forward"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

DiscountCurve load_discount_csv(const std::filesystem::path& file) {
  try {
    return DiscountCurve(load_curve_csv(file, "df"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

namespace {

void save_curve_csv(const std::filesystem::path& file, const std::string& value_column,
                    const std::vector<CurvePillar>& pillars) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "date," << value_column << "\n";
  out.precision(12);
  out << std::fixed;
  for (const auto& p : pillars) out << p.date.yyyymmdd() << "," << p.value << "\n";
}

}  // namespace

void save_forward_csv(const std::filesystem::path& file, const ForwardCurve& curve) {
  save_curve_csv(file, "forward", curve.pillars());
}

void save_discount_csv(const std::filesystem::path& file, const DiscountCurve& curve) {
  save_curve_csv(file, "df", curve.pillars());
}

void save_vols_csv(const std::filesystem::path& file, const std::vector<VolQuote>& quotes) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "tenor,expiry,kind,vol_pct\n";
  out.precision(12);
  for (const auto& q : quotes)
    out << q.tenor << "," << q.expiry.yyyymmdd() << "," << to_string(q.kind) << ","
        << q.vol * 100.0 << "\n";
}

std::vector<VolQuote> load_vols_csv(const std::filesystem::path& file) {
  auto in = open_or_throw(file);
  std::string line;
  int line_no = 0;
  std::vector<VolQuote> quotes;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() != 4 || fields[0] != "tenor" || fields[1] != "expiry" ||
          fields[2] != "kind" || fields[3] != "vol_pct")
        throw ParseError(file.string() + ":1: expected header 'tenor,expiry,kind,vol_pct'");
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    VolQuote q;
    q.tenor = fields[0];
    q.expiry = parse_date(fields[1], file, line_no);
    try {
      q.kind = quote_kind_from_string(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    q.vol = parse_double(fields[3], file, line_no) / 100.0;  // percent -> decimal
    quotes.push_back(std::move(q));
  }
  if (quotes.empty()) throw ParseError(file.string() + ": no quote rows");
  return quotes;
}

namespace {

Date json_date(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) throw ParseError(context + ": missing '" + key + "'");
  return Date::from_yyyymmdd(j.at(key).get<long>());
}

CallPut json_cp(const json& j, const std::string& context) {
  if (!j.contains("call")) throw ParseError(context + ": missing 'call' flag");
  return j.at("call").get<bool>() ? CallPut::call : CallPut::put;
}

}  // namespace

DealSet load_deals_json(const std::filesystem::path& file) {
  auto in = open_or_throw(file);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  if (!root.contains("deals") || !root.at("deals").is_array())
    throw ParseError(file.string() + ": expected a top-level 'deals' array");

  DealSet set;
  for (const auto& d : root.at("deals")) {
    try {
      const std::string id = d.value("id", "deal" + std::to_string(set.americans.size() +
                                                                   set.asians.size() +
                                                                   set.europeans.size()));
      const std::string type = d.at("type").get<std::string>();
      if (type == "american") {
        AmericanOption deal;
        deal.id = id;
        deal.notional = d.at("notional").get<double>();
        deal.strike = d.at("strike").get<double>();
        deal.exercise_start = json_date(d, "exercise_start", id);
        deal.exercise_end = json_date(d, "exercise_end", id);
        deal.cp = json_cp(d, id);
        set.americans.push_back(std::move(deal));
      } else if (type == "asian") {
        AsianOption deal;
        deal.id = id;
        deal.notional = d.at("notional").get<double>();
        if (d.contains("strike")) deal.strike = d.at("strike").get<double>();
        deal.expiry = json_date(d, "expiry", id);
        deal.cp = json_cp(d, id);
        const std::string averaging = d.at("averaging").get<std::string>();
        if (averaging == "arithmetic") deal.averaging = AveragingKind::arithmetic;
        else if (averaging == "geometric") deal.averaging = AveragingKind::geometric;
        else throw ParseError(id + ": unknown averaging '" + averaging + "'");
        const std::string family = d.at("family").get<std::string>();
        if (family == "spot") deal.family = AsianFamily::spot;
        else if (family == "strike") deal.family = AsianFamily::strike;
        else throw ParseError(id + ": unknown family '" + family + "'");
        for (const auto& f : d.at("fixings"))
          deal.fixing_dates.push_back(Date::from_yyyymmdd(f.get<long>()));
        if (d.contains("observed_fixings"))
          for (const auto& [k, v] : d.at("observed_fixings").items())
            deal.observed_fixings[Date::from_yyyymmdd(std::stol(k))] = v.get<double>();
        if (d.contains("payment_date")) deal.payment_date = json_date(d, "payment_date", id);
        set.asians.push_back(std::move(deal));
      } else if (type == "european") {
        EuropeanOption deal;
        deal.id = id;
        deal.notional = d.at("notional").get<double>();
        deal.strike = d.at("strike").get<double>();
        deal.expiry = json_date(d, "expiry", id);
        deal.cp = json_cp(d, id);
        set.europeans.push_back(std::move(deal));
      } else {
        throw ParseError("unknown deal type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
  }
  return set;
}

void save_deals_json(const std::filesystem::path& file, const DealSet& deals) {
  json out;
  out["deals"] = json::array();
  for (const auto& d : deals.americans)
    out["deals"].push_back({{"id", d.id},
                            {"type", "american"},
                            {"notional", d.notional},
                            {"strike", d.strike},
                            {"call", d.cp == CallPut::call},
                            {"exercise_start", d.exercise_start.yyyymmdd()},
                            {"exercise_end", d.exercise_end.yyyymmdd()}});
  for (const auto& d : deals.asians) {
    json entry = {{"id", d.id},
                  {"type", "asian"},
                  {"notional", d.notional},
                  {"call", d.cp == CallPut::call},
                  {"expiry", d.expiry.yyyymmdd()},
                  {"averaging",
                   d.averaging == AveragingKind::arithmetic ? "arithmetic" : "geometric"},
                  {"family", d.family == AsianFamily::spot ? "spot" : "strike"}};
    if (d.strike) entry["strike"] = *d.strike;
    json fixings = json::array();
    for (Date f : d.fixing_dates) fixings.push_back(f.yyyymmdd());
    entry["fixings"] = std::move(fixings);
    if (!d.observed_fixings.empty()) {
      json observed = json::object();
      for (const auto& [date, value] : d.observed_fixings)
        observed[std::to_string(date.yyyymmdd())] = value;
      entry["observed_fixings"] = std::move(observed);
    }
    if (d.payment_date) entry["payment_date"] = d.payment_date->yyyymmdd();
    out["deals"].push_back(std::move(entry));
  }
  for (const auto& d : deals.europeans)
    out["deals"].push_back({{"id", d.id},
                            {"type", "european"},
                            {"notional", d.notional},
                            {"strike", d.strike},
                            {"call", d.cp == CallPut::call},
                            {"expiry", d.expiry.yyyymmdd()}});
  std::ofstream stream(file);
  if (!stream) throw std::runtime_error(file.string() + ": cannot write");
  stream << out.dump(2) << "\n";
}

void save_surface_json(const std::filesystem::path& file, const LocalVolSurface& surface) {
  json j;
  j["time_pillars"] = surface.time_pillars();
  j["state_pillars"] = surface.state_pillars();
  std::vector<std::vector<double>> rows;
  for (std::size_t jt = 0; jt < surface.time_count(); ++jt) {
    std::vector<double> row(surface.state_count());
    for (std::size_t k = 0; k < surface.state_count(); ++k) row[k] = surface.vol_at_node(jt, k);
    rows.push_back(std::move(row));
  }
  j["vols"] = rows;
  j["c0"] = surface.c0();
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << j.dump(2) << "\n";
}

LocalVolSurface load_surface_json(const std::filesystem::path& file,
                                  std::shared_ptr<const ForwardCurve> forward) {
  auto in = open_or_throw(file);
  json j;
  try {
    in >> j;
    const auto time_pillars = j.at("time_pillars").get<std::vector<double>>();
    const auto state_pillars = j.at("state_pillars").get<std::vector<double>>();
    const auto rows = j.at("vols").get<std::vector<std::vector<double>>>();
    const double c0 = j.at("c0").get<double>();
    std::vector<double> vols;
    for (const auto& row : rows) {
      if (row.size() != state_pillars.size())
        throw ParseError(file.string() + ": vol row length does not match state pillars");
      vols.insert(vols.end(), row.begin(), row.end());
    }
    return LocalVolSurface(time_pillars, state_pillars, std::move(vols), c0, std::move(forward));
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

void save_validation_report_json(const std::filesystem::path& file,
                                 const ValidationReport& report) {
  json j;
  j["pass"] = report.pass;
  j["violations"] = json::array();
  for (const auto& v : report.violations)
    j["violations"].push_back({{"condition", v.condition}, {"tenor", v.tenor},
                               {"detail", v.detail}});
  j["c1_terms"] = json::array();
  for (const auto& term : report.c1_terms)
    j["c1_terms"].push_back({{"tenor", term.tenor},
                             {"expiry", term.expiry.yyyymmdd()},
                             {"days", term.days},
                             {"variance_weight", term.variance_weight}});
  j["butterflies"] = json::array();
  for (const auto& bf : report.butterflies)
    j["butterflies"].push_back({{"tenor", bf.tenor},
                                {"expiry", bf.expiry.yyyymmdd()},
                                {"bf25", bf.bf25},
                                {"bf10", bf.bf10}});
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << j.dump(2) << "\n";
}

void save_calibration_report_json(const std::filesystem::path& file,
                                  const CalibrationReport& report) {
  json j;
  j["status"] = to_string(report.status);
  j["avg_error"] = report.avg_error;
  j["accepted_steps"] = report.accepted_steps;
  j["rejected_steps"] = report.rejected_steps;
  j["residual_evaluations"] = report.residual_evaluations;
  j["floored_params"] = report.floored_params;
  j["instruments"] = report.instrument_labels;
  j["residuals"] = report.residuals;
  j["params"] = report.params;
  j["trace"] = json::array();
  for (const auto& t : report.trace)
    j["trace"].push_back({{"iteration", t.iteration},
                          {"alpha", t.alpha},
                          {"f2", t.f2},
                          {"w_norm", t.w_norm},
                          {"accepted", t.accepted}});
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << j.dump(2) << "\n";
}

void save_trace_csv(const std::filesystem::path& file, const std::vector<TraceEntry>& trace) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "iteration,alpha,f2,w_norm,accepted\n";
  out.precision(17);
  for (const auto& t : trace)
    out << t.iteration << "," << t.alpha << "," << t.f2 << "," << t.w_norm << ","
        << (t.accepted ? 1 : 0) << "\n";
}

}  // namespace fxlv
